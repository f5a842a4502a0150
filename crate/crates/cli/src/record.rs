use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::run::RunConfig;

/// A persisted run: replaying `config` with `seed` reproduces `results`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub seed: u64,
    pub timestamp: String,
    pub software_version: String,
}

impl RunRecord {
    pub fn new(config: RunConfig, results: Value, seed: u64) -> Self {
        RunRecord {
            command: config.command_name().to_string(),
            config,
            results,
            seed,
            timestamp: timestamp(),
            software_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serialises");
        s.push('\n');
        s
    }
}

/// RFC 3339 UTC time, taken from `SOURCE_DATE_EPOCH` when it is set.
pub fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
