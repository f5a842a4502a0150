//! Command-line front end: argument handling, sample files and run records.

pub mod args;
pub mod error;
pub mod input;
pub mod record;
pub mod run;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use powmean::montecarlo::Workers;

use args::{Cli, Command};
use error::{CliError, EXIT_NONCONVERGENCE, EXIT_THRESHOLD};
use record::RunRecord;
use run::{execute, RunConfig, Status};

fn config_for(command: Command) -> Result<RunConfig, CliError> {
    Ok(match command {
        Command::Estimate(a) => RunConfig::Estimate {
            input: a.input,
            statistic: a.stat.statistic()?,
            disc: a.disc,
        },
        Command::Mixture(a) => RunConfig::Mixture {
            input: a.input,
            alpha_exp: a.alpha_exp,
        },
        Command::Mle(a) => RunConfig::Mle {
            input: a.input,
            mle: powmean::MleConfig {
                start: a.start,
                tol: a.tol,
                max_iter: a.max_iter,
            },
        },
        Command::Sample(a) => a.into_config()?,
        Command::Simulate(sim) => sim.into_config()?,
        Command::Replay { .. } => unreachable!("replay is handled by the caller"),
    })
}

fn write_record(path: &std::path::Path, rec: &RunRecord) -> Result<(), CliError> {
    std::fs::write(path, rec.to_json()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Success => 0,
        Status::ThresholdFailed => EXIT_THRESHOLD,
        Status::NotConverged => EXIT_NONCONVERGENCE,
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let workers = Workers(cli.workers);
    if let Command::Replay { record } = &cli.command {
        let text = std::fs::read_to_string(record).map_err(|source| CliError::Io {
            path: record.clone(),
            source,
        })?;
        let stored: RunRecord = serde_json::from_str(&text)?;
        let outcome = execute(&stored.config, stored.seed, workers)?;
        let same =
            serde_json::to_string(&outcome.results)? == serde_json::to_string(&stored.results)?;
        let _ = writeln!(
            out,
            "{}",
            if same {
                "replay: results identical"
            } else {
                "replay: results differ"
            }
        );
        if let Some(path) = &cli.json {
            write_record(
                path,
                &RunRecord::new(stored.config, outcome.results, stored.seed),
            )?;
        }
        return Ok(if same { 0 } else { EXIT_THRESHOLD });
    }
    let config = config_for(cli.command)?;
    let outcome = execute(&config, cli.seed, workers)?;
    let _ = out.write_all(outcome.text.as_bytes());
    if let Some(path) = &cli.json {
        write_record(path, &RunRecord::new(config, outcome.results, cli.seed))?;
    }
    Ok(status_code(outcome.status))
}

/// Parse `args`, run the command and return the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                error::EXIT_VALIDATION
            } else {
                0
            };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
