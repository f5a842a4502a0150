//! Resolved command configurations and their execution.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use powmean::cauchy::{confidence_disc, mle_fixed_point, mle_map, sample_cauchy};
use powmean::estimators::{
    geometric_mean, quasi_arithmetic_mean, sums_of_products, truncated_power_mean,
};
use powmean::mixture::{estimate_mixture, sample_mixture};
use powmean::montecarlo::{
    coverage_experiment, prs_variance_sandwich_check, reproduce_tables, trial_rng,
    unbiasedness_check, variance_sweep, CauchyStatistic, MixtureTable, Scenario, TrialConfig,
    Workers,
};
use powmean::{Complex, ComplexParam, Generator, MixtureParams, MleConfig, Statistic};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::input::{display_parts, format_complex, read_sample, write_sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SampleModel {
    Cauchy { gamma: ComplexParam },
    Mixture { params: MixtureParams },
}

/// Every parameter a command depends on, after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Estimate {
        input: PathBuf,
        statistic: Statistic,
        disc: Option<f64>,
    },
    Mixture {
        input: PathBuf,
        alpha_exp: f64,
    },
    Mle {
        input: PathBuf,
        mle: MleConfig,
    },
    Sample {
        model: SampleModel,
        n: usize,
        output: Option<PathBuf>,
    },
    VarianceSweep {
        p: Vec<f64>,
        #[serde(with = "powmean::complex::re_im")]
        alpha: Complex,
        gamma: ComplexParam,
        n: usize,
        reps: usize,
        tolerance: f64,
    },
    Tables {
        which: MixtureTable,
        n: Vec<usize>,
        t: Vec<f64>,
        reps: usize,
        tolerance: f64,
    },
    Coverage {
        generator: Generator,
        gamma: ComplexParam,
        n: usize,
        a: f64,
        reps: usize,
        tolerance: f64,
    },
    Unbiasedness {
        statistic: CauchyStatistic,
        gamma: ComplexParam,
        n: usize,
        reps: usize,
    },
    Prs {
        m: usize,
        #[serde(with = "powmean::complex::re_im")]
        alpha: Complex,
        gamma: ComplexParam,
        n: usize,
        reps: usize,
    },
}

impl RunConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            RunConfig::Estimate { .. } => "estimate",
            RunConfig::Mixture { .. } => "mixture",
            RunConfig::Mle { .. } => "mle",
            RunConfig::Sample { .. } => "sample",
            RunConfig::VarianceSweep { .. } => "simulate variance-sweep",
            RunConfig::Tables { .. } => "simulate tables",
            RunConfig::Coverage { .. } => "simulate coverage",
            RunConfig::Unbiasedness { .. } => "simulate unbiasedness",
            RunConfig::Prs { .. } => "simulate prs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ThresholdFailed,
    NotConverged,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub text: String,
    pub status: Status,
}

fn pass_status(pass: bool) -> Status {
    if pass {
        Status::Success
    } else {
        Status::ThresholdFailed
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

pub fn execute(cfg: &RunConfig, seed: u64, workers: Workers) -> Result<Outcome, CliError> {
    match cfg {
        RunConfig::Estimate {
            input,
            statistic,
            disc,
        } => {
            let s = read_sample(input)?;
            let est = match *statistic {
                Statistic::QuasiArithmetic { generator } => quasi_arithmetic_mean(&generator, &s)?,
                Statistic::Geometric { alpha } => geometric_mean(alpha, &s)?,
                Statistic::TruncatedPower { p, alpha } => truncated_power_mean(p, alpha, &s)?,
                Statistic::SumsOfProducts { m, alpha } => sums_of_products(m, alpha, &s)?,
            };
            let mut text = format!(
                "estimate: {}\nmu={} sigma={}\nn={}\n",
                format_complex(est.estimate),
                display_parts(est.estimate).0,
                display_parts(est.estimate).1,
                est.n
            );
            if est.diagnostics.nonintegrable {
                text.push_str(
                    "warning: p = -1 with a real shift; the estimator is not integrable\n",
                );
            }
            let disc = match (disc, statistic) {
                (Some(a), Statistic::QuasiArithmetic { generator }) => {
                    let d = confidence_disc(generator, &s, *a)?;
                    let _ = writeln!(
                        text,
                        "disc: center={} radius={} level={}",
                        format_complex(d.center),
                        d.radius,
                        d.level
                    );
                    Some(d)
                }
                (Some(_), _) => {
                    return Err(CliError::Usage(
                        "--disc is available for the quasi-arithmetic statistic only".into(),
                    ))
                }
                (None, _) => None,
            };
            Ok(Outcome {
                results: json!({ "estimate": to_value(&est), "disc": to_value(&disc) }),
                text,
                status: Status::Success,
            })
        }
        RunConfig::Mixture { input, alpha_exp } => {
            let s = read_sample(input)?;
            let est = estimate_mixture(&s, *alpha_exp)?;
            let first = est.canonical();
            let second = first.swapped();
            let mut text = String::new();
            for (label, e) in [("labelling 1", first), ("labelling 2", second)] {
                let _ = writeln!(
                    text,
                    "{label}: t={} gamma1={} gamma2={}",
                    e.t_hat,
                    format_complex(e.gamma1_hat),
                    format_complex(e.gamma2_hat)
                );
            }
            let _ = writeln!(text, "branch: {:?}", est.branch);
            if est.low_quality {
                let _ = writeln!(
                    text,
                    "warning: raw weight {} is far outside [0, 1]",
                    est.t_raw
                );
            }
            Ok(Outcome {
                results: json!({ "labellings": [to_value(&first), to_value(&second)] }),
                text,
                status: Status::Success,
            })
        }
        RunConfig::Mle { input, mle } => {
            let s = read_sample(input)?;
            let res = mle_fixed_point(&s, *mle)?;
            let residual = (mle_map(&s, res.estimate)? - res.estimate).norm();
            let mut text = format!(
                "mle: {}\nmu={} sigma={}\niterations={} converged={}\n",
                format_complex(res.estimate),
                display_parts(res.estimate).0,
                display_parts(res.estimate).1,
                res.iterations,
                res.converged
            );
            let _ = writeln!(
                text,
                "|Q(gamma) - gamma| = {residual:e} ({} 2*tol)",
                if residual < 2.0 * mle.tol { "<" } else { ">=" }
            );
            for (k, d) in res.steps.iter().enumerate() {
                let _ = writeln!(text, "  step {:>4}: {d:e}", k + 1);
            }
            let status = if res.converged {
                Status::Success
            } else {
                Status::NotConverged
            };
            Ok(Outcome {
                results: json!({ "result": to_value(&res), "residual": residual }),
                text,
                status,
            })
        }
        RunConfig::Sample { model, n, output } => {
            let mut rng = trial_rng(seed, 0);
            let s = match model {
                SampleModel::Cauchy { gamma } => sample_cauchy(*gamma, *n, &mut rng)?,
                SampleModel::Mixture { params } => sample_mixture(params, *n, &mut rng)?,
            };
            let mut buf = Vec::new();
            write_sample(&mut buf, s.values()).expect("in-memory write");
            let text = match output {
                Some(path) => {
                    let io = |source| CliError::Io {
                        path: path.clone(),
                        source,
                    };
                    let mut file = BufWriter::new(File::create(path).map_err(io)?);
                    std::io::Write::write_all(&mut file, &buf).map_err(io)?;
                    format!("wrote {} values to {}\n", n, path.display())
                }
                None => String::from_utf8(buf).expect("ascii"),
            };
            Ok(Outcome {
                results: json!({ "values": s.values() }),
                text,
                status: Status::Success,
            })
        }
        RunConfig::VarianceSweep {
            p,
            alpha,
            gamma,
            n,
            reps,
            tolerance,
        } => {
            let rows = variance_sweep(p, *alpha, *gamma, *n, *reps, seed, workers);
            let pass = rows
                .iter()
                .all(|r| r.relative_gap.is_some_and(|g| g <= *tolerance));
            let mut text = format!(
                "{:>10} {:>14} {:>12} {:>14} {:>10}\n",
                "p", "n*Var", "se", "V(p)", "gap"
            );
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{:>10} {:>14} {:>12} {:>14} {:>10}",
                    r.p,
                    fmt_opt(r.empirical),
                    fmt_opt(r.empirical_se),
                    fmt_opt(r.theoretical),
                    fmt_opt(r.relative_gap)
                );
                if let Some(e) = &r.error {
                    let _ = writeln!(text, "{:>10} error: {e}", "");
                }
            }
            let _ = writeln!(text, "{} (relative gap <= {tolerance})", verdict(pass));
            Ok(Outcome {
                results: json!({ "rows": to_value(&rows), "pass": pass }),
                text,
                status: pass_status(pass),
            })
        }
        RunConfig::Tables {
            which,
            n,
            t,
            reps,
            tolerance,
        } => {
            let report = reproduce_tables(*which, n, t, *reps, seed, workers)?;
            let mut pass = true;
            let mut text = format!(
                "{:?}, mean pair distance over {} replications\n",
                which, reps
            );
            let _ = write!(text, "{:>8}", "n \\ t");
            for w in t {
                let _ = write!(text, " {:>16.4}", w);
            }
            text.push('\n');
            for (row, nn) in n.iter().enumerate() {
                let _ = write!(text, "{nn:>8}");
                for col in 0..t.len() {
                    let v = report.values[row][col];
                    let cell = match report.reference[row][col] {
                        Some(r) => {
                            let ok = ((v - r) / r).abs() <= *tolerance;
                            pass &= ok;
                            format!("{v:.3} ({r:.3}{})", if ok { "" } else { "!" })
                        }
                        None => format!("{v:.3}"),
                    };
                    let _ = write!(text, " {cell:>16}");
                }
                text.push('\n');
            }
            let _ = writeln!(
                text,
                "{} (reference cells within {}%)",
                verdict(pass),
                tolerance * 100.0
            );
            Ok(Outcome {
                results: json!({ "report": to_value(&report), "pass": pass }),
                text,
                status: pass_status(pass),
            })
        }
        RunConfig::Coverage {
            generator,
            gamma,
            n,
            a,
            reps,
            tolerance,
        } => {
            let r = coverage_experiment(generator, *gamma, *n, *a, *reps, seed, workers)?;
            let pass = (r.coverage - r.level).abs() <= *tolerance;
            let text = format!(
                "coverage {} ({} of {}) nominal {} se {:.5}\n{} (|coverage - nominal| <= {})\n",
                r.coverage,
                r.hits,
                r.reps,
                r.level,
                r.std_error,
                verdict(pass),
                tolerance
            );
            Ok(Outcome {
                results: json!({ "report": to_value(&r), "pass": pass }),
                text,
                status: pass_status(pass),
            })
        }
        RunConfig::Unbiasedness {
            statistic,
            gamma,
            n,
            reps,
        } => {
            let trial = TrialConfig {
                master_seed: seed,
                reps: *reps,
                n: *n,
                scenario: Scenario::Cauchy {
                    gamma: *gamma,
                    statistic: *statistic,
                },
            };
            let r = unbiasedness_check(&trial, gamma.to_complex(), workers)?;
            let text = format!(
                "mean {} target {} |diff| {:e} se {:e} z {:.3}\n{} (z <= 4)\n",
                format_complex(r.summary.mean),
                format_complex(r.target),
                r.deviation,
                r.summary.std_error,
                r.z_score,
                verdict(r.pass)
            );
            Ok(Outcome {
                results: to_value(&r),
                text,
                status: pass_status(r.pass),
            })
        }
        RunConfig::Prs {
            m,
            alpha,
            gamma,
            n,
            reps,
        } => {
            let r = prs_variance_sandwich_check(*m, *alpha, *gamma, *n, *reps, seed, workers)?;
            let text = format!(
                "m={} n={}: lower {} <= n*Var {} (se {}) <= upper {}\nexact finite-n value {}\n{} (bounds +- 3 se)\n",
                r.m,
                r.n,
                r.lower,
                r.empirical,
                r.empirical_se,
                r.upper,
                fmt_opt(r.exact),
                verdict(r.pass)
            );
            Ok(Outcome {
                results: to_value(&r),
                text,
                status: pass_status(r.pass),
            })
        }
    }
}
