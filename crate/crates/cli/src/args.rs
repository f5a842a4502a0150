//! Command-line grammar and its translation to [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use powmean::montecarlo::{CauchyStatistic, MixtureTable, TABLE_SIZES, TABLE_WEIGHTS};
use powmean::{Complex, ComplexParam, Generator, MixtureParams, MleConfig, Statistic};

use crate::error::CliError;
use crate::input::parse_complex;
use crate::run::{RunConfig, SampleModel};

fn complex_arg(s: &str) -> Result<Complex, String> {
    parse_complex(s)
}

#[derive(Debug, Parser)]
#[command(
    name = "powmean",
    version,
    about = "Complex power-mean estimators for Cauchy models"
)]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, env = "POWMEAN_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for simulations (results do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write a JSON run record to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimate of gamma = mu + i sigma from a sample file.
    Estimate(EstimateArgs),
    /// Two-component mixture fit from a sample file.
    Mixture(MixtureArgs),
    /// Cauchy maximum likelihood by fixed-point iteration.
    Mle(MleArgs),
    /// Draw a synthetic sample and write it as CSV.
    Sample(SampleArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Simulate(SimCommand),
    /// Re-run a JSON run record and compare its results.
    Replay { record: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticKind {
    /// f^{-1}(mean f(x)) with f(x) = (x + alpha)^p.
    Qam,
    /// prod (x + alpha)^{1/n} - alpha.
    Geometric,
    /// Truncated positive power mean, 0 < p < 1.
    Truncated,
    /// Average of m-fold products of (x + alpha)^{1/m}.
    Prs,
}

#[derive(Debug, Clone, Args)]
pub struct StatisticArgs {
    #[arg(long, value_enum, default_value_t = StatisticKind::Qam)]
    pub statistic: StatisticKind,
    /// Power parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Shift, written a+bi.
    #[arg(long, value_parser = complex_arg, default_value = "0", allow_hyphen_values = true)]
    pub alpha: Complex,
    /// Product order for the prs statistic.
    #[arg(long)]
    pub m: Option<usize>,
}

impl StatisticArgs {
    fn need_p(&self) -> Result<f64, CliError> {
        self.p
            .ok_or_else(|| CliError::Usage("--p is required for this statistic".into()))
    }

    fn need_m(&self) -> Result<usize, CliError> {
        self.m
            .ok_or_else(|| CliError::Usage("--m is required for the prs statistic".into()))
    }

    pub fn statistic(&self) -> Result<Statistic, CliError> {
        Ok(match self.statistic {
            StatisticKind::Qam => Statistic::QuasiArithmetic {
                generator: Generator::new(self.need_p()?, self.alpha)?,
            },
            StatisticKind::Geometric => {
                Generator::log(self.alpha)?;
                Statistic::Geometric { alpha: self.alpha }
            }
            StatisticKind::Truncated => Statistic::TruncatedPower {
                p: self.need_p()?,
                alpha: self.alpha,
            },
            StatisticKind::Prs => Statistic::SumsOfProducts {
                m: self.need_m()?,
                alpha: self.alpha,
            },
        })
    }

    pub fn cauchy_statistic(&self) -> Result<CauchyStatistic, CliError> {
        Ok(match self.statistic()? {
            Statistic::QuasiArithmetic { generator } => CauchyStatistic::PowerMean { generator },
            Statistic::Geometric { alpha } => CauchyStatistic::PowerMean {
                generator: Generator::log(alpha)?,
            },
            Statistic::TruncatedPower { p, alpha } => CauchyStatistic::Truncated { p, alpha },
            Statistic::SumsOfProducts { m, alpha } => CauchyStatistic::SumsOfProducts { m, alpha },
        })
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub stat: StatisticArgs,
    /// Also report the confidence disc with miss probability A.
    #[arg(long, value_name = "A")]
    pub disc: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MixtureArgs {
    pub input: PathBuf,
    /// Fractional moment exponent, 0 < alpha < 1/6.
    #[arg(long, default_value_t = powmean::mixture::DEFAULT_ALPHA_EXP)]
    pub alpha_exp: f64,
}

#[derive(Debug, Args)]
pub struct MleArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = MleConfig::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = MleConfig::default().max_iter)]
    pub max_iter: usize,
    /// Starting point in the upper half-plane.
    #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
    pub start: Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Cauchy,
    Mixture,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Cauchy)]
    pub model: ModelKind,
    #[arg(long)]
    pub n: usize,
    /// Cauchy parameter mu+sigma i.
    #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
    pub gamma: Complex,
    /// Mixture weight of the second component.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub gamma1: Option<Complex>,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub gamma2: Option<Complex>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhichTable {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// n Var(M_n) against V(p) over a grid of powers.
    VarianceSweep {
        /// Powers, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        p: Vec<f64>,
        #[arg(long, value_parser = complex_arg, default_value = "0", allow_hyphen_values = true)]
        alpha: Complex,
        #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
        gamma: Complex,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1_000)]
        reps: usize,
        /// Largest accepted relative gap.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Mean pair distance of the mixture estimator on the reference grids.
    Tables {
        #[arg(long, value_enum)]
        which: WhichTable,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1_000)]
        reps: usize,
        /// Largest accepted relative deviation from reference cells.
        #[arg(long, default_value_t = 0.25)]
        tolerance: f64,
    },
    /// Coverage of the confidence disc.
    Coverage {
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        p: f64,
        #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
        alpha: Complex,
        #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
        gamma: Complex,
        #[arg(long, default_value_t = 1_000)]
        n: usize,
        /// Miss probability.
        #[arg(long, default_value_t = 0.05)]
        a: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Accepted |coverage - (1 - a)|; defaults to max(0.01, 4 binomial se).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// z-test of E[M_n] = gamma.
    Unbiasedness {
        #[command(flatten)]
        stat: StatisticArgs,
        #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
        gamma: Complex,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// Variance bounds for the sums-of-products statistic.
    Prs {
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
        alpha: Complex,
        #[arg(long, value_parser = complex_arg, default_value = "0+1i", allow_hyphen_values = true)]
        gamma: Complex,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
    },
}

fn param(z: Complex) -> Result<ComplexParam, CliError> {
    Ok(ComplexParam::from_complex(z)?)
}

impl SimCommand {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        Ok(match self {
            SimCommand::VarianceSweep {
                p,
                alpha,
                gamma,
                n,
                reps,
                tolerance,
            } => RunConfig::VarianceSweep {
                p,
                alpha,
                gamma: param(gamma)?,
                n,
                reps,
                tolerance,
            },
            SimCommand::Tables {
                which,
                n,
                t,
                reps,
                tolerance,
            } => RunConfig::Tables {
                which: match which {
                    WhichTable::One => MixtureTable::Table1,
                    WhichTable::Two => MixtureTable::Table2,
                },
                n: n.unwrap_or_else(|| TABLE_SIZES.to_vec()),
                t: t.unwrap_or_else(|| TABLE_WEIGHTS.to_vec()),
                reps,
                tolerance,
            },
            SimCommand::Coverage {
                p,
                alpha,
                gamma,
                n,
                a,
                reps,
                tolerance,
            } => {
                let se = (a * (1.0 - a) / reps.max(1) as f64).sqrt();
                RunConfig::Coverage {
                    generator: Generator::new(p, alpha)?,
                    gamma: param(gamma)?,
                    n,
                    a,
                    reps,
                    tolerance: tolerance.unwrap_or((4.0 * se).max(0.01)),
                }
            }
            SimCommand::Unbiasedness {
                stat,
                gamma,
                n,
                reps,
            } => RunConfig::Unbiasedness {
                statistic: stat.cauchy_statistic()?,
                gamma: param(gamma)?,
                n,
                reps,
            },
            SimCommand::Prs {
                m,
                alpha,
                gamma,
                n,
                reps,
            } => RunConfig::Prs {
                m,
                alpha,
                gamma: param(gamma)?,
                n,
                reps,
            },
        })
    }
}

impl SampleArgs {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let model = match self.model {
            ModelKind::Cauchy => SampleModel::Cauchy {
                gamma: param(self.gamma)?,
            },
            ModelKind::Mixture => {
                let missing = |flag: &str| {
                    CliError::Usage(format!("--{flag} is required for the mixture model"))
                };
                let t = self.t.ok_or_else(|| missing("t"))?;
                let g1 = param(self.gamma1.ok_or_else(|| missing("gamma1"))?)?;
                let g2 = param(self.gamma2.ok_or_else(|| missing("gamma2"))?)?;
                SampleModel::Mixture {
                    params: MixtureParams::new(t, g1, g2)?,
                }
            }
        };
        Ok(RunConfig::Sample {
            model,
            n: self.n,
            output: self.output,
        })
    }
}
