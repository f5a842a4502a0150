//! Seeded, order-independent Monte Carlo harness.
//!
//! Trial `i` draws from its own generator seeded by a splitmix64 mix of
//! `(master_seed, i)`. Trial outputs are collected in index order and reduced
//! sequentially, so a summary is bit-identical for any number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::{
    asymptotic_variance_quadrature, check_l2_regime, confidence_disc, mle_fixed_point,
    sample_cauchy, shifted_abs_moment, shifted_power_moment, ComplexParam, MleConfig,
};
use crate::complex::{Complex, Generator};
use crate::error::{Error, Result};
use crate::estimators::{quasi_arithmetic_mean, sums_of_products, truncated_power_mean, Sample};
use crate::mixture::{estimate_mixture, hausdorff_pair_distance, sample_mixture, MixtureParams};

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub fn trial_rng(master: u64, index: u64) -> TrialRng {
    TrialRng::seed_from_u64(derive_seed(master, index))
}

/// Worker count for a run; `None` uses the global rayon pool.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Workers(pub Option<usize>);

impl Workers {
    pub fn install<T: Send>(self, job: impl FnOnce() -> T + Send) -> T {
        match self.0 {
            Some(k) => match rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
            {
                Ok(pool) => pool.install(job),
                Err(_) => job(),
            },
            None => job(),
        }
    }
}

/// Run `reps` independent trials and return their outputs in index order.
pub fn map_trials<T, F>(master_seed: u64, reps: usize, workers: Workers, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut TrialRng) -> Result<T> + Sync + Send,
{
    workers.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(master_seed, i as u64);
                trial(i, &mut rng).map_err(|e| Error::Trial {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect()
    })
}

/// What a Cauchy trial computes from its sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CauchyStatistic {
    PowerMean {
        generator: Generator,
    },
    Truncated {
        p: f64,
        #[serde(with = "crate::complex::re_im")]
        alpha: Complex,
    },
    SumsOfProducts {
        m: usize,
        #[serde(with = "crate::complex::re_im")]
        alpha: Complex,
    },
    Mle {
        tol: f64,
        max_iter: usize,
    },
}

impl CauchyStatistic {
    pub fn evaluate(&self, s: &Sample) -> Result<Complex> {
        Ok(match *self {
            CauchyStatistic::PowerMean { generator } => {
                quasi_arithmetic_mean(&generator, s)?.estimate
            }
            CauchyStatistic::Truncated { p, alpha } => truncated_power_mean(p, alpha, s)?.estimate,
            CauchyStatistic::SumsOfProducts { m, alpha } => sums_of_products(m, alpha, s)?.estimate,
            CauchyStatistic::Mle { tol, max_iter } => {
                let cfg = MleConfig {
                    tol,
                    max_iter,
                    ..MleConfig::default()
                };
                mle_fixed_point(s, cfg)?.estimate
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Scenario {
    /// Cauchy samples reduced by a point estimator of `gamma`.
    Cauchy {
        gamma: ComplexParam,
        statistic: CauchyStatistic,
    },
    /// Mixture samples; the trial value is the pair distance from the estimated
    /// roots to the true `(gamma1^alpha, gamma2^alpha)`.
    Mixture {
        params: MixtureParams,
        alpha_exp: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub master_seed: u64,
    pub reps: usize,
    pub n: usize,
    pub scenario: Scenario,
}

impl TrialConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        Ok(())
    }

    fn run_one(&self, rng: &mut TrialRng) -> Result<Complex> {
        match self.scenario {
            Scenario::Cauchy { gamma, statistic } => {
                let s = sample_cauchy(gamma, self.n, rng)?;
                statistic.evaluate(&s)
            }
            Scenario::Mixture { params, alpha_exp } => {
                let s = sample_mixture(&params, self.n, rng)?;
                let est = estimate_mixture(&s, alpha_exp)?;
                let truth = params.roots(alpha_exp);
                Ok(Complex::new(
                    hausdorff_pair_distance((est.a1, est.a2), truth),
                    0.0,
                ))
            }
        }
    }
}

/// Aggregate of complex trial outputs; variance is `Var(Re) + Var(Im)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    #[serde(with = "crate::complex::re_im")]
    pub mean: Complex,
    /// Unbiased sample variance (zero for a single trial).
    pub variance: f64,
    pub count: usize,
    /// `sqrt(variance / count)`.
    pub std_error: f64,
    /// `n * variance`.
    pub scaled_variance: f64,
    /// Standard error of `scaled_variance`, from the fourth central moment.
    pub scaled_variance_se: f64,
}

/// One-pass Welford accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexWelford {
    count: usize,
    mean: Complex,
    m2: f64,
}

impl ComplexWelford {
    pub fn push(&mut self, z: Complex) {
        self.count += 1;
        let delta = z - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += (delta * (z - self.mean).conj()).re;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Complex {
        self.mean
    }

    /// Unbiased variance; zero below two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }
}

/// Summarise trial outputs for samples of size `n`.
pub fn summarize(values: &[Complex], n: usize) -> TrialSummary {
    let mut acc = ComplexWelford::default();
    values.iter().for_each(|&z| acc.push(z));
    let count = acc.count();
    let variance = acc.variance();
    let variance_se = if count < 2 {
        0.0
    } else {
        let mean = acc.mean();
        let (m2, m4) = values.iter().fold((0.0, 0.0), |(m2, m4), z| {
            let d = (z - mean).norm_sqr();
            (m2 + d, m4 + d * d)
        });
        let (m2, m4) = (m2 / count as f64, m4 / count as f64);
        ((m4 - m2 * m2).max(0.0) / count as f64).sqrt()
    };
    TrialSummary {
        mean: acc.mean(),
        variance,
        count,
        std_error: (variance / count.max(1) as f64).sqrt(),
        scaled_variance: n as f64 * variance,
        scaled_variance_se: n as f64 * variance_se,
    }
}

pub fn collect_trials(cfg: &TrialConfig, workers: Workers) -> Result<Vec<Complex>> {
    cfg.validate()?;
    map_trials(cfg.master_seed, cfg.reps, workers, |_, rng| {
        cfg.run_one(rng)
    })
}

pub fn run_trials(cfg: &TrialConfig, workers: Workers) -> Result<TrialSummary> {
    Ok(summarize(&collect_trials(cfg, workers)?, cfg.n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessReport {
    pub summary: TrialSummary,
    #[serde(with = "crate::complex::re_im")]
    pub target: Complex,
    pub deviation: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Statistics with `E[M_n] = gamma` under the Cauchy model; errors otherwise.
fn check_unbiased_regime(cfg: &TrialConfig) -> Result<()> {
    let n = cfg.n;
    let Scenario::Cauchy { statistic, .. } = cfg.scenario else {
        return Err(Error::regime(
            "unbiasedness applies to point estimators of gamma only",
        ));
    };
    match statistic {
        CauchyStatistic::PowerMean { generator } => {
            let p = generator.p();
            if n < 2 {
                return Err(Error::regime(
                    "power means of a single Cauchy draw are not integrable (need n >= 2)",
                ));
            }
            if generator.is_nonintegrable_harmonic() {
                return Err(Error::regime(
                    "p = -1 with real alpha: the harmonic mean is itself Cauchy and not integrable",
                ));
            }
            if p > 0.0 {
                return Err(Error::regime(
                    "positive power means of Cauchy samples are not integrable; use the truncated statistic",
                ));
            }
            Ok(())
        }
        CauchyStatistic::Truncated { .. } if n >= 2 => Ok(()),
        CauchyStatistic::Truncated { .. } => {
            Err(Error::regime("truncated power mean needs n >= 2"))
        }
        CauchyStatistic::SumsOfProducts { m, .. } if m >= 2 => Ok(()),
        CauchyStatistic::SumsOfProducts { .. } => Err(Error::regime(
            "m = 1 is the arithmetic mean, which is not integrable",
        )),
        CauchyStatistic::Mle { .. } => Err(Error::regime("no unbiasedness result for the MLE")),
    }
}

/// Monte Carlo test of `E[M_n] = target`; passes when the z-score is at most 4.
pub fn unbiasedness_check(
    cfg: &TrialConfig,
    target: Complex,
    workers: Workers,
) -> Result<UnbiasednessReport> {
    check_unbiased_regime(cfg)?;
    let summary = run_trials(cfg, workers)?;
    let deviation = (summary.mean - target).norm();
    let z_score = if summary.std_error > 0.0 {
        deviation / summary.std_error
    } else if deviation == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(UnbiasednessReport {
        summary,
        target,
        deviation,
        z_score,
        pass: z_score <= 4.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub empirical: Option<f64>,
    pub empirical_se: Option<f64>,
    pub theoretical: Option<f64>,
    pub relative_gap: Option<f64>,
    pub error: Option<String>,
}

/// `n Var(M_n)` against the asymptotic variance for each `p`; row errors are
/// recorded rather than propagated.
pub fn variance_sweep(
    p_grid: &[f64],
    alpha: Complex,
    gamma: ComplexParam,
    n: usize,
    reps: usize,
    master_seed: u64,
    workers: Workers,
) -> Vec<SweepRow> {
    p_grid
        .iter()
        .enumerate()
        .map(|(row, &p)| {
            let mut out = SweepRow {
                p,
                empirical: None,
                empirical_se: None,
                theoretical: None,
                relative_gap: None,
                error: None,
            };
            let mut errors = Vec::new();
            match Generator::new(p, alpha) {
                Ok(generator) => {
                    let cfg = TrialConfig {
                        master_seed: derive_seed(master_seed, row as u64),
                        reps,
                        n,
                        scenario: Scenario::Cauchy {
                            gamma,
                            statistic: CauchyStatistic::PowerMean { generator },
                        },
                    };
                    match run_trials(&cfg, workers) {
                        Ok(s) => {
                            out.empirical = Some(s.scaled_variance);
                            out.empirical_se = Some(s.scaled_variance_se);
                        }
                        Err(e) => errors.push(e.to_string()),
                    }
                }
                Err(e) => errors.push(e.to_string()),
            }
            match asymptotic_variance_quadrature(p, alpha, gamma) {
                Ok(v) => out.theoretical = Some(v),
                Err(e) => errors.push(e.to_string()),
            }
            if let (Some(e), Some(v)) = (out.empirical, out.theoretical) {
                out.relative_gap = Some((e - v).abs() / v);
            }
            if !errors.is_empty() {
                out.error = Some(errors.join("; "));
            }
            out
        })
        .collect()
}

/// The two mixture configurations with reference mean pair-distance tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixtureTable {
    /// `(mu1, sigma1, mu2, sigma2) = (0, 1, 20, 2)`.
    Table1,
    /// `(mu1, sigma1, mu2, sigma2) = (0, 1, 5, 6)`.
    Table2,
}

pub const TABLE_SIZES: [usize; 3] = [100, 1000, 10_000];
pub const TABLE_WEIGHTS: [f64; 4] = [1.0 / 6.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.0];

/// Reference mean pair distances at `10^4` replications, rows by
/// [`TABLE_SIZES`], columns by [`TABLE_WEIGHTS`].
pub const REFERENCE_TABLE_1: [[f64; 4]; 3] = [
    [0.162, 0.114, 0.092, 0.080],
    [0.073, 0.047, 0.036, 0.030],
    [0.025, 0.017, 0.013, 0.010],
];
pub const REFERENCE_TABLE_2: [[f64; 4]; 3] = [
    [0.549, 0.470, 0.433, 0.449],
    [0.234, 0.181, 0.157, 0.152],
    [0.088, 0.065, 0.055, 0.045],
];

impl MixtureTable {
    pub fn components(self) -> (ComplexParam, ComplexParam) {
        let (m2, s2) = match self {
            MixtureTable::Table1 => (20.0, 2.0),
            MixtureTable::Table2 => (5.0, 6.0),
        };
        (
            ComplexParam::new(0.0, 1.0).expect("valid"),
            ComplexParam::new(m2, s2).expect("valid"),
        )
    }

    pub fn reference(self) -> [[f64; 4]; 3] {
        match self {
            MixtureTable::Table1 => REFERENCE_TABLE_1,
            MixtureTable::Table2 => REFERENCE_TABLE_2,
        }
    }

    /// Reference value for a grid cell, if it is one of the tabulated ones.
    pub fn reference_cell(self, n: usize, t: f64) -> Option<f64> {
        let row = TABLE_SIZES.iter().position(|&m| m == n)?;
        let col = TABLE_WEIGHTS.iter().position(|&w| (w - t).abs() < 1e-12)?;
        Some(self.reference()[row][col])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: MixtureTable,
    pub n_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub reps: usize,
    pub alpha_exp: f64,
    /// `values[row][col]` for `n_list[row]`, `t_list[col]`.
    pub values: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
    pub reference: Vec<Vec<Option<f64>>>,
}

pub fn reproduce_tables(
    table: MixtureTable,
    n_list: &[usize],
    t_list: &[f64],
    reps: usize,
    master_seed: u64,
    workers: Workers,
) -> Result<TableReport> {
    let alpha_exp = crate::mixture::DEFAULT_ALPHA_EXP;
    let (g1, g2) = table.components();
    let mut values = Vec::with_capacity(n_list.len());
    let mut std_errors = Vec::with_capacity(n_list.len());
    let mut reference = Vec::with_capacity(n_list.len());
    for (row, &n) in n_list.iter().enumerate() {
        let mut vals = Vec::with_capacity(t_list.len());
        let mut ses = Vec::with_capacity(t_list.len());
        let mut refs = Vec::with_capacity(t_list.len());
        for (col, &t) in t_list.iter().enumerate() {
            let cell = (row * t_list.len() + col) as u64;
            let cfg = TrialConfig {
                master_seed: derive_seed(master_seed, cell),
                reps,
                n,
                scenario: Scenario::Mixture {
                    params: MixtureParams::new(t, g1, g2)?,
                    alpha_exp,
                },
            };
            let s = run_trials(&cfg, workers)?;
            vals.push(s.mean.re);
            ses.push(s.std_error);
            refs.push(table.reference_cell(n, t));
        }
        values.push(vals);
        std_errors.push(ses);
        reference.push(refs);
    }
    Ok(TableReport {
        table,
        n_list: n_list.to_vec(),
        t_list: t_list.to_vec(),
        reps,
        alpha_exp,
        values,
        std_errors,
        reference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub coverage: f64,
    pub hits: usize,
    pub reps: usize,
    pub level: f64,
    /// Binomial standard error of `coverage`.
    pub std_error: f64,
}

/// Fraction of trials whose confidence disc contains `gamma`.
pub fn coverage_experiment(
    g: &Generator,
    gamma: ComplexParam,
    n: usize,
    a: f64,
    reps: usize,
    master_seed: u64,
    workers: Workers,
) -> Result<CoverageReport> {
    check_l2_regime(g)?;
    if reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    let truth = gamma.to_complex();
    let inside = map_trials(master_seed, reps, workers, |_, rng| {
        let s = sample_cauchy(gamma, n, rng)?;
        Ok(confidence_disc(g, &s, a)?.contains(truth))
    })?;
    let hits = inside.iter().filter(|&&b| b).count();
    let coverage = hits as f64 / reps as f64;
    Ok(CoverageReport {
        coverage,
        hits,
        reps,
        level: 1.0 - a,
        std_error: (coverage * (1.0 - coverage) / reps as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub m: usize,
    pub n: usize,
    pub empirical: f64,
    pub empirical_se: f64,
    /// `m Var(G_m) b_m / a_m`.
    pub lower: f64,
    /// `m Var(G_m)`; infinite when `E|Y|^{2/m}` diverges.
    pub upper: f64,
    /// Exact `n Var(R_{m,n})` from the overlap expansion, when finite.
    pub exact: Option<f64>,
    pub pass: bool,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Checks `m Var(G_m) b_m / a_m <= n Var(R_{m,n}) <= m Var(G_m)` within three
/// standard errors, with `a_m = E[|Y|^{2/m}]^m`, `b_m = |E[Y^{1/m}]|^{2m}` and
/// `Y = X + alpha` for Cauchy `X`.
pub fn prs_variance_sandwich_check(
    m: usize,
    alpha: Complex,
    gamma: ComplexParam,
    n: usize,
    reps: usize,
    master_seed: u64,
    workers: Workers,
) -> Result<SandwichReport> {
    if m < 2 {
        return Err(Error::invalid("sandwich bounds need m >= 2"));
    }
    if n < m {
        return Err(Error::invalid("sandwich bounds need n >= m"));
    }
    if alpha.im <= 0.0 {
        return Err(Error::regime(
            "sandwich bounds are checked for alpha in the open upper half-plane",
        ));
    }
    let q = 1.0 / m as f64;
    let abs_moment = shifted_abs_moment(2.0 * q, alpha, gamma)?;
    let root_moment = shifted_power_moment(q, alpha, gamma)?.norm_sqr();
    let mi = m as i32;
    let b_m = root_moment.powi(mi);
    let (lower, upper, exact) = if abs_moment.is_finite() {
        let a_m = abs_moment.powi(mi);
        let var_g = a_m - b_m;
        let total: f64 = (0..=m)
            .map(|i| {
                binomial(m, i)
                    * binomial(n - m, m - i)
                    * abs_moment.powi(i as i32)
                    * root_moment.powi((m - i) as i32)
            })
            .sum();
        let exact = n as f64 * (total / binomial(n, m) - b_m);
        (m as f64 * var_g * b_m / a_m, m as f64 * var_g, Some(exact))
    } else {
        (m as f64 * b_m, f64::INFINITY, None)
    };
    let cfg = TrialConfig {
        master_seed,
        reps,
        n,
        scenario: Scenario::Cauchy {
            gamma,
            statistic: CauchyStatistic::SumsOfProducts { m, alpha },
        },
    };
    let s = run_trials(&cfg, workers)?;
    let slack = 3.0 * s.scaled_variance_se;
    Ok(SandwichReport {
        m,
        n,
        empirical: s.scaled_variance,
        empirical_se: s.scaled_variance_se,
        lower,
        upper,
        exact,
        pass: s.scaled_variance >= lower - slack && s.scaled_variance <= upper + slack,
    })
}
