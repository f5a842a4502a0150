//! Quasi-arithmetic power means and their relatives: the shifted geometric
//! mean, the truncated positive power mean and sums of products.

use serde::{Deserialize, Serialize};

use crate::complex::{principal_log, principal_pow, Complex, Generator};
use crate::error::{Error, Result};

/// A non-empty sample of finite real observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample must contain at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "sample value at index {i} is not finite"
            )));
        }
        Ok(Sample(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Sample::new(v)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.0
    }
}

/// Which statistic produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    QuasiArithmetic {
        generator: Generator,
    },
    Geometric {
        #[serde(with = "crate::complex::re_im")]
        alpha: Complex,
    },
    TruncatedPower {
        p: f64,
        #[serde(with = "crate::complex::re_im")]
        alpha: Complex,
    },
    SumsOfProducts {
        m: usize,
        #[serde(with = "crate::complex::re_im")]
        alpha: Complex,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Empirical variance of the generator values, `V_n`.
    pub variance_proxy: Option<f64>,
    /// Set for `p = -1` with a real shift, where the estimator is not integrable.
    pub nonintegrable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    #[serde(with = "crate::complex::re_im")]
    pub estimate: Complex,
    pub n: usize,
    pub statistic: Statistic,
    pub diagnostics: Diagnostics,
}

fn generator_values(g: &Generator, s: &Sample) -> Result<Vec<Complex>> {
    s.values()
        .iter()
        .enumerate()
        .map(|(index, &x)| {
            g.eval(x).map_err(|e| match e {
                Error::Domain(_) => Error::Pole { index },
                other => other,
            })
        })
        .collect()
}

fn mean(values: &[Complex]) -> Complex {
    values.iter().sum::<Complex>() / values.len() as f64
}

fn spread(values: &[Complex], centre: Complex) -> f64 {
    values.iter().map(|v| (v - centre).norm_sqr()).sum::<f64>() / values.len() as f64
}

/// `f^{-1}((1/n) sum f(x_j))`.
pub fn quasi_arithmetic_mean(g: &Generator, s: &Sample) -> Result<EstimateResult> {
    let fs = generator_values(g, s)?;
    let m = mean(&fs);
    let estimate = g.inverse(m)?;
    Ok(EstimateResult {
        estimate,
        n: s.len(),
        statistic: Statistic::QuasiArithmetic { generator: *g },
        diagnostics: Diagnostics {
            variance_proxy: Some(spread(&fs, m)),
            nonintegrable: g.is_nonintegrable_harmonic(),
        },
    })
}

/// `V_n = (1/n) sum |f(x_j)|^2 - |(1/n) sum f(x_j)|^2`, computed from deviations.
pub fn empirical_variance_proxy(g: &Generator, s: &Sample) -> Result<f64> {
    let fs = generator_values(g, s)?;
    Ok(spread(&fs, mean(&fs)))
}

fn shifted_logs(alpha: Complex, s: &Sample) -> Result<Vec<Complex>> {
    s.values()
        .iter()
        .enumerate()
        .map(|(index, &x)| principal_log(x + alpha).map_err(|_| Error::Pole { index }))
        .collect()
}

/// `prod (x_j + alpha)^{1/n} - alpha`, evaluated in log space.
pub fn geometric_mean(alpha: Complex, s: &Sample) -> Result<EstimateResult> {
    Generator::log(alpha)?;
    let logs = shifted_logs(alpha, s)?;
    Ok(EstimateResult {
        estimate: mean(&logs).exp() - alpha,
        n: s.len(),
        statistic: Statistic::Geometric { alpha },
        diagnostics: Diagnostics::default(),
    })
}

/// `(n^{1/p} M_p - n M_1) / (n^{1/p} - n)` for `0 < p < 1`.
///
/// Computed as `(A - r B) / (1 - r) - alpha` with `r = n^{1 - 1/p}`.
pub fn truncated_power_mean(p: f64, alpha: Complex, s: &Sample) -> Result<EstimateResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "truncated power mean needs 0 < p < 1, got {p}"
        )));
    }
    let n = s.len();
    if n < 2 {
        return Err(Error::invalid(
            "truncated power mean needs n >= 2 (n^{1/p} - n vanishes at n = 1)",
        ));
    }
    Generator::new(p, alpha)?;
    let nf = n as f64;
    let mut power_sum = Complex::new(0.0, 0.0);
    let mut plain_sum = Complex::new(0.0, 0.0);
    for &x in s.values() {
        let y = x + alpha;
        power_sum += principal_pow(y, p)?;
        plain_sum += y;
    }
    // A = (mean Y^p)^{1/p}, B = mean Y
    let a = if power_sum == Complex::new(0.0, 0.0) {
        power_sum
    } else {
        principal_pow(power_sum / nf, 1.0 / p)?
    };
    let b = plain_sum / nf;
    let r = ((1.0 - 1.0 / p) * nf.ln()).exp();
    Ok(EstimateResult {
        estimate: (a - r * b) / (1.0 - r) - alpha,
        n,
        statistic: Statistic::TruncatedPower { p, alpha },
        diagnostics: Diagnostics::default(),
    })
}

/// Average over all `m`-subsets of `prod (x_l + alpha)^{1/m} - alpha`.
///
/// Uses the elementary symmetric means `E_k = e_k / C(j, k)` updated one
/// observation at a time, `E_k <- (1 - k/j) E_k + (k/j) y_j E_{k-1}`, which is
/// the usual `O(nm)` recurrence for `e_k` without the binomial blow-up.
pub fn sums_of_products(m: usize, alpha: Complex, s: &Sample) -> Result<EstimateResult> {
    let n = s.len();
    if m == 0 {
        return Err(Error::invalid("sums of products need m >= 1"));
    }
    if n < m {
        return Err(Error::invalid(format!(
            "sums of products need n >= m, got n = {n}, m = {m}"
        )));
    }
    Generator::log(alpha)?;
    let inv_m = 1.0 / m as f64;
    let mut e = vec![Complex::new(0.0, 0.0); m + 1];
    e[0] = Complex::new(1.0, 0.0);
    for (idx, &x) in s.values().iter().enumerate() {
        let shifted = x + alpha;
        if shifted == Complex::new(0.0, 0.0) {
            return Err(Error::Pole { index: idx });
        }
        let root = principal_pow(shifted, inv_m)?;
        let j = (idx + 1) as f64;
        for k in (1..=m.min(idx + 1)).rev() {
            let w = k as f64 / j;
            e[k] = (1.0 - w) * e[k] + w * root * e[k - 1];
        }
    }
    Ok(EstimateResult {
        estimate: e[m] - alpha,
        n,
        statistic: Statistic::SumsOfProducts { m, alpha },
        diagnostics: Diagnostics::default(),
    })
}

/// `|(x^p + y^p)^{1/p} - (x + y)| / max(|x|^p |y|^{1-p}, |x|^{1-p} |y|^p)`,
/// zero when either argument vanishes.
pub fn truncation_residual_ratio(p: f64, x: Complex, y: Complex) -> f64 {
    let zero = Complex::new(0.0, 0.0);
    if x == zero || y == zero {
        return 0.0;
    }
    let (Ok(xp), Ok(yp)) = (principal_pow(x, p), principal_pow(y, p)) else {
        return f64::NAN;
    };
    let combined = principal_pow(xp + yp, 1.0 / p).unwrap_or(zero);
    let num = (combined - (x + y)).norm();
    let (ax, ay) = (x.norm(), y.norm());
    let den = (ax.powf(p) * ay.powf(1.0 - p)).max(ax.powf(1.0 - p) * ay.powf(p));
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex = Complex::new(0.0, 1.0);

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    fn close(a: Complex, b: Complex, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn qam_examples() {
        let g = Generator::new(-1.0, I).unwrap();
        let r = quasi_arithmetic_mean(&g, &sample(&[1.0, -1.0])).unwrap();
        assert!(close(r.estimate, I, 1e-14));
        assert!(!r.diagnostics.nonintegrable);
        let r = quasi_arithmetic_mean(&Generator::log(c(0.0, 0.0)).unwrap(), &sample(&[1.0, 4.0]))
            .unwrap();
        assert!(close(r.estimate, c(2.0, 0.0), 1e-14));
        let r = quasi_arithmetic_mean(
            &Generator::new(-0.3, c(1.5, 0.0)).unwrap(),
            &sample(&[3.0; 7]),
        )
        .unwrap();
        assert!(close(r.estimate, c(3.0, 0.0), 1e-12));
    }

    #[test]
    fn qam_pole_and_flag() {
        let h = Generator::new(-1.0, c(2.0, 0.0)).unwrap();
        let err = quasi_arithmetic_mean(&h, &sample(&[1.0, 5.0, -2.0])).unwrap_err();
        assert_eq!(err, Error::Pole { index: 2 });
        let r = quasi_arithmetic_mean(&h, &sample(&[1.0, 5.0])).unwrap();
        assert!(r.diagnostics.nonintegrable);
    }

    #[test]
    fn geometric_examples() {
        let zero = c(0.0, 0.0);
        assert!(close(
            geometric_mean(zero, &sample(&[1.0, 4.0])).unwrap().estimate,
            c(2.0, 0.0),
            1e-14
        ));
        assert!(close(
            geometric_mean(zero, &sample(&[-1.0, 1.0]))
                .unwrap()
                .estimate,
            I,
            1e-14
        ));
        assert!(close(
            geometric_mean(zero, &sample(&[7.5, 7.5])).unwrap().estimate,
            c(7.5, 0.0),
            1e-14
        ));
        assert_eq!(
            geometric_mean(zero, &sample(&[1.0, 0.0])).unwrap_err(),
            Error::Pole { index: 1 }
        );
    }

    #[test]
    fn geometric_equals_log_generator() {
        let s = sample(&[-3.0, 0.5, 2.0, 11.0, -0.25]);
        for alpha in [c(0.0, 0.0), c(1.0, 0.0), I, c(-2.0, 0.5)] {
            let a = geometric_mean(alpha, &s).unwrap().estimate;
            let b = quasi_arithmetic_mean(&Generator::log(alpha).unwrap(), &s)
                .unwrap()
                .estimate;
            assert!(close(a, b, 1e-10));
        }
    }

    #[test]
    fn truncated_examples() {
        let zero = c(0.0, 0.0);
        let r = truncated_power_mean(0.5, zero, &sample(&[1.0, 4.0])).unwrap();
        assert!(close(r.estimate, c(2.0, 0.0), 1e-14));
        let r = truncated_power_mean(0.3, I, &sample(&[-2.0; 5])).unwrap();
        assert!(close(r.estimate, c(-2.0, 0.0), 1e-12));
        let r = truncated_power_mean(1e-3, zero, &sample(&[1.0, 4.0])).unwrap();
        assert!((r.estimate - 2.0).norm() < 1e-2);
        assert!(truncated_power_mean(0.5, zero, &sample(&[1.0])).is_err());
        assert!(truncated_power_mean(1.0, zero, &sample(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn sums_of_products_examples() {
        let zero = c(0.0, 0.0);
        let s = sample(&[1.0, 4.0, 9.0]);
        let r = sums_of_products(2, zero, &s).unwrap();
        assert!(close(r.estimate, c(11.0 / 3.0, 0.0), 1e-14));
        let r = sums_of_products(1, zero, &s).unwrap();
        assert!(close(r.estimate, c(14.0 / 3.0, 0.0), 1e-14));
        let s = sample(&[-2.0, 0.7, 3.0, 10.0]);
        let r = sums_of_products(4, I, &s).unwrap();
        let g = geometric_mean(I, &s).unwrap();
        assert!(close(r.estimate, g.estimate, 1e-12));
        assert!(sums_of_products(5, I, &s).is_err());
        assert!(sums_of_products(0, I, &s).is_err());
    }

    #[test]
    fn variance_proxy_examples() {
        let id = Generator::new(1.0, c(0.0, 0.0)).unwrap();
        assert_eq!(
            empirical_variance_proxy(&id, &sample(&[0.0, 2.0])).unwrap(),
            1.0
        );
        assert_eq!(
            empirical_variance_proxy(&id, &sample(&[3.0, 3.0, 3.0])).unwrap(),
            0.0
        );
        let g = Generator::new(-1.0, I).unwrap();
        let v = empirical_variance_proxy(&g, &sample(&[1.0, -1.0])).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn residual_ratio_examples() {
        assert_eq!(
            truncation_residual_ratio(0.5, c(0.0, 0.0), c(3.0, 2.0)),
            0.0
        );
        assert_eq!(
            truncation_residual_ratio(0.5, c(3.0, 2.0), c(0.0, 0.0)),
            0.0
        );
        let r = truncation_residual_ratio(0.5, c(1.0, 0.0), c(1.0, 0.0));
        assert!((r - 2.0).abs() < 1e-14);
    }
}
