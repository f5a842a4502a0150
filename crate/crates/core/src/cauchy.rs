//! The Cauchy model with complex parameter `gamma = mu + i sigma`: sampling,
//! density, asymptotic variances of power means, confidence discs, the
//! fixed-point characterisation of the MLE and the influence function.

use std::f64::consts::PI;

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{principal_arg, principal_pow, Complex, Generator};
use crate::error::{Error, Result};
use crate::estimators::{quasi_arithmetic_mean, Sample};
use crate::quadrature::{integrate, Tolerance};
use statrs::function::gamma::gamma;

/// Location and scale packed as `gamma = mu + i sigma`, `sigma > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamRepr", into = "ParamRepr")]
pub struct ComplexParam {
    mu: f64,
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamRepr {
    mu: f64,
    sigma: f64,
}

impl TryFrom<ParamRepr> for ComplexParam {
    type Error = Error;
    fn try_from(r: ParamRepr) -> Result<Self> {
        ComplexParam::new(r.mu, r.sigma)
    }
}

impl From<ComplexParam> for ParamRepr {
    fn from(g: ComplexParam) -> Self {
        ParamRepr {
            mu: g.mu,
            sigma: g.sigma,
        }
    }
}

impl ComplexParam {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::invalid(format!(
                "Cauchy parameter needs finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"
            )));
        }
        Ok(ComplexParam { mu, sigma })
    }

    pub fn from_complex(z: Complex) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn to_complex(&self) -> Complex {
        Complex::new(self.mu, self.sigma)
    }

    /// One draw by inversion, `mu + sigma tan(pi (U - 1/2))` with `U` in `(0, 1)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.mu + self.sigma * (PI * (u - 0.5)).tan()
    }
}

pub fn sample_cauchy<R: Rng + ?Sized>(
    gamma: ComplexParam,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    Sample::new((0..n).map(|_| gamma.draw(rng)).collect())
}

pub fn cauchy_density(gamma: ComplexParam, x: f64) -> f64 {
    let d = x - gamma.mu;
    gamma.sigma / (PI * (d * d + gamma.sigma * gamma.sigma))
}

fn quad_tol() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-12,
        max_intervals: 20_000,
    }
}

/// `E[h(X)]` for `X ~ Cauchy(gamma)`, using `x = mu + sigma tan(theta)` so the
/// measure becomes `d theta / pi` on `(-pi/2, pi/2)`. Each half is further
/// mapped by `pi/2 - |theta| = (pi/2) w^3` to tame power growth of `h` at infinity.
pub(crate) fn cauchy_expectation<F: Fn(f64) -> f64>(gamma: ComplexParam, h: F) -> Result<f64> {
    let (mu, sigma) = (gamma.mu, gamma.sigma);
    let mut total = 0.0;
    for side in [1.0f64, -1.0] {
        let piece = |w: f64| {
            let v = PI / 2.0 * w * w * w;
            let dv = 1.5 * PI * w * w;
            h(mu + side * sigma / v.tan()) * dv
        };
        total += integrate(piece, 0.0, 1.0, quad_tol())?.value;
    }
    Ok(total / PI)
}

/// `E[h(X - x0)]` where `h` may have an integrable singularity at offset 0.
///
/// The angular domain is split at the singular angle and each side is mapped
/// through `v = L u^k` with `u = 1 - (1 - w)^3`. The power `k` absorbs a
/// singularity of order `|d|^{1/k - 1}`; the cubic flattens the end at infinity.
/// `h` receives the signed offset `d = X - x0`, computed without cancellation.
pub(crate) fn cauchy_expectation_split<F: Fn(f64) -> f64>(
    gamma: ComplexParam,
    x0: f64,
    k: f64,
    h: F,
) -> Result<f64> {
    let sigma = gamma.sigma;
    let ts = ((x0 - gamma.mu) / sigma).atan();
    let cs = ts.cos();
    let mut total = 0.0;
    for side in [1.0f64, -1.0] {
        let len = if side > 0.0 {
            PI / 2.0 - ts
        } else {
            ts + PI / 2.0
        };
        let piece = |w: f64| {
            let c = 1.0 - w;
            let u = 1.0 - c * c * c;
            let v = len * u.powf(k);
            let dv = len * k * u.powf(k - 1.0) * 3.0 * c * c;
            // distance to the pole at pi/2, kept exact as c -> 0
            let rest = -len * (k * (-c * c * c).ln_1p()).exp_m1();
            let d = side * sigma * v.sin() / (rest.sin() * cs);
            h(d) * dv
        };
        total += integrate(piece, 0.0, 1.0, quad_tol())?.value;
    }
    Ok(total / PI)
}

/// `E|X + alpha|^s` for `s > 0`; `+inf` once `s >= 1`.
pub fn shifted_abs_moment(s: f64, alpha: Complex, gamma: ComplexParam) -> Result<f64> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::invalid(format!(
            "moment order must be positive, got {s}"
        )));
    }
    Generator::log(alpha)?;
    if s >= 1.0 {
        return Ok(f64::INFINITY);
    }
    if alpha.im == 0.0 {
        cauchy_expectation_split(gamma, -alpha.re, 1.0, |d| d.abs().powf(s))
    } else {
        cauchy_expectation(gamma, |x| {
            ((x + alpha.re).powi(2) + alpha.im.powi(2)).powf(0.5 * s)
        })
    }
}

/// `E[(X + alpha)^q]` on the principal branch, `0 < q < 1`.
pub fn shifted_power_moment(q: f64, alpha: Complex, gamma: ComplexParam) -> Result<Complex> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("power must lie in (0, 1), got {q}")));
    }
    let g = Generator::new(q, alpha)?;
    let part = |im: bool| {
        let pick = move |z: Complex| if im { z.im } else { z.re };
        if alpha.im == 0.0 {
            cauchy_expectation_split(gamma, -alpha.re, 1.0, |d| {
                pick(principal_pow(Complex::new(d, 0.0), q).unwrap_or_default())
            })
        } else {
            cauchy_expectation(gamma, |x| pick(g.eval(x).unwrap_or_default()))
        }
    };
    Ok(Complex::new(part(false)?, part(true)?))
}

fn check_variance_regime(p: f64, alpha: Complex) -> Result<()> {
    if !(-1.0..=0.0).contains(&p) {
        return Err(Error::invalid(format!(
            "asymptotic variance is available for p in [-1, 0], got {p}"
        )));
    }
    Generator::new(p, alpha)?;
    if alpha.im == 0.0 && p <= -0.5 {
        return Err(Error::regime(format!(
            "asymptotic variance diverges for real alpha and p = {p} in [-1, -1/2]"
        )));
    }
    Ok(())
}

/// `V(p) = Var(f(X)) / |f'(gamma)|^2` by numerical integration against the
/// Cauchy density.
///
/// For `p < 0` this evaluates `|gamma+alpha|^2 E[expm1(2p L)] / p^2` with
/// `L = log|X+alpha| - log|gamma+alpha|`, which is the closed expression
/// `(E|X+alpha|^{2p} - |gamma+alpha|^{2p}) |gamma+alpha|^{2(1-p)} / p^2`
/// rearranged to survive `p -> 0`. At `p = 0` it evaluates
/// `exp(2 E log|X+alpha|) Var(log(X+alpha))`.
pub fn asymptotic_variance_quadrature(p: f64, alpha: Complex, gamma: ComplexParam) -> Result<f64> {
    check_variance_regime(p, alpha)?;
    let shift = gamma.to_complex() + alpha;
    let log_scale = shift.norm().ln();
    let real_shift = alpha.im == 0.0;

    if p < 0.0 {
        let k = 1.0 / (1.0 + 2.0 * p);
        let term = |log_abs: f64| (2.0 * p * (log_abs - log_scale)).exp_m1();
        let e = if real_shift {
            cauchy_expectation_split(gamma, -alpha.re, k, |d| term(d.abs().ln()))?
        } else {
            cauchy_expectation(gamma, |x| {
                term(0.5 * ((x + alpha.re).powi(2) + alpha.im.powi(2)).ln())
            })?
        };
        return Ok(shift.norm_sqr() * e / (p * p));
    }

    // p = 0: log generator
    let log_abs_and_arg = |x: f64| {
        let y = Complex::new(x + alpha.re, alpha.im);
        (0.5 * y.norm_sqr().ln(), principal_arg(y))
    };
    let expect = |h: &dyn Fn(f64, f64) -> f64| -> Result<f64> {
        if real_shift {
            cauchy_expectation_split(gamma, -alpha.re, 3.0, |d| {
                let arg = if d < 0.0 { PI } else { 0.0 };
                h(d.abs().ln(), arg)
            })
        } else {
            cauchy_expectation(gamma, |x| {
                let (l, a) = log_abs_and_arg(x);
                h(l, a)
            })
        }
    };
    let mean_re = expect(&|l, _| l)?;
    let mean_im = expect(&|_, a| a)?;
    let var = expect(&|l, a| (l - mean_re).powi(2) + (a - mean_im).powi(2))?;
    Ok((2.0 * mean_re).exp() * var)
}

/// Closed form for real shifts, `|gamma+alpha|^2 (cos(p pi b) / cos(p pi) - 1) / p^2`
/// with `b = 2 arg(gamma+alpha) / pi - 1`, valid for `-1/2 < p < 0`.
pub fn asymptotic_variance_cos(p: f64, alpha: f64, gamma: ComplexParam) -> Result<f64> {
    if !(p > -0.5 && p < 0.0) {
        return Err(Error::invalid(format!(
            "cosine form needs -1/2 < p < 0, got {p}"
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid("alpha must be finite"));
    }
    let shift = gamma.to_complex() + alpha;
    let b = 2.0 * principal_arg(shift) / PI - 1.0;
    Ok(shift.norm_sqr() * ((p * PI * b).cos() / (p * PI).cos() - 1.0) / (p * p))
}

/// Closed form at `alpha = gamma = i`:
/// `4^{1-p} (Gamma(1/2-p) / (sqrt(pi) Gamma(1-p)) - 4^p) / p^2`.
pub fn asymptotic_variance_gamma(p: f64) -> Result<f64> {
    if !(-1.0..0.0).contains(&p) {
        return Err(Error::invalid(format!(
            "gamma form needs -1 <= p < 0, got {p}"
        )));
    }
    let ratio = gamma(0.5 - p) / (PI.sqrt() * gamma(1.0 - p));
    Ok(4f64.powf(1.0 - p) * (ratio - 4f64.powf(p)) / (p * p))
}

/// `|f'(gamma)|^2 / Var(f(X))`, the reciprocal of the asymptotic variance.
pub fn inaccuracy_rate(p: f64, alpha: Complex, gamma: ComplexParam) -> Result<f64> {
    Ok(1.0 / asymptotic_variance_quadrature(p, alpha, gamma)?)
}

/// `Err` unless `f(X)` is square integrable for Cauchy `X`.
pub fn check_l2_regime(g: &Generator) -> Result<()> {
    let p = g.p();
    if g.has_real_shift() && p <= -0.5 {
        return Err(Error::regime(format!(
            "f(X) is not square integrable for real alpha and p = {p} <= -1/2"
        )));
    }
    if p >= 0.5 {
        return Err(Error::regime(format!(
            "f(X) is not square integrable for p = {p} >= 1/2"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceDisc {
    #[serde(with = "crate::complex::re_im")]
    pub center: Complex,
    pub radius: f64,
    pub level: f64,
    /// Radius collapsed to zero (constant generator values).
    pub degenerate: bool,
}

impl ConfidenceDisc {
    pub fn contains(&self, z: Complex) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// `R_a` with `P(|Z| > R_a) = a` for a standard bivariate normal `Z`.
pub fn disc_quantile(a: f64) -> f64 {
    (-2.0 * a.ln()).sqrt()
}

/// Open disc around the power mean with asymptotic coverage `1 - a`.
pub fn confidence_disc(g: &Generator, s: &Sample, a: f64) -> Result<ConfidenceDisc> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::invalid(format!(
            "miss probability a must lie in (0, 1), got {a}"
        )));
    }
    check_l2_regime(g)?;
    let n = s.len();
    if n < 2 {
        return Err(Error::invalid("confidence disc needs n >= 2"));
    }
    let est = quasi_arithmetic_mean(g, s)?;
    let v = est.diagnostics.variance_proxy.unwrap_or(0.0);
    let slope = g.derivative(est.estimate)?.norm();
    let radius = v.sqrt() * disc_quantile(a) / ((2.0 * n as f64).sqrt() * slope);
    Ok(ConfidenceDisc {
        center: est.estimate,
        radius,
        level: 1.0 - a,
        degenerate: radius == 0.0,
    })
}

/// `(f(x) - f(gamma)) / f'(gamma)`.
pub fn influence_function(g: &Generator, gamma: ComplexParam, x: f64) -> Result<Complex> {
    let z = gamma.to_complex();
    Ok((g.eval(x)? - g.eval_complex(z)?) / g.derivative(z)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    #[serde(with = "crate::complex::re_im")]
    pub start: Complex,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        MleConfig {
            start: Complex::new(0.0, 1.0),
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    #[serde(with = "crate::complex::re_im")]
    pub estimate: Complex,
    pub iterations: usize,
    pub converged: bool,
    /// `|Y_m - Y_{m-1}|` for each iteration.
    pub steps: Vec<f64>,
}

/// `Q(theta)`: the harmonic-type mean with shift `-conj(theta)`.
pub fn mle_map(s: &Sample, theta: Complex) -> Result<Complex> {
    let g = Generator::new(-1.0, -theta.conj())?;
    Ok(quasi_arithmetic_mean(&g, s)?.estimate)
}

/// Iterates `Y_m = Q(Y_{m-1})`; the unique fixed point is the Cauchy MLE.
/// Non-convergence is reported through `converged`, not as an error.
pub fn mle_fixed_point(s: &Sample, cfg: MleConfig) -> Result<MleResult> {
    if s.len() < 3 {
        return Err(Error::invalid("the Cauchy MLE fixed point needs n >= 3"));
    }
    if !cfg.start.re.is_finite() || !cfg.start.im.is_finite() || cfg.start.im <= 0.0 {
        return Err(Error::invalid(
            "start must lie in the open upper half-plane",
        ));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut current = cfg.start;
    let mut steps = Vec::new();
    for it in 1..=cfg.max_iter {
        let next = mle_map(s, current)?;
        let step = (next - current).norm();
        steps.push(step);
        current = next;
        if step < cfg.tol {
            return Ok(MleResult {
                estimate: current,
                iterations: it,
                converged: true,
                steps,
            });
        }
    }
    Ok(MleResult {
        estimate: current,
        iterations: cfg.max_iter,
        converged: false,
        steps,
    })
}
