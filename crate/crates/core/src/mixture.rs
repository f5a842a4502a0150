//! Two-component mixture Cauchy model and its closed-form fractional-moment
//! estimator.
//!
//! With `a_j = gamma_j^alpha` and `B_j = E[X^{j alpha}] = (1-t) a_1^j + t a_2^j`,
//! the roots `a_1, a_2` solve `z^2 - S z + P = 0` where
//! `S = (B_3 - B_1 B_2) / (B_2 - B_1^2)` and `P = (B_1 B_3 - B_2^2) / (B_2 - B_1^2)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cauchy::ComplexParam;
use crate::complex::{principal_pow, Complex};
use crate::error::{Error, Result};
use crate::estimators::Sample;

/// Default fractional exponent.
pub const DEFAULT_ALPHA_EXP: f64 = 0.1;

const T_EPS: f64 = 1e-6;

/// `(1 - t) Cauchy(gamma1) + t Cauchy(gamma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRepr", into = "MixtureRepr")]
pub struct MixtureParams {
    t: f64,
    gamma1: ComplexParam,
    gamma2: ComplexParam,
}

#[derive(Serialize, Deserialize)]
struct MixtureRepr {
    t: f64,
    gamma1: ComplexParam,
    gamma2: ComplexParam,
}

impl TryFrom<MixtureRepr> for MixtureParams {
    type Error = Error;
    fn try_from(r: MixtureRepr) -> Result<Self> {
        MixtureParams::new(r.t, r.gamma1, r.gamma2)
    }
}

impl From<MixtureParams> for MixtureRepr {
    fn from(m: MixtureParams) -> Self {
        MixtureRepr {
            t: m.t,
            gamma1: m.gamma1,
            gamma2: m.gamma2,
        }
    }
}

impl MixtureParams {
    pub fn new(t: f64, gamma1: ComplexParam, gamma2: ComplexParam) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::invalid(format!(
                "mixture weight t must lie in (0, 1), got {t}"
            )));
        }
        if gamma1 == gamma2 {
            return Err(Error::invalid("mixture components must differ"));
        }
        Ok(MixtureParams { t, gamma1, gamma2 })
    }

    /// Same distribution with components relabelled.
    pub fn swapped(&self) -> Self {
        MixtureParams {
            t: 1.0 - self.t,
            gamma1: self.gamma2,
            gamma2: self.gamma1,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma1(&self) -> ComplexParam {
        self.gamma1
    }

    pub fn gamma2(&self) -> ComplexParam {
        self.gamma2
    }

    /// `(gamma1^alpha, gamma2^alpha)`.
    pub fn roots(&self, alpha_exp: f64) -> (Complex, Complex) {
        (
            principal_pow(self.gamma1.to_complex(), alpha_exp).expect("gamma is nonzero"),
            principal_pow(self.gamma2.to_complex(), alpha_exp).expect("gamma is nonzero"),
        )
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.draw_labelled(rng).1
    }

    /// A draw together with the component it came from (1 or 2).
    pub fn draw_labelled<R: Rng + ?Sized>(&self, rng: &mut R) -> (u8, f64) {
        if rng.gen::<f64>() < self.t {
            (2, self.gamma2.draw(rng))
        } else {
            (1, self.gamma1.draw(rng))
        }
    }
}

/// Component 2 with probability `t`, else component 1.
pub fn sample_mixture<R: Rng + ?Sized>(
    params: &MixtureParams,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    Sample::new((0..n).map(|_| params.draw(rng)).collect())
}

fn check_alpha_exp(alpha_exp: f64) -> Result<()> {
    if !(alpha_exp > 0.0 && alpha_exp < 1.0 / 6.0) {
        return Err(Error::invalid(format!(
            "fractional exponent must lie in (0, 1/6), got {alpha_exp}"
        )));
    }
    Ok(())
}

/// `(B_1, B_2, B_3)` with `B_j` an (empirical or population) mean of `X^{j alpha}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTriple {
    #[serde(with = "crate::complex::re_im::array")]
    pub b: [Complex; 3],
    pub alpha_exp: f64,
}

/// Sample means of `x^{alpha}, x^{2 alpha}, x^{3 alpha}` on the principal branch.
pub fn fractional_moment_vector(s: &Sample, alpha_exp: f64) -> Result<MomentTriple> {
    check_alpha_exp(alpha_exp)?;
    let mut b = [Complex::new(0.0, 0.0); 3];
    for &x in s.values() {
        let z = Complex::new(x, 0.0);
        for (j, acc) in b.iter_mut().enumerate() {
            *acc += principal_pow(z, (j + 1) as f64 * alpha_exp)?;
        }
    }
    let n = s.len() as f64;
    Ok(MomentTriple {
        b: b.map(|v| v / n),
        alpha_exp,
    })
}

/// `B_j = (1 - t) gamma1^{j alpha} + t gamma2^{j alpha}`.
pub fn population_moments(params: &MixtureParams, alpha_exp: f64) -> Result<MomentTriple> {
    check_alpha_exp(alpha_exp)?;
    let t = params.t;
    let mut b = [Complex::new(0.0, 0.0); 3];
    for (j, out) in b.iter_mut().enumerate() {
        let e = (j + 1) as f64 * alpha_exp;
        *out = (1.0 - t) * principal_pow(params.gamma1.to_complex(), e)?
            + t * principal_pow(params.gamma2.to_complex(), e)?;
    }
    Ok(MomentTriple { b, alpha_exp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootBranch {
    /// `S/2 +- sqrt(S^2/4 - P)`.
    Direct,
    /// Through the ratio `a_2 / a_1`, used when `Re(a_1 - a_2)` vanishes.
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureEstimate {
    #[serde(with = "crate::complex::re_im")]
    pub a1: Complex,
    #[serde(with = "crate::complex::re_im")]
    pub a2: Complex,
    #[serde(with = "crate::complex::re_im")]
    pub gamma1_hat: Complex,
    #[serde(with = "crate::complex::re_im")]
    pub gamma2_hat: Complex,
    /// Real part of `(a1 - B1) / (a1 - a2)`, clipped to `[eps, 1 - eps]`.
    pub t_hat: f64,
    /// Unclipped real part of the weight ratio.
    pub t_raw: f64,
    /// Imaginary part of the weight ratio; zero for exact moments.
    pub t_imag: f64,
    pub branch: RootBranch,
    /// Raw weight fell outside `(-0.25, 1.25)`.
    pub low_quality: bool,
}

impl MixtureEstimate {
    /// Same estimate with the component labels exchanged.
    pub fn swapped(&self) -> Self {
        MixtureEstimate {
            a1: self.a2,
            a2: self.a1,
            gamma1_hat: self.gamma2_hat,
            gamma2_hat: self.gamma1_hat,
            t_hat: 1.0 - self.t_hat,
            t_raw: 1.0 - self.t_raw,
            t_imag: -self.t_imag,
            ..*self
        }
    }

    /// The labelling with `t_hat <= 1/2`.
    pub fn canonical(&self) -> Self {
        if self.t_hat > 0.5 {
            self.swapped()
        } else {
            *self
        }
    }
}

/// Solve the moment equations for `(a_1, a_2, t)` and map back to `gamma_j = a_j^{1/alpha}`.
pub fn solve_mixture(m: &MomentTriple) -> Result<MixtureEstimate> {
    check_alpha_exp(m.alpha_exp)?;
    let [b1, b2, b3] = m.b;
    let denom = b2 - b1 * b1;
    let scale = b2.norm().max(b1.norm_sqr());
    if denom.norm().is_nan() || denom.norm() <= 1e-12 * scale {
        return Err(Error::Degenerate(format!(
            "|B2 - B1^2| = {:e} is negligible; the sample looks like a single component",
            denom.norm()
        )));
    }
    let sum = (b3 - b1 * b2) / denom;
    let prod = (b1 * b3 - b2 * b2) / denom;
    let disc = sum * sum / 4.0 - prod;
    let root = disc.sqrt();
    let (mut a1, mut a2) = (sum / 2.0 + root, sum / 2.0 - root);
    let mut branch = RootBranch::Direct;

    let tol_branch = 1e-8 * root.norm();
    if (a1 - a2).re.abs() < tol_branch && prod.norm() > 0.0 {
        // r + 1/r = S^2/P - 2 with r = a1/a2
        let f5 = sum * sum / prod - 2.0;
        let f6 = f5 * f5 - 4.0;
        let ratio = (f5 - f6.sqrt()) / 2.0;
        a1 = sum / (1.0 + ratio);
        a2 = sum - a1;
        branch = RootBranch::Ratio;
    }
    if a1 == a2 {
        return Err(Error::Degenerate(
            "moment equations have a double root".into(),
        ));
    }

    let w = (a1 - b1) / (a1 - a2);
    let t_raw = w.re;
    let inv = 1.0 / m.alpha_exp;
    Ok(MixtureEstimate {
        a1,
        a2,
        gamma1_hat: principal_pow(a1, inv)?,
        gamma2_hat: principal_pow(a2, inv)?,
        t_hat: t_raw.clamp(T_EPS, 1.0 - T_EPS),
        t_raw,
        t_imag: w.im,
        branch,
        low_quality: !(t_raw > -0.25 && t_raw < 1.25),
    })
}

/// `max(min(|a-c|, |a-d|), min(|b-c|, |b-d|))` for `first = (a, b)`, `second = (c, d)`.
///
/// This is the one-sided distance from `first` to `second`; it is not symmetric.
pub fn hausdorff_pair_distance(first: (Complex, Complex), second: (Complex, Complex)) -> f64 {
    let (a, b) = first;
    let (c, d) = second;
    let near = |z: Complex| (z - c).norm().min((z - d).norm());
    near(a).max(near(b))
}

pub fn estimate_mixture(s: &Sample, alpha_exp: f64) -> Result<MixtureEstimate> {
    if s.len() < 3 {
        return Err(Error::invalid("mixture estimation needs n >= 3"));
    }
    solve_mixture(&fractional_moment_vector(s, alpha_exp)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const I: Complex = Complex::new(0.0, 1.0);

    fn cp(mu: f64, sigma: f64) -> ComplexParam {
        ComplexParam::new(mu, sigma).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn params_validation() {
        assert!(MixtureParams::new(0.0, cp(0.0, 1.0), cp(1.0, 1.0)).is_err());
        assert!(MixtureParams::new(1.0, cp(0.0, 1.0), cp(1.0, 1.0)).is_err());
        assert!(MixtureParams::new(0.5, cp(0.0, 1.0), cp(0.0, 1.0)).is_err());
    }

    #[test]
    fn moment_vector_examples() {
        let s = Sample::new(vec![2.5; 4]).unwrap();
        let m = fractional_moment_vector(&s, 0.1).unwrap();
        for j in 0..3 {
            let want = 2.5f64.powf(0.1 * (j + 1) as f64);
            assert!((m.b[j] - want).norm() < 1e-14);
        }
        let s = Sample::new(vec![-1.0]).unwrap();
        let m = fractional_moment_vector(&s, 0.1).unwrap();
        for j in 0..3 {
            let want = Complex::from_polar(1.0, std::f64::consts::PI * 0.1 * (j + 1) as f64);
            assert!((m.b[j] - want).norm() < 1e-14);
        }
        let s = Sample::new(vec![0.0, 1.0]).unwrap();
        assert!((fractional_moment_vector(&s, 0.1).unwrap().b[0] - 0.5).norm() < 1e-15);
        assert!(fractional_moment_vector(&s, 1.0 / 6.0).is_err());
        assert!(fractional_moment_vector(&s, 0.0).is_err());
    }

    #[test]
    fn population_moment_examples() {
        // Weight validation forbids identical components; compare the formula directly.
        let p = MixtureParams::new(0.5, cp(0.0, 1.0), cp(0.0, 2.0)).unwrap();
        let m = population_moments(&p, 0.1).unwrap();
        let want =
            (principal_pow(I, 0.1).unwrap() + principal_pow(c(0.0, 2.0), 0.1).unwrap()) / 2.0;
        assert!((m.b[0] - want).norm() < 1e-15);

        let q = MixtureParams::new(0.3, cp(1.0, 2.0), cp(-4.0, 0.5)).unwrap();
        let a = population_moments(&q, 0.12).unwrap();
        let b = population_moments(&q.swapped(), 0.12).unwrap();
        for j in 0..3 {
            assert!((a.b[j] - b.b[j]).norm() < 1e-15);
        }
    }

    #[test]
    fn solve_exact_moments() {
        let p = MixtureParams::new(0.5, cp(0.0, 1.0), cp(20.0, 2.0)).unwrap();
        let est = solve_mixture(&population_moments(&p, 0.1).unwrap()).unwrap();
        let (a1, a2) = p.roots(0.1);
        assert!(hausdorff_pair_distance((est.a1, est.a2), (a1, a2)) < 1e-10);
        assert!((est.t_hat - 0.5).abs() < 1e-10);
        assert_eq!(est.branch, RootBranch::Direct);

        let p = MixtureParams::new(0.25, cp(0.0, 1.0), cp(5.0, 6.0)).unwrap();
        let est = solve_mixture(&population_moments(&p, 0.1).unwrap()).unwrap();
        let (g1, g2) = (p.gamma1().to_complex(), p.gamma2().to_complex());
        let ok = ((est.t_hat - 0.25).abs() < 1e-9 && (est.gamma2_hat - g2).norm() < 1e-8)
            || ((est.t_hat - 0.75).abs() < 1e-9 && (est.gamma2_hat - g1).norm() < 1e-8);
        assert!(ok, "{est:?}");
        let canon = est.canonical();
        assert!((canon.t_hat - 0.25).abs() < 1e-9);
        assert!((canon.gamma2_hat - g2).norm() < 1e-8);
    }

    #[test]
    fn vieta_consistency() {
        let p = MixtureParams::new(0.2, cp(-3.0, 1.5), cp(4.0, 0.7)).unwrap();
        let m = population_moments(&p, 0.15).unwrap();
        let est = solve_mixture(&m).unwrap();
        let [b1, b2, b3] = m.b;
        let d = b2 - b1 * b1;
        let s = (b3 - b1 * b2) / d;
        let q = (b1 * b3 - b2 * b2) / d;
        assert!((est.a1 + est.a2 - s).norm() < 1e-12 * s.norm());
        assert!((est.a1 * est.a2 - q).norm() < 1e-12 * q.norm());
    }

    #[test]
    fn degenerate_moments() {
        let s = Sample::new(vec![3.0; 10]).unwrap();
        assert!(matches!(
            estimate_mixture(&s, 0.1),
            Err(Error::Degenerate(_))
        ));
        let s = Sample::new(vec![3.0, 1.0]).unwrap();
        assert!(matches!(
            estimate_mixture(&s, 0.1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let z = c(0.0, 0.0);
        let (a, b) = (c(1.0, 2.0), c(-3.0, 0.5));
        assert_eq!(hausdorff_pair_distance((a, b), (a, b)), 0.0);
        assert_eq!(
            hausdorff_pair_distance((z, z), (c(3.0, 0.0), c(4.0, 0.0))),
            3.0
        );
        assert_eq!(hausdorff_pair_distance((z, c(10.0, 0.0)), (z, z)), 10.0);
        assert_eq!(hausdorff_pair_distance((z, z), (z, c(10.0, 0.0))), 0.0);
    }

    #[test]
    fn component_fraction() {
        let t = 1.0 / 6.0;
        let p = MixtureParams::new(t, cp(0.0, 1.0), cp(20.0, 2.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 100_000;
        let hits = (0..n).filter(|_| p.draw_labelled(&mut rng).0 == 2).count();
        let frac = hits as f64 / n as f64;
        assert!((frac - t).abs() < 3.0 * (t * (1.0 - t) / n as f64).sqrt());
        assert!(sample_mixture(&p, 0, &mut rng).is_err());
    }
}
