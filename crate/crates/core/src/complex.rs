//! Principal-branch complex arithmetic and the shifted power generators
//! `f(x) = (x + alpha)^p` (with `log(x + alpha)` at `p = 0`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Argument of `z` in `(-pi, pi]`. Negative reals (including `-0.0` imaginary
/// part) map to `+pi`.
pub fn principal_arg(z: Complex) -> f64 {
    if z.im == 0.0 && z.re < 0.0 {
        PI
    } else {
        z.im.atan2(z.re)
    }
}

/// Principal logarithm `log|z| + i arg z`.
pub fn principal_log(z: Complex) -> Result<Complex> {
    if z == Complex::new(0.0, 0.0) {
        return Err(Error::Domain("logarithm of zero".into()));
    }
    Ok(Complex::new(z.norm().ln(), principal_arg(z)))
}

/// Principal power `exp(p log z)`, with `0^p = 0` for `0 < p <= 1`.
pub fn principal_pow(z: Complex, p: f64) -> Result<Complex> {
    if z == Complex::new(0.0, 0.0) {
        return if p > 0.0 && p <= 1.0 {
            Ok(Complex::new(0.0, 0.0))
        } else {
            Err(Error::Domain(format!("0 raised to the power {p}")))
        };
    }
    Ok(pow_nonzero(z, p))
}

#[inline]
fn pow_nonzero(z: Complex, p: f64) -> Complex {
    if p == 1.0 {
        return z;
    }
    Complex::from_polar(z.norm().powf(p), p * principal_arg(z))
}

/// Whether the generator is a power or the logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Power,
    Log,
}

/// The generator `f(x) = (x + alpha)^p` for `p` in `[-1, 1]`, `Im(alpha) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorRepr", into = "GeneratorRepr")]
pub struct Generator {
    p: f64,
    alpha: Complex,
}

#[derive(Serialize, Deserialize)]
struct GeneratorRepr {
    p: f64,
    #[serde(with = "crate::complex::re_im")]
    alpha: Complex,
}

impl TryFrom<GeneratorRepr> for Generator {
    type Error = Error;
    fn try_from(r: GeneratorRepr) -> Result<Self> {
        Generator::new(r.p, r.alpha)
    }
}

impl From<Generator> for GeneratorRepr {
    fn from(g: Generator) -> Self {
        GeneratorRepr {
            p: g.p,
            alpha: g.alpha,
        }
    }
}

impl Generator {
    pub fn new(p: f64, alpha: Complex) -> Result<Self> {
        if !p.is_finite() || !(-1.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("power p = {p} must lie in [-1, 1]")));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::invalid("shift alpha must be finite"));
        }
        if alpha.im < 0.0 {
            return Err(Error::invalid(format!(
                "shift alpha = {alpha} must lie in the closed upper half-plane"
            )));
        }
        Ok(Generator { p, alpha })
    }

    /// `log(x + alpha)`.
    pub fn log(alpha: Complex) -> Result<Self> {
        Self::new(0.0, alpha)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> Complex {
        self.alpha
    }

    pub fn kind(&self) -> GeneratorKind {
        if self.p == 0.0 {
            GeneratorKind::Log
        } else {
            GeneratorKind::Power
        }
    }

    pub fn has_real_shift(&self) -> bool {
        self.alpha.im == 0.0
    }

    /// Harmonic mean with a real shift: the mean of `n` Cauchy draws is again
    /// Cauchy, hence not integrable.
    pub fn is_nonintegrable_harmonic(&self) -> bool {
        self.p == -1.0 && self.has_real_shift()
    }

    /// `f(x)` for real `x`.
    pub fn eval(&self, x: f64) -> Result<Complex> {
        self.eval_complex(Complex::new(x, 0.0))
    }

    /// `f(z)` for `z` in the closed upper half-plane.
    pub fn eval_complex(&self, z: Complex) -> Result<Complex> {
        let y = z + self.alpha;
        match self.kind() {
            GeneratorKind::Log => principal_log(y),
            GeneratorKind::Power => principal_pow(y, self.p),
        }
    }

    /// `f^{-1}(w)`; image membership of `w` is not checked.
    pub fn inverse(&self, w: Complex) -> Result<Complex> {
        match self.kind() {
            GeneratorKind::Log => Ok(w.exp() - self.alpha),
            GeneratorKind::Power => {
                if w == Complex::new(0.0, 0.0) {
                    if self.p < 0.0 {
                        return Err(Error::Domain("inverse of a negative power at 0".into()));
                    }
                    return Ok(-self.alpha);
                }
                Ok(pow_nonzero(w, 1.0 / self.p) - self.alpha)
            }
        }
    }

    /// `f'(z) = p (z + alpha)^{p-1}`, or `1 / (z + alpha)` for the logarithm.
    pub fn derivative(&self, z: Complex) -> Result<Complex> {
        if self.p == 1.0 {
            return Ok(Complex::new(1.0, 0.0));
        }
        let y = z + self.alpha;
        if y == Complex::new(0.0, 0.0) {
            return Err(Error::Domain("derivative evaluated at the pole".into()));
        }
        Ok(match self.kind() {
            GeneratorKind::Log => y.inv(),
            GeneratorKind::Power => self.p * pow_nonzero(y, self.p - 1.0),
        })
    }
}

/// Serde adapter writing a complex number as `{"re": .., "im": ..}`.
pub mod re_im {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Complex;

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex, D::Error> {
        let ReIm { re, im } = ReIm::deserialize(d)?;
        Ok(Complex::new(re, im))
    }

    pub mod array {
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        use super::{Complex, ReIm};

        pub fn serialize<S: Serializer, const N: usize>(
            zs: &[Complex; N],
            s: S,
        ) -> Result<S::Ok, S::Error> {
            let v: Vec<ReIm> = zs.iter().map(|z| ReIm { re: z.re, im: z.im }).collect();
            v.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(
            d: D,
        ) -> Result<[Complex; N], D::Error> {
            let v = Vec::<ReIm>::deserialize(d)?;
            let len = v.len();
            let zs: Vec<Complex> = v.into_iter().map(|r| Complex::new(r.re, r.im)).collect();
            zs.try_into().map_err(|_| {
                serde::de::Error::invalid_length(len, &"a fixed number of complex values")
            })
        }
    }
}
