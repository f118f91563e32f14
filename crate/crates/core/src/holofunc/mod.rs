//! Holomorphic families `u(z; h)` evaluated in log form, and the subharmonic
//! weights built from exponential sums.

mod expsum;
mod stokes;

pub use expsum::{ExponentialSum, LaplacianPhi};
pub use stokes::{stokes_curves, stokes_curves_with, StokesCurve, StokesOptions};

use crate::error::{Error, Result};
use crate::geometry::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Polynomial with complex coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Parameter("non-finite polynomial coefficient".into()));
        }
        Ok(Polynomial { coeffs })
    }

    /// `a z + b`.
    pub fn linear(a: Complex64, b: Complex64) -> Self {
        Polynomial { coeffs: vec![b, a] }
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Point]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            c = next;
        }
        Polynomial { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)).unwrap_or(0)
    }

    pub fn eval(&self, z: Point) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by Horner.
    pub fn eval_with_derivative(&self, z: Point) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Sum of `|c_k| |z|^k`, the scale against which cancellation is judged.
    pub fn abs_bound(&self, z: Point) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }
}

/// A complex number stored as `ln|u|` and `arg u`, with exact zeros flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexLog {
    pub ln_abs: f64,
    /// In (-pi, pi].
    pub phase: f64,
    pub zero: bool,
}

impl ComplexLog {
    pub fn zero() -> Self {
        ComplexLog { ln_abs: f64::NEG_INFINITY, phase: 0.0, zero: true }
    }

    pub fn from_complex(c: Complex64) -> Self {
        if c.norm() == 0.0 {
            return Self::zero();
        }
        ComplexLog { ln_abs: c.norm().ln(), phase: normalize_phase(c.arg()), zero: false }
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.zero {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.ln_abs.exp(), self.phase)
    }
}

pub(crate) fn normalize_phase(a: f64) -> f64 {
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

pub(crate) fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("h = {h} must be positive")))
    }
}

/// A holomorphic function `u(z; h)`.
pub trait HolomorphicModel: Sync {
    fn value(&self, z: Point, h: f64) -> Result<ComplexLog>;

    /// `u'(z) / u(z)`; a pole error at flagged zeros.
    fn log_derivative(&self, z: Point, h: f64) -> Result<Complex64>;

    /// `h ln|u(z)|`, `-inf` at flagged zeros.
    fn log_abs(&self, z: Point, h: f64) -> Result<f64> {
        let v = self.value(z, h)?;
        Ok(if v.zero { f64::NEG_INFINITY } else { h * v.ln_abs })
    }
}

/// Polynomial `u(z; h) = p(z)`, independent of `h`.
#[derive(Debug, Clone)]
pub struct PolynomialModel {
    pub poly: Polynomial,
}

impl PolynomialModel {
    pub fn new(poly: Polynomial) -> Self {
        PolynomialModel { poly }
    }

    fn is_cancelled(&self, p: Complex64, z: Point) -> bool {
        let n = self.poly.coeffs.len() as f64;
        p.norm() <= 4.0 * n * f64::EPSILON * self.poly.abs_bound(z)
    }
}

impl HolomorphicModel for PolynomialModel {
    fn value(&self, z: Point, h: f64) -> Result<ComplexLog> {
        check_h(h)?;
        let p = self.poly.eval(z);
        if self.is_cancelled(p, z) {
            return Ok(ComplexLog { zero: true, ..ComplexLog::from_complex(p) });
        }
        Ok(ComplexLog::from_complex(p))
    }

    fn log_derivative(&self, z: Point, h: f64) -> Result<Complex64> {
        check_h(h)?;
        let (p, dp) = self.poly.eval_with_derivative(z);
        if self.is_cancelled(p, z) {
            return Err(Error::Pole { at: z });
        }
        Ok(dp / p)
    }
}

type ValueAndDerivative = dyn Fn(Point, f64) -> (Complex64, Complex64) + Send + Sync;

/// User-supplied holomorphic function returning `(u, u')`.
#[derive(Clone)]
pub struct FnModel {
    f: Arc<ValueAndDerivative>,
}

impl FnModel {
    pub fn new<F: Fn(Point, f64) -> (Complex64, Complex64) + Send + Sync + 'static>(f: F) -> Self {
        FnModel { f: Arc::new(f) }
    }
}

impl std::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FnModel")
    }
}

impl HolomorphicModel for FnModel {
    fn value(&self, z: Point, h: f64) -> Result<ComplexLog> {
        check_h(h)?;
        Ok(ComplexLog::from_complex((self.f)(z, h).0))
    }

    fn log_derivative(&self, z: Point, h: f64) -> Result<Complex64> {
        check_h(h)?;
        let (u, du) = (self.f)(z, h);
        if u.norm() == 0.0 {
            return Err(Error::Pole { at: z });
        }
        Ok(du / u)
    }
}

impl<T: HolomorphicModel + ?Sized> HolomorphicModel for &T {
    fn value(&self, z: Point, h: f64) -> Result<ComplexLog> {
        (**self).value(z, h)
    }
    fn log_derivative(&self, z: Point, h: f64) -> Result<Complex64> {
        (**self).log_derivative(z, h)
    }
}

impl<T: HolomorphicModel + ?Sized + Send> HolomorphicModel for Box<T> {
    fn value(&self, z: Point, h: f64) -> Result<ComplexLog> {
        (**self).value(z, h)
    }
    fn log_derivative(&self, z: Point, h: f64) -> Result<Complex64> {
        (**self).log_derivative(z, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_roots_and_derivative() {
        let p = Polynomial::from_roots(&[Point::new(1.0, 0.0), Point::new(0.0, 2.0)]);
        assert_eq!(p.degree(), 2);
        assert!(p.eval(Point::new(0.0, 2.0)).norm() < 1e-15);
        let z = Point::new(0.3, -0.4);
        let (_, dp) = p.eval_with_derivative(z);
        // d/dz (z - 1)(z - 2i) = 2z - 1 - 2i
        assert!((dp - (2.0 * z - Point::new(1.0, 2.0))).norm() < 1e-15);
    }

    #[test]
    fn polynomial_model_flags_exact_root() {
        let m = PolynomialModel::new(Polynomial::from_roots(&[Point::new(0.5, 0.0)]));
        assert!(m.value(Point::new(0.5, 0.0), 1.0).unwrap().zero);
        assert!(matches!(m.log_derivative(Point::new(0.5, 0.0), 1.0), Err(Error::Pole { .. })));
        let ld = m.log_derivative(Point::new(1.5, 0.0), 1.0).unwrap();
        assert!((ld - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_log_round_trip() {
        let c = Complex64::new(-3.0, -0.0);
        let l = ComplexLog::from_complex(c);
        assert!(l.phase > 0.0);
        assert!((l.to_complex() - c).norm() < 1e-15);
    }
}
