use super::{check_h, normalize_phase, ComplexLog, HolomorphicModel, Polynomial};
use crate::error::{Error, Result};
use crate::geometry::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// `u(z; h) = sum_j exp(phi_j(z) / h)` with polynomial phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSum {
    pub phases: Vec<Polynomial>,
    /// Relative tolerance for argmax ties in `psi`.
    #[serde(default = "default_tie_tol")]
    pub tie_tol: f64,
}

fn default_tie_tol() -> f64 {
    1e-12
}

/// `Delta Phi` at a point together with the dominance gap `Psi - second max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianPhi {
    pub value: f64,
    pub gap: f64,
}

struct Terms {
    /// `phi_j(z) / h` and `phi_j'(z)`.
    a: Vec<(Complex64, Complex64)>,
    shift: f64,
}

impl ExponentialSum {
    pub fn new(phases: Vec<Polynomial>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Parameter("an exponential sum needs at least one phase".into()));
        }
        for p in &phases {
            Polynomial::new(p.coeffs.clone())?;
        }
        Ok(ExponentialSum { phases, tie_tol: default_tie_tol() })
    }

    /// `exp(z/h) + exp(-z/h)`.
    pub fn cosh_family() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(vec![Polynomial::linear(one, zero), Polynomial::linear(-one, zero)]).unwrap()
    }

    /// `sin z` written as `exp(iz - ln 2 - i pi/2) + exp(-iz - ln 2 + i pi/2)`; evaluate with `h = 1`.
    pub fn sine() -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self::new(vec![
            Polynomial::linear(i, Complex64::new(-LN_2, -PI / 2.0)),
            Polynomial::linear(-i, Complex64::new(-LN_2, PI / 2.0)),
        ])
        .unwrap()
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    fn terms(&self, z: Point, h: f64) -> Terms {
        let a: Vec<(Complex64, Complex64)> = self
            .phases
            .iter()
            .map(|p| {
                let (v, d) = p.eval_with_derivative(z);
                (v / h, d)
            })
            .collect();
        let shift = a.iter().map(|t| t.0.re).fold(f64::NEG_INFINITY, f64::max);
        Terms { a, shift }
    }

    /// Real parts `psi_j(z) = Re phi_j(z)`.
    pub fn psi(&self, z: Point) -> Vec<f64> {
        self.phases.iter().map(|p| p.eval(z).re).collect()
    }

    /// `u(z)` in log form. A zero is flagged when the reduced sum cancels to
    /// rounding level or underflows below `1e-300`.
    pub fn eval(&self, z: Point, h: f64) -> Result<ComplexLog> {
        check_h(h)?;
        let t = self.terms(z, h);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let mut max_arg = 0.0f64;
        for &(a, _) in &t.a {
            let e = (a - t.shift).exp();
            sum += e;
            abs_sum += e.norm();
            max_arg = max_arg.max(a.norm());
        }
        let s = sum.norm();
        if s < 1e-300 || s <= 8.0 * f64::EPSILON * abs_sum * (1.0 + max_arg) {
            return Ok(ComplexLog { ln_abs: t.shift + s.ln(), phase: normalize_phase(sum.arg()), zero: true });
        }
        Ok(ComplexLog { ln_abs: t.shift + s.ln(), phase: normalize_phase(sum.arg()), zero: false })
    }

    /// `Phi = h ln sum_j exp(psi_j / h)`.
    pub fn phi(&self, z: Point, h: f64) -> f64 {
        let psi = self.psi(z);
        let m = psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + h * psi.iter().map(|p| ((p - m) / h).exp()).sum::<f64>().ln()
    }

    /// `Psi = max_j psi_j` and the indices attaining it within the tie tolerance.
    pub fn psi_max(&self, z: Point) -> (f64, Vec<usize>) {
        let psi = self.psi(z);
        let m = psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = self.tie_tol * m.abs().max(1.0);
        let set = (0..psi.len()).filter(|&j| m - psi[j] <= tol).collect();
        (m, set)
    }

    /// Softmax weights `theta_j = exp(psi_j/h) / sum_k exp(psi_k/h)`.
    pub fn theta(&self, z: Point, h: f64) -> Vec<f64> {
        softmax(&self.psi(z), h)
    }

    /// `Delta Phi = (1/h) (sum theta_j |phi_j'|^2 - |sum theta_j phi_j'|^2)`,
    /// evaluated as the weighted variance of the `phi_j'` so that it is never negative.
    pub fn laplacian_phi(&self, z: Point, h: f64) -> LaplacianPhi {
        let psi = self.psi(z);
        let theta = softmax(&psi, h);
        let d: Vec<Complex64> = self.phases.iter().map(|p| p.eval_with_derivative(z).1).collect();
        let mean: Complex64 = theta.iter().zip(&d).map(|(t, d)| d * t).sum();
        let var: f64 = theta.iter().zip(&d).map(|(t, d)| t * (d - mean).norm_sqr()).sum();
        LaplacianPhi { value: var / h, gap: dominance_gap(&psi) }
    }

    /// `u'/u = sum_j theta^_j phi_j' / h` with complex softmax weights.
    pub fn log_derivative(&self, z: Point, h: f64) -> Result<Complex64> {
        let v = self.eval(z, h)?;
        if v.zero {
            return Err(Error::Pole { at: z });
        }
        let t = self.terms(z, h);
        // shift by the full leading exponent so a dominant term enters with weight exactly 1
        let lead = t.a.iter().map(|x| x.0).find(|a| a.re == t.shift).unwrap_or_default();
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for &(a, d) in &t.a {
            let e = (a - lead).exp();
            num += e * d;
            den += e;
        }
        Ok(num / den / h)
    }
}

fn softmax(psi: &[f64], h: f64) -> Vec<f64> {
    let m = psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = psi.iter().map(|p| ((p - m) / h).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

/// `Psi - (second largest psi_j)`, infinite for a single phase.
pub(crate) fn dominance_gap(psi: &[f64]) -> f64 {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &p in psi {
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
    }
    first - second
}

impl HolomorphicModel for ExponentialSum {
    fn value(&self, z: Point, h: f64) -> Result<ComplexLog> {
        self.eval(z, h)
    }

    fn log_derivative(&self, z: Point, h: f64) -> Result<Complex64> {
        ExponentialSum::log_derivative(self, z, h)
    }
}
