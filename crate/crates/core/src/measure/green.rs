use crate::geometry::{PlanarDomain, Point};
use crate::holofunc::ExponentialSum;
use crate::quad::integrate_adaptive;
use num_complex::Complex64;

/// A real field with gradient, the gradient stored as `(d/dx, d/dy)` in a complex number.
pub trait ScalarField: Sync {
    fn value(&self, z: Point) -> f64;
    fn gradient(&self, z: Point) -> Complex64;
}

impl<F: Fn(Point) -> (f64, Complex64) + Sync> ScalarField for F {
    fn value(&self, z: Point) -> f64 {
        self(z).0
    }
    fn gradient(&self, z: Point) -> Complex64 {
        self(z).1
    }
}

/// `Phi = h ln sum exp(psi_j / h)`.
pub struct PhiField<'a> {
    pub sum: &'a ExponentialSum,
    pub h: f64,
}

impl ScalarField for PhiField<'_> {
    fn value(&self, z: Point) -> f64 {
        self.sum.phi(z, self.h)
    }
    fn gradient(&self, z: Point) -> Complex64 {
        let theta = self.sum.theta(z, self.h);
        // grad Re phi = conj(phi')
        theta
            .iter()
            .zip(&self.sum.phases)
            .map(|(t, p)| p.eval_with_derivative(z).1.conj() * t)
            .sum()
    }
}

/// `Psi = max_j psi_j`, with the gradient of a leading phase.
pub struct PsiField<'a> {
    pub sum: &'a ExponentialSum,
}

impl ScalarField for PsiField<'_> {
    fn value(&self, z: Point) -> f64 {
        self.sum.psi_max(z).0
    }
    fn gradient(&self, z: Point) -> Complex64 {
        let j = self.sum.psi_max(z).1[0];
        self.sum.phases[j].eval_with_derivative(z).1.conj()
    }
}

/// Outward flux `sum over edges of the integral of d phi / dn`, which equals
/// `int Delta phi` over the region for smooth `phi`.
pub fn mass_via_green_formula(phi: &dyn ScalarField, region: &PlanarDomain) -> f64 {
    (0..region.len())
        .map(|k| {
            let (a, b) = region.segment(k);
            let len = (b - a).norm();
            let n = region.outward_normal(k);
            let f = |t: f64| {
                let g = phi.gradient(a + (b - a) * t);
                g.re * n.re + g.im * n.im
            };
            integrate_adaptive(f, 0.0, 1.0, 1e-14, 1e-11, 40).0 * len
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quadratic_flux_over_disk() {
        let n = 16384;
        let disk = PlanarDomain::disk(Point::new(0.0, 0.0), 1.0, n).unwrap();
        let phi = |z: Point| (z.norm_sqr(), z * 2.0);
        let v = mass_via_green_formula(&phi, &disk);
        assert!((v - 4.0 * PI).abs() < 1e-6, "{}", v - 4.0 * PI);
    }

    #[test]
    fn harmonic_flux_vanishes() {
        let poly = PlanarDomain::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.5),
            Point::new(2.0, 2.0),
            Point::new(0.5, 1.5),
        ])
        .unwrap();
        let phi = |z: Point| (z.re, Complex64::new(1.0, 0.0));
        assert!(mass_via_green_formula(&phi, &poly).abs() < 1e-8);
        // Re z^4 is harmonic too
        let phi4 = |z: Point| ((z * z * z * z).re, (z * z * z * 4.0).conj());
        assert!(mass_via_green_formula(&phi4, &poly).abs() < 1e-8);
    }

    #[test]
    fn psi_flux_is_tie_line_mass() {
        let s = ExponentialSum::cosh_family();
        let sq = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!((mass_via_green_formula(&PsiField { sum: &s }, &sq) - 4.0).abs() < 1e-12);
        let h = 0.1;
        let phi = mass_via_green_formula(&PhiField { sum: &s, h }, &sq);
        assert!((phi - 4.0 * (1.0 / h).tanh()).abs() < 1e-10);
    }
}
