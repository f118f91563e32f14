use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Function of the angle sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub start: f64,
    pub end: f64,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(start: f64, end: f64, values: Vec<f64>) -> Result<Self> {
        if !(end > start) || values.len() < 5 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("sampled function needs end > start and at least 5 finite samples".into()));
        }
        Ok(SampledFunction { start, end, values })
    }

    pub fn from_fn(start: f64, end: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let step = (end - start) / (n.max(2) - 1) as f64;
        Self::new(start, end, (0..n).map(|i| f(start + step * i as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + self.step() * i as f64
    }

    /// First of four consecutive node indices around `x`, all on one side of `x` when `side` is given
    /// (`-1` left, `+1` right, `0` centered).
    fn stencil(&self, x: f64, side: i32) -> usize {
        let u = (x - self.start) / self.step();
        let i0 = match side {
            -1 => (u + 1e-9).floor() as i64 - 3,
            1 => (u - 1e-9).ceil() as i64,
            _ => u.floor() as i64 - 1,
        };
        i0.clamp(0, self.len() as i64 - 4) as usize
    }

    fn cubic(&self, i0: usize, x: f64) -> (f64, f64) {
        let xs: Vec<f64> = (i0..i0 + 4).map(|i| self.node(i)).collect();
        lagrange(&xs, &self.values[i0..i0 + 4], x)
    }

    /// Cubic interpolation through the nearest four nodes.
    pub fn value_at(&self, x: f64) -> f64 {
        self.cubic(self.stencil(x, 0), x).0
    }

    /// Derivative from the left (`side < 0`) or right (`side > 0`) using nodes on that side only.
    pub fn derivative_at(&self, x: f64, side: i32) -> f64 {
        self.cubic(self.stencil(x, side.signum()), x).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkOptions {
    /// Slope jumps above `threshold_factor * step * max|g''|` are kinks.
    pub threshold_factor: f64,
    /// Absolute floor on the kink threshold.
    pub floor: f64,
    /// Allowed negativity of the density and of atom masses.
    pub negativity_tol: f64,
}

impl Default for KinkOptions {
    fn default() -> Self {
        KinkOptions { threshold_factor: 10.0, floor: 1e-9, negativity_tol: 1e-6 }
    }
}

/// `nu = g'' + rho^2 g` on an angular window: nodal density values plus atoms at kinks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularMeasure {
    pub window: (f64, f64),
    pub omega: Vec<f64>,
    pub ac: Vec<f64>,
    pub atoms: Vec<(f64, f64)>,
}

impl AngularMeasure {
    /// `nu([a, b])`: trapezoid on the density, atoms in the closed interval.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(self.window.0), b.min(self.window.1));
        if b < a {
            return 0.0;
        }
        let interp = |x: f64| {
            let i = self.omega.partition_point(|&w| w <= x).clamp(1, self.omega.len() - 1);
            let (w0, w1) = (self.omega[i - 1], self.omega[i]);
            let f = (x - w0) / (w1 - w0);
            self.ac[i - 1] * (1.0 - f) + self.ac[i] * f
        };
        let mut xs = vec![a];
        xs.extend(self.omega.iter().copied().filter(|&w| w > a && w < b));
        xs.push(b);
        let ac: f64 = xs.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (interp(w[0]) + interp(w[1]))).sum();
        let atoms: f64 = self.atoms.iter().filter(|(w, _)| *w >= a - 1e-12 && *w <= b + 1e-12).map(|(_, m)| m).sum();
        ac + atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.mass(self.window.0, self.window.1)
    }
}

/// Value and derivative at `x` of the interpolating polynomial through `(xs, ys)`.
fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for i in 0..xs.len() {
        let mut li = 1.0;
        let mut dli = 0.0;
        for j in 0..xs.len() {
            if j == i {
                continue;
            }
            let den = xs[i] - xs[j];
            dli = dli * (x - xs[j]) / den + li / den;
            li *= (x - xs[j]) / den;
        }
        v += ys[i] * li;
        d += ys[i] * dli;
    }
    (v, d)
}

/// `nu = g'' + rho^2 g` from samples of `g`: centered second differences on smooth stretches,
/// atoms of mass `g'(w+) - g'(w-)` at detected kinks.
pub fn homogeneous_measure(g: &SampledFunction, rho: f64, opts: &KinkOptions) -> Result<AngularMeasure> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Parameter(format!("rho = {rho} must be positive")));
    }
    let n = g.len();
    let h = g.step();
    let v = &g.values;
    // slope jumps at interior nodes
    let mut s = vec![0.0; n];
    for i in 1..n - 1 {
        s[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h;
    }
    let mut curv: f64 = 0.0;
    for i in 2..n - 2 {
        curv = curv.max(s[i - 1].abs().min(s[i + 1].abs()) / h);
    }
    let threshold = opts.threshold_factor * h * curv + opts.floor;
    let flagged: Vec<bool> = (0..n).map(|i| i > 0 && i < n - 1 && s[i].abs() > threshold).collect();

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if flagged[i] {
            let j0 = i;
            while i + 1 < n - 1 && flagged[i + 1] {
                i += 1;
            }
            clusters.push((j0, i));
        }
        i += 1;
    }

    let mut ac: Vec<f64> = (0..n).map(|i| s[i] / h + rho * rho * v[i]).collect();
    let mut atoms = Vec::new();
    for &(i0, i1) in &clusters {
        if i0 < 3 || i1 + 3 >= n {
            return Err(Error::Parameter(format!("kink at {} too close to the window edge", g.node(i0))));
        }
        // one-sided cubics through four clean nodes on each side
        let lx: Vec<f64> = (i0 - 3..=i0).map(|k| g.node(k)).collect();
        let rx: Vec<f64> = (i1..=i1 + 3).map(|k| g.node(k)).collect();
        let left = |x: f64| lagrange(&lx, &v[i0 - 3..=i0], x);
        let right = |x: f64| lagrange(&rx, &v[i1..=i1 + 3], x);
        let diff = |x: f64| left(x).0 - right(x).0;
        let (mut lo, mut hi) = (g.node(i0 - 1), g.node(i1 + 1));
        let w = if diff(lo) * diff(hi) < 0.0 {
            for _ in 0..100 {
                let m = 0.5 * (lo + hi);
                if diff(lo) * diff(m) <= 0.0 {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            0.5 * (lo + hi)
        } else {
            0.5 * (g.node(i0) + g.node(i1))
        };
        let mass = right(w).1 - left(w).1;
        if mass < -opts.negativity_tol {
            return Err(Error::NotSubharmonic(format!("negative angular atom {mass} at {w}")));
        }
        atoms.push((w, mass));
        let (a0, a1) = (ac[i0 - 1], ac[i1 + 1]);
        for k in i0..=i1 {
            let f = (k + 1 - i0) as f64 / (i1 + 2 - i0) as f64;
            ac[k] = a0 * (1.0 - f) + a1 * f;
        }
    }
    ac[0] = ac[1] + (ac[1] - ac[2]);
    ac[n - 1] = ac[n - 2] + (ac[n - 2] - ac[n - 3]);
    let scale = 1.0 + curv + rho * rho * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(k) = (0..n).find(|&k| ac[k] < -opts.negativity_tol * scale) {
        return Err(Error::NotSubharmonic(format!("angular density {} at {}", ac[k], g.node(k))));
    }
    Ok(AngularMeasure { window: (g.start, g.end), omega: (0..n).map(|k| g.node(k)).collect(), ac, atoms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorMass {
    /// `int Delta phi` over the truncated sector `1 < |z| < R`, `theta < arg z < vartheta`.
    pub mass: f64,
    /// An atom of `nu` sitting on a sector edge, as `(angle, mass)`.
    pub boundary_charge: Option<(f64, f64)>,
}

/// `int g` over `[a, b]`: corrected trapezoid on whole cells, Gauss on partial cells.
fn integrate_sampled(g: &SampledFunction, a: f64, b: f64, interior_atoms: f64) -> f64 {
    let h = g.step();
    let k0 = ((a - g.start) / h - 1e-9).ceil() as usize;
    let k1 = ((b - g.start) / h + 1e-9).floor() as usize;
    let gauss3 = |x0: f64, x1: f64| {
        if x1 <= x0 {
            return 0.0;
        }
        let (m, r) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        let q = (0.6f64).sqrt();
        r * (5.0 * g.value_at(m - q * r) + 8.0 * g.value_at(m) + 5.0 * g.value_at(m + q * r)) / 9.0
    };
    if k1 <= k0 {
        return gauss3(a, b);
    }
    let (xa, xb) = (g.node(k0), g.node(k1));
    let mut trap = 0.5 * (g.values[k0] + g.values[k1]) + g.values[k0 + 1..k1].iter().sum::<f64>();
    trap *= h;
    // Euler-Maclaurin end correction, with slope jumps at kinks removed
    let corr = h * h / 12.0 * (g.derivative_at(xb, -1) - g.derivative_at(xa, 1) - interior_atoms);
    gauss3(a, xa) + trap - corr + gauss3(xb, b)
}

/// Riesz mass of `phi = |z|^rho g(arg z)` over the truncated sector
/// `(R^rho - 1)(rho int g + (g'(vartheta) - g'(theta)) / rho)`.
pub fn sector_weyl_mass(nu: &AngularMeasure, g: &SampledFunction, rho: f64, theta: f64, vartheta: f64, r: f64) -> Result<SectorMass> {
    if !(r > 1.0) {
        return Err(Error::Parameter(format!("outer radius {r} must exceed 1")));
    }
    if !(rho > 0.0) {
        return Err(Error::Parameter(format!("rho = {rho} must be positive")));
    }
    if !(theta < vartheta && theta >= g.start && vartheta <= g.end) {
        return Err(Error::Parameter(format!("sector [{theta}, {vartheta}] not inside the sampled window")));
    }
    let tol = 1e-6;
    let boundary_charge = nu.atoms.iter().find(|(w, m)| *m > tol && ((w - theta).abs() <= tol || (w - vartheta).abs() <= tol)).copied();
    let interior: f64 = nu.atoms.iter().filter(|(w, _)| *w > theta + tol && *w < vartheta - tol).map(|(_, m)| m).sum();
    let int_g = integrate_sampled(g, theta, vartheta, interior);
    let dg = g.derivative_at(vartheta, -1) - g.derivative_at(theta, 1);
    let mass = (r.powf(rho) - 1.0) * (rho * int_g + dg / rho);
    Ok(SectorMass { mass, boundary_charge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn abs_sin() -> SampledFunction {
        SampledFunction::from_fn(-FRAC_PI_2, FRAC_PI_2, 2001, |w| w.sin().abs()).unwrap()
    }

    #[test]
    fn abs_sin_has_one_atom() {
        let nu = homogeneous_measure(&abs_sin(), 1.0, &KinkOptions::default()).unwrap();
        assert_eq!(nu.atoms.len(), 1);
        let (w, m) = nu.atoms[0];
        assert!(w.abs() < 1e-9 && (m - 2.0).abs() < 1e-6, "{w} {m}");
        assert!(nu.ac.iter().all(|a| a.abs() < 1e-6));
    }

    #[test]
    fn off_grid_kink_is_located() {
        let g = SampledFunction::from_fn(-1.0, 1.0, 1000, |w| (w - 0.1234).abs() + w * w).unwrap();
        let nu = homogeneous_measure(&g, 1.0, &KinkOptions::default()).unwrap();
        assert_eq!(nu.atoms.len(), 1);
        assert!((nu.atoms[0].0 - 0.1234).abs() < 1e-8);
        assert!((nu.atoms[0].1 - 2.0).abs() < 1e-8);
    }

    #[test]
    fn constant_and_harmonic_profiles() {
        let one = SampledFunction::from_fn(-1.0, 1.0, 201, |_| 1.0).unwrap();
        let nu = homogeneous_measure(&one, 2.0, &KinkOptions::default()).unwrap();
        assert!(nu.atoms.is_empty() && nu.ac.iter().all(|a| (a - 4.0).abs() < 1e-9));
        let cos = SampledFunction::from_fn(-1.0, 1.0, 2001, f64::cos).unwrap();
        let nu = homogeneous_measure(&cos, 1.0, &KinkOptions::default()).unwrap();
        assert!(nu.atoms.is_empty() && nu.total_mass().abs() < 1e-6);
    }

    #[test]
    fn concave_kink_is_rejected() {
        let g = SampledFunction::from_fn(-1.0, 1.0, 201, |w| -w.abs()).unwrap();
        assert!(matches!(homogeneous_measure(&g, 1.0, &KinkOptions::default()), Err(Error::NotSubharmonic(_))));
    }

    #[test]
    fn sine_sector_mass() {
        let g = abs_sin();
        let nu = homogeneous_measure(&g, 1.0, &KinkOptions::default()).unwrap();
        for r in [10.0, 80.0] {
            let m = sector_weyl_mass(&nu, &g, 1.0, -FRAC_PI_4, FRAC_PI_4, r).unwrap();
            assert!((m.mass - 2.0 * (r - 1.0)).abs() < 1e-6 * r, "{}", m.mass);
            assert!(m.boundary_charge.is_none());
        }
        let empty = sector_weyl_mass(&nu, &g, 1.0, FRAC_PI_6, FRAC_PI_3, 80.0).unwrap();
        assert!(empty.mass.abs() < 1e-6, "{}", empty.mass);
        let touching = sector_weyl_mass(&nu, &g, 1.0, 0.0, FRAC_PI_4, 10.0).unwrap();
        assert!(touching.boundary_charge.is_some());
    }

    #[test]
    fn quadratic_profile_full_disk() {
        let g = SampledFunction::from_fn(-4.0, 4.0, 801, |_| 1.0).unwrap();
        let nu = homogeneous_measure(&g, 2.0, &KinkOptions::default()).unwrap();
        let m = sector_weyl_mass(&nu, &g, 2.0, -std::f64::consts::PI, std::f64::consts::PI, 3.0).unwrap();
        // Delta |z|^2 = 4 over the annulus 1 < |z| < 3
        assert!((m.mass - 4.0 * std::f64::consts::PI * 8.0).abs() < 1e-9);
    }

    #[test]
    fn total_mass_integration_by_parts() {
        let g = SampledFunction::from_fn(-1.0, 1.0, 4001, |w| (2.0 * w).cosh()).unwrap();
        let rho = 1.5;
        let nu = homogeneous_measure(&g, rho, &KinkOptions::default()).unwrap();
        let exact = (4.0 + rho * rho) * 2f64.sinh();
        assert!((nu.total_mass() - exact).abs() < 1e-5, "{} {exact}", nu.total_mass());
    }
}
