use super::{Density, RieszMeasure};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quad::{gauss_fixed, gl16, gl8, integrate_adaptive, integrate_graded};
use serde::Serialize;
use std::f64::consts::PI;

/// Angular integral of the density over the circle of radius `s`.
fn circle_integral(d: &Density, c: Point, s: f64) -> f64 {
    match d {
        Density::Zero => 0.0,
        Density::Constant { value } => 2.0 * PI * value,
        _ => integrate_adaptive(|a| d.eval(c + Point::from_polar(s, a)), 0.0, 2.0 * PI, 1e-15, 1e-10, 30).0,
    }
}

/// `int over [s0, s1] of w(s) s A(s) ds` with a GL8/GL16 comparison and bisection.
fn ring<W: Fn(f64) -> f64>(d: &Density, c: Point, w: &W, s0: f64, s1: f64, depth: u32) -> f64 {
    let f = |s: f64| w(s) * s * circle_integral(d, c, s);
    let fine = gauss_fixed(gl16(), s0, s1, f);
    if depth == 0 {
        return fine;
    }
    let coarse = gauss_fixed(gl8(), s0, s1, f);
    if (fine - coarse).abs() <= 1e-10 * fine.abs() + 1e-300 {
        return fine;
    }
    let m = 0.5 * (s0 + s1);
    ring(d, c, w, s0, m, depth - 1) + ring(d, c, w, m, s1, depth - 1)
}

/// `int over D(c, radius) of w(|x - c|) density(x) dx` using geometric rings
/// of ratio 1/2 toward the center, split at the given breakpoints.
fn ac_radial<W: Fn(f64) -> f64>(d: &Density, c: Point, radius: f64, w: &W, floor: f64, breaks: &[f64]) -> f64 {
    if d.is_zero() {
        return 0.0;
    }
    let mut edges = vec![radius];
    let mut s = radius;
    while s * 0.5 > floor {
        s *= 0.5;
        edges.push(s);
    }
    edges.push(0.0);
    edges.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < radius));
    edges.sort_by(|a, b| b.total_cmp(a));
    edges.dedup();
    edges.windows(2).map(|e| ring(d, c, w, e[1], e[0], 8)).sum()
}

/// Parameters where `a + t (b - a)` meets the circle `|x - c| = r`, within [0, 1].
fn circle_hits(a: Point, b: Point, c: Point, r: f64) -> Vec<f64> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sqr();
    let qb = 2.0 * (f.re * d.re + f.im * d.im);
    let qc = f.norm_sqr() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 || disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)].into_iter().filter(|t| (0.0..=1.0).contains(t)).collect()
}

/// Line part contribution `int w(|x - c|) dmu_line` over the disk.
fn lines_radial<W: Fn(f64) -> f64>(m: &RieszMeasure, c: Point, radius: f64, w: &W, floor: f64, breaks: &[f64]) -> f64 {
    let mut total = 0.0;
    for l in &m.lines {
        for k in 0..l.points.len().saturating_sub(1) {
            let (a, b) = (l.points[k], l.points[k + 1]);
            let len = (b - a).norm();
            if len == 0.0 {
                continue;
            }
            let d = b - a;
            let t_star = (((c - a).re * d.re + (c - a).im * d.im) / d.norm_sqr()).clamp(0.0, 1.0);
            let mut ts = vec![0.0, 1.0, t_star];
            ts.extend(circle_hits(a, b, c, radius));
            for &br in breaks {
                ts.extend(circle_hits(a, b, c, br));
            }
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            for win in ts.windows(2) {
                let (t0, t1) = (win[0], win[1]);
                if t1 <= t0 || (a + d * (0.5 * (t0 + t1)) - c).norm() >= radius {
                    continue;
                }
                let f = |t: f64| w((a + d * t - c).norm()) * l.density_on(k, t);
                let tfloor = floor / len;
                // grade toward the point nearest the center
                let v = if t0 == t_star {
                    integrate_graded(f, t0, t1 - t0, tfloor)
                } else if t1 == t_star {
                    integrate_graded(|u| f(t1 - u), 0.0, t1 - t0, tfloor)
                } else {
                    integrate_adaptive(f, t0, t1, 1e-16, 1e-11, 30).0
                };
                total += v * len;
            }
        }
    }
    total
}

/// `int over D(center, radius) of |ln(|w - center| / scale)| mu(dw)`.
///
/// Returns `+inf` when an atom sits at the center.
pub fn log_kernel_integral(m: &RieszMeasure, center: Point, radius: f64, scale: f64) -> Result<f64> {
    if !(radius > 0.0 && scale > 0.0) {
        return Err(Error::Parameter(format!("radius {radius} and scale {scale} must be positive")));
    }
    let floor = 1e-12 * scale;
    let w = |s: f64| (s / scale).ln().abs();
    let mut atoms = 0.0;
    for a in &m.atoms {
        let s = (a.at - center).norm();
        if s < radius && a.mass > 0.0 {
            if s <= 1e-15 * scale {
                return Ok(f64::INFINITY);
            }
            atoms += a.mass * w(s);
        }
    }
    let ac = ac_radial(&m.density, center, radius, &w, floor, &[scale]);
    let lines = lines_radial(m, center, radius, &w, floor, &[scale]);
    Ok(ac + lines + atoms)
}

/// `mu(D(center, radius))` by the same polar quadrature.
pub fn disk_mass(m: &RieszMeasure, center: Point, radius: f64) -> f64 {
    let one = |_: f64| 1.0;
    let atoms: f64 = m.atoms.iter().filter(|a| (a.at - center).norm() < radius).map(|a| a.mass).sum();
    ac_radial(&m.density, center, radius, &one, 1e-12 * radius, &[]) + lines_radial(m, center, radius, &one, 1e-12 * radius, &[]) + atoms
}

/// `W_z(t) = mu(D(z, t))` on a logarithmic grid with the fitted constant in `W <= K t^rho0`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthProfile {
    pub center: Point,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub rho0: f64,
    pub k: f64,
}

impl GrowthProfile {
    pub fn sample(m: &RieszMeasure, center: Point, t_min: f64, t_max: f64, n: usize, rho0: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho0 <= 2.0) {
            return Err(Error::Parameter(format!("rho0 = {rho0} not in (0, 2]")));
        }
        if !(t_min > 0.0 && t_max > t_min && n >= 2) {
            return Err(Error::Parameter("growth profile needs 0 < t_min < t_max and n >= 2".into()));
        }
        let t: Vec<f64> = (0..n).map(|i| t_min * (t_max / t_min).powf(i as f64 / (n - 1) as f64)).collect();
        let mut w: Vec<f64> = t.iter().map(|&t| disk_mass(m, center, t)).collect();
        // enforce monotonicity against quadrature noise
        for i in 1..n {
            w[i] = w[i].max(w[i - 1]);
        }
        let k = t.iter().zip(&w).map(|(t, w)| w / t.powf(rho0)).fold(0.0, f64::max);
        Ok(GrowthProfile { center, t, w, rho0, k })
    }

    /// `W(s)` by log-linear interpolation on the grid.
    pub fn w_at(&self, s: f64) -> Result<f64> {
        let n = self.t.len();
        if s < self.t[0] * (1.0 - 1e-12) || s > self.t[n - 1] * (1.0 + 1e-12) {
            return Err(Error::Parameter(format!("radius {s} outside the sampled profile")));
        }
        let i = self.t.partition_point(|&t| t <= s).clamp(1, n - 1);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let f = ((s / t0).ln() / (t1 / t0).ln()).clamp(0.0, 1.0);
        Ok(self.w[i - 1] + f * (self.w[i] - self.w[i - 1]))
    }

    pub fn k1(&self) -> f64 {
        self.k * (1.0 + 1.0 / (self.rho0 * std::f64::consts::LN_2))
    }

    pub fn k2(&self) -> f64 {
        1.0
    }
}

/// `K1 t^rho0 ln(rtil/t) + K2 ln(rtil/t) W(rtil)`, an upper bound for the
/// log-kernel integral over `D(z, rtil)` at scale `rtil`.
pub fn growth_profile_bound(p: &GrowthProfile, t: f64, rtil: f64) -> Result<f64> {
    if !(t > 0.0 && 2.0 * t < rtil) {
        return Err(Error::Parameter(format!("need 0 < 2t < rtil (t = {t}, rtil = {rtil})")));
    }
    let l = (rtil / t).ln();
    Ok(p.k1() * t.powf(p.rho0) * l + p.k2() * l * p.w_at(rtil)?)
}
