//! Zero counting by the argument principle along polygonal contours, with
//! contour nudging, region splitting and quadtree isolation of zeros.

use crate::error::{Error, Result};
use crate::geometry::{PlanarDomain, Point};
use crate::holofunc::HolomorphicModel;
use crate::quad::gl16;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Closed polyline, positively oriented. The closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub vertices: Vec<Point>,
}

impl Contour {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidDomain("contour needs at least 3 finite vertices".into()));
        }
        Ok(Contour { vertices })
    }

    pub fn from_domain(dom: &PlanarDomain) -> Self {
        Contour { vertices: dom.vertices().to_vec() }
    }

    /// Circle approximated by `n` vertices.
    pub fn circle(center: Point, radius: f64, n: usize) -> Self {
        Contour { vertices: (0..n).map(|k| center + Point::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect() }
    }

    pub fn edge(&self, k: usize) -> (Point, Point) {
        (self.vertices[k], self.vertices[(k + 1) % self.vertices.len()])
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for v in &self.vertices {
            lo = Point::new(lo.re.min(v.re), lo.im.min(v.im));
            hi = Point::new(hi.re.max(v.re), hi.im.max(v.im));
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Winding number of the contour around `x` (crossing-number form).
    pub fn winding_around(&self, x: Point) -> i64 {
        let mut w = 0;
        for k in 0..self.vertices.len() {
            let (a, b) = self.edge(k);
            let side = (b.re - a.re) * (x.im - a.im) - (x.re - a.re) * (b.im - a.im);
            if a.im <= x.im && b.im > x.im && side > 0.0 {
                w += 1;
            } else if a.im > x.im && b.im <= x.im && side < 0.0 {
                w -= 1;
            }
        }
        w
    }

    /// Cuts along the line `Re z = c` (`vertical`) or `Im z = c`, returning the parts on the
    /// low and high side. Each part is a closed polyline; parts of nonconvex contours may be
    /// joined by zero-width bridges along the cut, which do not change winding integrals.
    pub fn split(&self, vertical: bool, c: f64) -> (Contour, Contour) {
        let coord = |p: Point| if vertical { p.re } else { p.im };
        let mut low = Vec::new();
        let mut high = Vec::new();
        for k in 0..self.vertices.len() {
            let (a, b) = self.edge(k);
            let (da, db) = (coord(a) - c, coord(b) - c);
            if da <= 0.0 {
                low.push(a);
            }
            if da >= 0.0 {
                high.push(a);
            }
            if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
                let t = da / (da - db);
                let mut p = a + (b - a) * t;
                if vertical {
                    p.re = c;
                } else {
                    p.im = c;
                }
                low.push(p);
                high.push(p);
            }
        }
        (Contour { vertices: low }, Contour { vertices: high })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountResult {
    pub count: i64,
    /// Distance of the quadrature value of `(1/2 pi i) int u'/u dz` to `count`.
    pub residual: f64,
    pub subdivisions: usize,
    pub perturbations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    /// Bisection depth per contour edge.
    pub max_edge_depth: u32,
    /// Contour nudges before giving up on a zero on the contour.
    pub max_retries: usize,
    /// First nudge, relative to the contour diameter; doubled on each retry.
    pub nudge: f64,
    /// A point with `1/|u'/u| < near_zero * diameter` counts as a zero on the contour.
    pub near_zero: f64,
    pub residual_tol: f64,
    /// Region splitting depth in [`count_in_region`].
    pub max_split_depth: u32,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { max_edge_depth: 48, max_retries: 8, nudge: 1e-6, near_zero: 1e-10, residual_tol: 1e-3, max_split_depth: 12 }
    }
}

enum EdgeFailure {
    NearZero(Point),
    Error(Error),
}

struct EdgeSum {
    arg: f64,
    quad: f64,
    pieces: usize,
}

fn phase_at<U: HolomorphicModel + ?Sized>(u: &U, z: Point, h: f64) -> std::result::Result<(f64, f64), EdgeFailure> {
    match u.value(z, h) {
        Ok(v) if v.zero => Err(EdgeFailure::NearZero(z)),
        Ok(v) => Ok((v.ln_abs, v.phase)),
        Err(Error::Pole { at }) => Err(EdgeFailure::NearZero(at)),
        Err(e) => Err(EdgeFailure::Error(e)),
    }
}

fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Argument increment of `u` along the segment `[a, b]`, bisecting until each piece turns by
/// less than `pi/2` and agrees with a Gauss-Legendre value of `int u'/u dz`.
fn edge_increment<U: HolomorphicModel + ?Sized>(u: &U, a: Point, b: Point, h: f64, opts: &CountOptions, scale: f64) -> std::result::Result<EdgeSum, EdgeFailure> {
    let rule = gl16();
    let pa = phase_at(u, a, h)?;
    let pb = phase_at(u, b, h)?;
    let mut stack = vec![(a, b, pa, pb, 0u32)];
    let mut out = EdgeSum { arg: 0.0, quad: 0.0, pieces: 0 };
    while let Some((p, q, vp, vq, depth)) = stack.pop() {
        let d = wrap_angle(vq.1 - vp.1);
        let mut ok = d.abs() < FRAC_PI_2;
        let mut integral = Complex64::new(0.0, 0.0);
        if ok {
            let (m, r) = ((p + q) * 0.5, (q - p) * 0.5);
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let z = m + r * *x;
                let ld = match u.log_derivative(z, h) {
                    Ok(v) => v,
                    Err(Error::Pole { at }) => return Err(EdgeFailure::NearZero(at)),
                    Err(e) => return Err(EdgeFailure::Error(e)),
                };
                if ld.norm() * opts.near_zero * scale > 1.0 {
                    return Err(EdgeFailure::NearZero(z));
                }
                integral += ld * r * *w;
            }
            let tol = 1e-8 * (1.0 + d.abs());
            ok = (integral.im - d).abs() < tol && (integral.re - (vq.0 - vp.0)).abs() < tol.max(1e-8 * (vq.0 - vp.0).abs());
        }
        if ok {
            out.arg += d;
            out.quad += integral.im;
            out.pieces += 1;
            continue;
        }
        if depth >= opts.max_edge_depth {
            return Err(EdgeFailure::NearZero((p + q) * 0.5));
        }
        let m = (p + q) * 0.5;
        let vm = phase_at(u, m, h)?;
        // pop order keeps the traversal from p to q
        stack.push((m, q, vm, vq, depth + 1));
        stack.push((p, m, vp, vm, depth + 1));
    }
    Ok(out)
}

/// Winding of `u` along a contour without any nudging.
fn wind_once<U: HolomorphicModel + ?Sized>(u: &U, c: &Contour, h: f64, opts: &CountOptions, scale: f64) -> std::result::Result<CountResult, (usize, EdgeFailure)> {
    let sums: Vec<_> = (0..c.vertices.len())
        .into_par_iter()
        .map(|k| {
            let (a, b) = c.edge(k);
            edge_increment(u, a, b, h, opts, scale).map_err(|e| (k, e))
        })
        .collect();
    let mut arg = 0.0;
    let mut quad = 0.0;
    let mut pieces = 0;
    for s in sums {
        let s = s?;
        arg += s.arg;
        quad += s.quad;
        pieces += s.pieces;
    }
    let count = (arg / (2.0 * PI)).round() as i64;
    let residual = (quad / (2.0 * PI) - count as f64).abs();
    Ok(CountResult { count, residual, subdivisions: pieces, perturbations: 0 })
}

/// `(1/2 pi i) int_c u'/u dz`. A zero on the contour is handled by pushing the offending
/// edge outward at that point, by `nudge * diameter * 2^k` on retry `k`.
pub fn winding_count<U: HolomorphicModel + ?Sized>(u: &U, c: &Contour, h: f64) -> Result<CountResult> {
    winding_count_with(u, c, h, &CountOptions::default())
}

pub fn winding_count_with<U: HolomorphicModel + ?Sized>(u: &U, c: &Contour, h: f64, opts: &CountOptions) -> Result<CountResult> {
    crate::holofunc::check_h(h)?;
    let scale = c.diameter();
    let mut contour = c.clone();
    let mut last = Point::new(0.0, 0.0);
    for retry in 0..=opts.max_retries {
        match wind_once(u, &contour, h, opts, scale) {
            Ok(mut r) => {
                if r.residual >= opts.residual_tol {
                    return Err(Error::NonConvergence(format!("residual {:.3e} after {} pieces", r.residual, r.subdivisions)));
                }
                r.perturbations = retry;
                return Ok(r);
            }
            Err((_, EdgeFailure::Error(e))) => return Err(e),
            Err((k, EdgeFailure::NearZero(at))) => {
                last = at;
                if retry == opts.max_retries {
                    break;
                }
                let (a, b) = contour.edge(k);
                let t = b - a;
                let outward = Point::new(t.im, -t.re) / t.norm();
                // project onto the edge so the bump sits on it
                let s = ((at - a).re * t.re + (at - a).im * t.im) / t.norm_sqr();
                let foot = a + t * s.clamp(0.0, 1.0);
                let delta = opts.nudge * scale * 2f64.powi(retry as i32);
                let w = (delta * 4.0).min(0.25 * t.norm());
                let mut bump = Vec::new();
                let s0 = (s - w / t.norm()).max(0.0);
                let s1 = (s + w / t.norm()).min(1.0);
                if s0 > 0.0 {
                    bump.push(a + t * s0);
                }
                bump.push(foot + outward * delta);
                if s1 < 1.0 {
                    bump.push(a + t * s1);
                }
                let at_k = k + 1;
                contour.vertices.splice(at_k..at_k, bump);
            }
        }
    }
    Err(Error::ZeroOnContour { at: last, retries: opts.max_retries })
}

/// Count over `c`, splitting on failure. Cuts are shifted rather than nudged so both sides
/// see the same cut.
fn count_split<U: HolomorphicModel + ?Sized>(u: &U, c: &Contour, h: f64, opts: &CountOptions, scale: f64, depth: u32) -> Result<CountResult> {
    let first = match wind_once(u, c, h, opts, scale) {
        Ok(r) if r.residual < opts.residual_tol => return Ok(r),
        Ok(r) => Error::NonConvergence(format!("residual {:.3e}", r.residual)),
        Err((_, EdgeFailure::Error(e))) => return Err(e),
        Err((_, EdgeFailure::NearZero(at))) => Error::ZeroOnContour { at, retries: 0 },
    };
    if depth >= opts.max_split_depth {
        return Err(first);
    }
    let (lo, hi) = c.bounding_box();
    let vertical = hi.re - lo.re >= hi.im - lo.im;
    let mut last = first;
    for attempt in 0..=opts.max_retries {
        let f = 0.5 + 0.045 * (attempt as f64) * if attempt % 2 == 0 { 1.0 } else { -1.0 };
        let cut = if vertical { lo.re + f * (hi.re - lo.re) } else { lo.im + f * (hi.im - lo.im) };
        let (a, b) = c.split(vertical, cut);
        let ra = if a.vertices.len() < 3 { Ok(CountResult { count: 0, residual: 0.0, subdivisions: 0, perturbations: 0 }) } else { count_split(u, &a, h, opts, scale, depth + 1) };
        let rb = if b.vertices.len() < 3 { Ok(CountResult { count: 0, residual: 0.0, subdivisions: 0, perturbations: 0 }) } else { count_split(u, &b, h, opts, scale, depth + 1) };
        match (ra, rb) {
            (Ok(x), Ok(y)) => {
                return Ok(CountResult {
                    count: x.count + y.count,
                    residual: x.residual + y.residual,
                    subdivisions: x.subdivisions + y.subdivisions,
                    perturbations: x.perturbations + y.perturbations + attempt,
                })
            }
            (Err(e), _) | (_, Err(e)) => last = e,
        }
    }
    Err(last)
}

/// Zeros of `u` in `region`: winding on the boundary, then region splitting when that fails
/// for reasons other than a zero on the outer boundary.
pub fn count_in_region<U: HolomorphicModel + ?Sized>(u: &U, region: &PlanarDomain, h: f64) -> Result<CountResult> {
    count_in_region_with(u, region, h, &CountOptions::default())
}

pub fn count_in_region_with<U: HolomorphicModel + ?Sized>(u: &U, region: &PlanarDomain, h: f64, opts: &CountOptions) -> Result<CountResult> {
    let c = Contour::from_domain(region);
    match winding_count_with(u, &c, h, opts) {
        Ok(r) => Ok(r),
        Err(Error::NonConvergence(_)) => count_split(u, &c, h, opts, c.diameter(), 0),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocatedZero {
    pub at: Point,
    pub multiplicity: i64,
    /// Half-diagonal of the box known to contain the zero (or cluster).
    pub radius: f64,
}

fn newton<U: HolomorphicModel + ?Sized>(u: &U, z0: Point, m: i64, h: f64, iters: usize) -> Option<Point> {
    let mut z = z0;
    for _ in 0..iters {
        let ld = match u.log_derivative(z, h) {
            Ok(v) => v,
            Err(Error::Pole { .. }) => return Some(z),
            Err(_) => return None,
        };
        if ld.norm() == 0.0 || !ld.re.is_finite() {
            return None;
        }
        let step = Complex64::new(m as f64, 0.0) / ld;
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    Some(z)
}

fn square(center: Point, half: f64) -> Contour {
    Contour {
        vertices: vec![
            center + Point::new(-half, -half),
            center + Point::new(half, -half),
            center + Point::new(half, half),
            center + Point::new(-half, half),
        ],
    }
}

/// Zeros in `region` with multiplicities, isolated by recursive splitting and refined by Newton.
/// Clusters that cannot be separated above `1e-8 * diam` are reported with their multiplicity.
pub fn locate_zeros<U: HolomorphicModel + ?Sized>(u: &U, region: &PlanarDomain, h: f64) -> Result<Vec<LocatedZero>> {
    let opts = CountOptions::default();
    let total = count_in_region_with(u, region, h, &opts)?;
    if total.count > 10_000 {
        return Err(Error::Parameter(format!("{} zeros exceed the location limit", total.count)));
    }
    let c = Contour::from_domain(region);
    let scale = c.diameter();
    let mut out = Vec::new();
    isolate(u, &c, total.count, h, &opts, scale, &mut out)?;
    out.sort_by(|a, b| a.at.im.total_cmp(&b.at.im).then(a.at.re.total_cmp(&b.at.re)));
    Ok(out)
}

fn isolate<U: HolomorphicModel + ?Sized>(u: &U, c: &Contour, count: i64, h: f64, opts: &CountOptions, scale: f64, out: &mut Vec<LocatedZero>) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    let (lo, hi) = c.bounding_box();
    let size = (hi - lo).norm();
    let center = (lo + hi) * 0.5;
    // try Newton from the box center and confirm with a small square
    if let Some(z) = newton(u, center, count, h, 60) {
        if c.winding_around(z) != 0 {
            let r = 1e-6 * scale;
            if let Ok(k) = count_split(u, &square(z, r), h, opts, scale, opts.max_split_depth) {
                if k.count == count {
                    out.push(LocatedZero { at: z, multiplicity: count, radius: r * 2f64.sqrt() });
                    return Ok(());
                }
            }
        }
    }
    if size < 1e-8 * scale {
        out.push(LocatedZero { at: center, multiplicity: count, radius: size / 2.0 });
        return Ok(());
    }
    let vertical = hi.re - lo.re >= hi.im - lo.im;
    let mut last = None;
    for attempt in 0..=opts.max_retries {
        let f = 0.5 + 0.045 * (attempt as f64 + 0.37) * if attempt % 2 == 0 { 1.0 } else { -1.0 };
        let cut = if vertical { lo.re + f * (hi.re - lo.re) } else { lo.im + f * (hi.im - lo.im) };
        let (a, b) = c.split(vertical, cut);
        let na = if a.vertices.len() < 3 { Ok(CountResult { count: 0, residual: 0.0, subdivisions: 0, perturbations: 0 }) } else { count_split(u, &a, h, opts, scale, 0) };
        match na {
            Ok(na) if na.count >= 0 && na.count <= count => {
                isolate(u, &a, na.count, h, opts, scale, out)?;
                return isolate(u, &b, count - na.count, h, opts, scale, out);
            }
            Ok(_) => {}
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::NonConvergence("zero isolation failed".into())))
}
