//! Quadrature building blocks shared by the geometry and measure modules.
//!
//! Everything here is deterministic: adaptive schemes split in a fixed order and
//! sum in tree order, so repeated runs give bit-identical results.

use crate::error::{Error, Result};
use crate::geometry::Point;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached 16-point Gauss-Legendre rule.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Cached 8-point Gauss-Legendre rule.
pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Fixed Gauss-Legendre rule mapped to [a, b].
pub fn gauss_fixed<F: FnMut(f64) -> f64>(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration on [a, b] with bisection.
///
/// Returns `(value, error_estimate)`. Non-convergence within `max_depth`
/// bisections is reported through the error estimate; the caller decides.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: usize,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut stack = vec![(a, b, v, e, 0usize)];
    let mut total = 0.0;
    let mut total_err = 0.0;
    let scale = v.abs();
    while let Some((lo, hi, v, e, depth)) = stack.pop() {
        let tol = (abs_tol.max(rel_tol * scale)) * (hi - lo).abs() / (b - a).abs();
        if e <= tol || depth >= max_depth || (hi - lo).abs() < 1e-15 * (1.0 + lo.abs()) {
            total += v;
            total_err += e;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        stack.push((mid, hi, v2, e2, depth + 1));
        stack.push((lo, mid, v1, e1, depth + 1));
    }
    (total, total_err)
}

/// Integral of `f` over `[t0, t0 + len]` where `f` may have an integrable
/// (logarithmic) singularity at `t0`. Uses geometric grading with ratio 1/2
/// down to `floor`, 16-point Gauss on each ring.
pub fn integrate_graded<F: FnMut(f64) -> f64>(mut f: F, t0: f64, len: f64, floor: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let rule = gl16();
    let mut total = 0.0;
    let mut outer = len;
    loop {
        let inner = 0.5 * outer;
        if inner < floor {
            total += gauss_fixed(rule, t0, t0 + outer, &mut f);
            break;
        }
        total += gauss_fixed(rule, t0 + inner, t0 + outer, &mut f);
        outer = inner;
    }
    total
}

/// Degree-5 seven-point rule on a triangle (barycentric weights sum to one).
fn triangle_rule<F: Fn(Point) -> f64>(f: &F, t: &[Point; 3]) -> f64 {
    static RULE: OnceLock<Vec<(f64, f64, f64, f64)>> = OnceLock::new();
    let rule = RULE.get_or_init(|| {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let mut r = vec![(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0)];
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            r.push((a, a, b, w));
            r.push((a, b, a, w));
            r.push((b, a, a, w));
        }
        r
    });
    let area = triangle_area(t);
    if area == 0.0 {
        return 0.0;
    }
    let s: f64 = rule
        .iter()
        .map(|&(l0, l1, l2, w)| w * f(t[0] * l0 + t[1] * l1 + t[2] * l2))
        .sum();
    s * area
}

pub fn triangle_area(t: &[Point; 3]) -> f64 {
    let a = t[1] - t[0];
    let b = t[2] - t[0];
    0.5 * (a.re * b.im - a.im * b.re).abs()
}

fn split4(t: &[Point; 3]) -> [[Point; 3]; 4] {
    let m01 = (t[0] + t[1]) * 0.5;
    let m12 = (t[1] + t[2]) * 0.5;
    let m20 = (t[2] + t[0]) * 0.5;
    [
        [t[0], m01, m20],
        [m01, t[1], m12],
        [m20, m12, t[2]],
        [m01, m12, m20],
    ]
}

fn tri_diameter(t: &[Point; 3]) -> f64 {
    (t[0] - t[1]).norm().max((t[1] - t[2]).norm()).max((t[2] - t[0]).norm())
}

struct TriCell {
    err: f64,
    value: f64,
    tri: [Point; 3],
    seq: usize,
}

impl PartialEq for TriCell {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err && self.seq == o.seq
    }
}
impl Eq for TriCell {}
impl PartialOrd for TriCell {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for TriCell {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err
            .total_cmp(&o.err)
            .then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Options for adaptive 2-D integration over polygons.
#[derive(Debug, Clone, Copy)]
pub struct AreaQuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial triangles are refined until their diameter is below this value.
    pub initial_diameter: f64,
    pub max_cells: usize,
}

impl Default for AreaQuadOptions {
    fn default() -> Self {
        AreaQuadOptions {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            initial_diameter: f64::INFINITY,
            max_cells: 400_000,
        }
    }
}

/// Globally adaptive integration over a set of triangles.
pub fn integrate_triangles<F: Fn(Point) -> f64 + Sync>(
    f: &F,
    triangles: &[[Point; 3]],
    opts: &AreaQuadOptions,
) -> Result<f64> {
    let mut seeds: Vec<[Point; 3]> = Vec::new();
    for t in triangles {
        let mut pending = vec![*t];
        while let Some(t) = pending.pop() {
            if tri_diameter(&t) > opts.initial_diameter {
                pending.extend(split4(&t));
            } else {
                seeds.push(t);
            }
        }
    }
    let eval = |t: &[Point; 3]| -> (f64, f64) {
        let coarse = triangle_rule(f, t);
        let fine: f64 = split4(t).iter().map(|c| triangle_rule(f, c)).sum();
        (fine, (fine - coarse).abs())
    };
    use rayon::prelude::*;
    let evaluated: Vec<(f64, f64)> = seeds.par_iter().map(eval).collect();
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    for (t, (v, e)) in seeds.iter().zip(evaluated) {
        heap.push(TriCell { err: e, value: v, tri: *t, seq });
        seq += 1;
    }
    loop {
        // Kahan-free but deterministic: heap order is fixed by (err, seq).
        let (total, err): (f64, f64) = heap.iter().fold((0.0, 0.0), |(a, b), c| (a + c.value, b + c.err));
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            let mut cells: Vec<&TriCell> = heap.iter().collect();
            cells.sort_by_key(|c| c.seq);
            return Ok(cells.iter().map(|c| c.value).sum());
        }
        if heap.len() >= opts.max_cells {
            return Err(Error::ToleranceNotMet { best: total, error_estimate: err });
        }
        // refine a batch of the worst cells at once
        let batch = (heap.len() / 8).clamp(1, 256);
        let mut worst = Vec::with_capacity(batch);
        for _ in 0..batch {
            if let Some(c) = heap.pop() {
                worst.push(c);
            }
        }
        let children: Vec<[Point; 3]> = worst.iter().flat_map(|c| split4(&c.tri)).collect();
        let evaluated: Vec<(f64, f64)> = children.par_iter().map(eval).collect();
        for (t, (v, e)) in children.iter().zip(evaluated) {
            heap.push(TriCell { err: e, value: v, tri: *t, seq });
            seq += 1;
        }
    }
}

/// Ear-clipping triangulation of a simple, positively oriented polygon.
pub fn triangulate(poly: &[Point]) -> Vec<[Point; 3]> {
    let n = poly.len();
    if n < 3 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n - 2);
    let cross = |a: Point, b: Point, c: Point| (b - a).re * (c - a).im - (b - a).im * (c - a).re;
    let mut guard = 0;
    while idx.len() > 3 && guard < 10 * n * n {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            let turn = cross(a, b, c);
            if turn <= 0.0 {
                continue;
            }
            let contains_other = idx.iter().any(|&k| {
                if k == ia || k == ib || k == ic {
                    return false;
                }
                let p = poly[k];
                cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
            });
            if contains_other {
                continue;
            }
            out.push([a, b, c]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            // Collinear leftovers: drop a degenerate vertex.
            let m = idx.len();
            let pos = (0..m)
                .find(|&i| {
                    let (a, b, c) = (poly[idx[(i + m - 1) % m]], poly[idx[i]], poly[idx[(i + 1) % m]]);
                    cross(a, b, c).abs() <= 1e-14 * (b - a).norm() * (c - b).norm()
                })
                .unwrap_or(0);
            idx.remove(pos);
        }
    }
    if idx.len() == 3 {
        let t = [poly[idx[0]], poly[idx[1]], poly[idx[2]]];
        if cross(t[0], t[1], t[2]) > 0.0 {
            out.push(t);
        }
    }
    out
}

/// Unit-disk quadrature rule weighted by the normalized radial bump
/// `exp(-1/(1-|z|^2))`. Weights are positive and sum to one.
#[derive(Debug, Clone)]
pub struct BumpRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Mean of `|z|` under the rule.
    pub mean_radius: f64,
}

impl BumpRule {
    pub fn new(n_radial: usize, n_angular: usize) -> Self {
        let (x, w) = gauss_legendre(n_radial);
        let mut points = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        for (xi, wi) in x.iter().zip(&w) {
            let rho = 0.5 * (xi + 1.0);
            let bump = (-1.0 / (1.0 - rho * rho)).exp();
            for k in 0..n_angular {
                let ang = 2.0 * PI * (k as f64 + 0.5) / n_angular as f64;
                points.push(Point::from_polar(rho, ang));
                weights.push(0.5 * wi * rho * bump);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mean_radius = points.iter().zip(&weights).map(|(p, w)| p.norm() * w).sum();
        BumpRule { points, weights, mean_radius }
    }

    pub fn standard() -> &'static BumpRule {
        static RULE: OnceLock<BumpRule> = OnceLock::new();
        RULE.get_or_init(|| BumpRule::new(10, 16))
    }

    pub fn fine() -> &'static BumpRule {
        static RULE: OnceLock<BumpRule> = OnceLock::new();
        RULE.get_or_init(|| BumpRule::new(20, 32))
    }

    pub fn finest() -> &'static BumpRule {
        static RULE: OnceLock<BumpRule> = OnceLock::new();
        RULE.get_or_init(|| BumpRule::new(40, 64))
    }

    /// `sum_k w_k f(center - scale * z_k)`
    pub fn apply<F: Fn(Point) -> f64>(&self, center: Point, scale: f64, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * f(center - *z * scale))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_log_endpoint() {
        let (v, _) = integrate_adaptive(|t: f64| -t.ln(), 0.0, 1.0, 1e-12, 1e-12, 60);
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn graded_handles_log_endpoint() {
        let v = integrate_graded(|t: f64| -(t.ln()), 0.0, 1.0, 1e-14);
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn triangle_quadrature_of_polygon_area() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 0.5),
            Point::new(0.0, 1.0),
        ];
        let tris = triangulate(&sq);
        assert_eq!(tris.len(), 3);
        let area = integrate_triangles(&|_| 1.0, &tris, &AreaQuadOptions::default()).unwrap();
        assert!((area - 1.5).abs() < 1e-12);
        let mom =
            integrate_triangles(&|p: Point| p.re * p.re, &tris, &AreaQuadOptions::default()).unwrap();
        // exact: square [0,2]x[0,1] minus triangle (0,1),(2,1),(1,0.5)
        let exact = 8.0 / 3.0 - tri_moment();
        assert!((mom - exact).abs() < 1e-10, "{mom} {exact}");
    }

    fn tri_moment() -> f64 {
        // x^2 over the notch triangle (0,1),(2,1),(1,0.5): A/6 (sum x_i^2 + sum x_i x_j)
        let (x1, x2, x3) = (0.0f64, 2.0f64, 1.0f64);
        let area = 0.5;
        area / 6.0 * (x1 * x1 + x2 * x2 + x3 * x3 + x1 * x2 + x2 * x3 + x3 * x1)
    }

    #[test]
    fn bump_rule_is_normalized_and_symmetric() {
        let r = BumpRule::standard();
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let first: Point = r.points.iter().zip(&r.weights).map(|(p, w)| *p * *w).sum();
        assert!(first.norm() < 1e-15);
        assert!(r.mean_radius > 0.2 && r.mean_radius < 0.6);
    }
}
