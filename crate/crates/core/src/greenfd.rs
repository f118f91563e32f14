//! Discrete Dirichlet Green functions on node grids and the fitted constants of the
//! near-diagonal log bound, the decay along thin neighborhoods and the two-sided bound on
//! elementary pieces.

use crate::error::{Error, Result};
use crate::geometry::{PlanarDomain, Point, ThinNeighborhood};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Node grid `origin + spacing (i, j)` with a mask of interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRegion {
    pub origin: Point,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
}

pub type Node = (usize, usize);

impl GridRegion {
    /// Nodes covering the box `[lo, hi]`; interior where `inside` holds.
    pub fn from_predicate(lo: Point, hi: Point, spacing: f64, inside: impl Fn(Point) -> bool) -> Result<Self> {
        if !(spacing > 0.0) || !(hi.re > lo.re && hi.im > lo.im) {
            return Err(Error::InvalidRegion(format!("bad grid box or spacing {spacing}")));
        }
        let nx = ((hi.re - lo.re) / spacing).round() as usize + 1;
        let ny = ((hi.im - lo.im) / spacing).round() as usize + 1;
        let mut g = GridRegion { origin: lo, spacing, nx, ny, mask: vec![false; nx * ny] };
        for j in 0..ny {
            for i in 0..nx {
                g.mask[j * nx + i] = inside(g.point((i, j)));
            }
        }
        // the outer ring always carries the boundary condition
        for i in 0..nx {
            g.mask[i] = false;
            g.mask[(ny - 1) * nx + i] = false;
        }
        for j in 0..ny {
            g.mask[j * nx] = false;
            g.mask[j * nx + nx - 1] = false;
        }
        Ok(g)
    }

    /// Nodes at signed distance at least `spacing / 4` inside the domain.
    pub fn from_domain(dom: &PlanarDomain, spacing: f64) -> Result<Self> {
        let (lo, hi) = dom.bounding_box();
        let pad = Point::new(2.0 * spacing, 2.0 * spacing);
        let lo = Point::new((lo.re / spacing).floor() * spacing, (lo.im / spacing).floor() * spacing) - pad;
        let hi = hi + pad;
        Self::from_predicate(lo, hi, spacing, |x| dom.contains_with_margin(x, 0.25 * spacing))
    }

    /// Nodes between the inner and outer traces, at least `spacing / 4` from both.
    pub fn from_thin(thin: &ThinNeighborhood, spacing: f64) -> Result<Self> {
        let outer = PlanarDomain::polygon(thin.outer_trace().to_vec())?;
        let inner = PlanarDomain::polygon(thin.inner_trace().to_vec())?;
        let (lo, hi) = outer.bounding_box();
        let pad = Point::new(2.0 * spacing, 2.0 * spacing);
        Self::from_predicate(lo - pad, hi + pad, spacing, |x| {
            outer.contains_with_margin(x, 0.25 * spacing) && !inner.contains(x) && inner.distance(x) >= 0.25 * spacing
        })
    }

    pub fn point(&self, n: Node) -> Point {
        self.origin + Point::new(n.0 as f64, n.1 as f64) * self.spacing
    }

    pub fn index(&self, n: Node) -> usize {
        n.1 * self.nx + n.0
    }

    pub fn is_interior(&self, n: Node) -> bool {
        n.0 < self.nx && n.1 < self.ny && self.mask[self.index(n)]
    }

    pub fn interior_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn nearest_node(&self, x: Point) -> Node {
        let d = (x - self.origin) / self.spacing;
        (d.re.round().clamp(0.0, (self.nx - 1) as f64) as usize, d.im.round().clamp(0.0, (self.ny - 1) as f64) as usize)
    }

    fn neighbors(&self, n: Node) -> impl Iterator<Item = Node> + '_ {
        let (i, j) = (n.0 as i64, n.1 as i64);
        [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
            .into_iter()
            .filter(|&(a, b)| a >= 0 && b >= 0 && (a as usize) < self.nx && (b as usize) < self.ny)
            .map(|(a, b)| (a as usize, b as usize))
    }

    /// Number of 4-connected components of the interior.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.mask.len()];
        let mut count = 0;
        for start in 0..self.mask.len() {
            if !self.mask[start] || seen[start] {
                continue;
            }
            count += 1;
            let mut q = VecDeque::from([(start % self.nx, start / self.nx)]);
            seen[start] = true;
            while let Some(n) = q.pop_front() {
                for m in self.neighbors(n) {
                    let k = self.index(m);
                    if self.mask[k] && !seen[k] {
                        seen[k] = true;
                        q.push_back(m);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Text header followed by one byte per node.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, self, "mask")?;
        w.write_all(&self.mask.iter().map(|&m| m as u8).collect::<Vec<u8>>())?;
        Ok(())
    }

    pub fn load<R: BufRead>(mut r: R) -> Result<Self> {
        let (mut g, kind) = read_header(&mut r)?;
        if kind != "mask" {
            return Err(Error::Parse(format!("expected a mask grid, found {kind}")));
        }
        let mut buf = vec![0u8; g.nx * g.ny];
        r.read_exact(&mut buf)?;
        g.mask = buf.into_iter().map(|b| b != 0).collect();
        Ok(g)
    }
}

fn write_header<W: Write>(w: &mut W, g: &GridRegion, kind: &str) -> Result<()> {
    writeln!(w, "HZGRID 1")?;
    writeln!(w, "spacing {:e}", g.spacing)?;
    writeln!(w, "origin {:e} {:e}", g.origin.re, g.origin.im)?;
    writeln!(w, "dims {} {}", g.nx, g.ny)?;
    writeln!(w, "data {kind}")?;
    Ok(())
}

fn read_header<R: BufRead>(r: &mut R) -> Result<(GridRegion, String)> {
    let mut lines = Vec::new();
    for _ in 0..5 {
        let mut s = String::new();
        r.read_line(&mut s)?;
        lines.push(s.trim_end().to_string());
    }
    let field = |k: usize, key: &str| -> Result<Vec<String>> {
        let mut it = lines[k].split_whitespace();
        if it.next() != Some(key) {
            return Err(Error::Parse(format!("grid header line {} should start with '{key}'", k + 1)));
        }
        Ok(it.map(String::from).collect())
    };
    if lines[0] != "HZGRID 1" {
        return Err(Error::Parse("not a grid file".into()));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
    let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
    let sp = field(1, "spacing")?;
    let or = field(2, "origin")?;
    let dm = field(3, "dims")?;
    let kind = field(4, "data")?;
    if sp.len() != 1 || or.len() != 2 || dm.len() != 2 || kind.len() != 1 {
        return Err(Error::Parse("malformed grid header".into()));
    }
    let (nx, ny) = (int(&dm[0])?, int(&dm[1])?);
    let g = GridRegion { origin: Point::new(num(&or[0])?, num(&or[1])?), spacing: num(&sp[0])?, nx, ny, mask: vec![false; nx * ny] };
    Ok((g, kind[0].clone()))
}

/// `-G(., y)` on all nodes (zero off the interior) for a unit point mass at `source`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenSample {
    pub source: Node,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl GreenSample {
    pub fn at(&self, g: &GridRegion, n: Node) -> f64 {
        self.values[g.index(n)]
    }

    pub fn save<W: Write>(&self, g: &GridRegion, mut w: W) -> Result<()> {
        write_header(&mut w, g, "f64le")?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads values written by [`GreenSample::save`], with the grid header.
    pub fn load_values<R: BufRead>(mut r: R) -> Result<(GridRegion, Vec<f64>)> {
        let (g, kind) = read_header(&mut r)?;
        if kind != "f64le" {
            return Err(Error::Parse(format!("expected f64le data, found {kind}")));
        }
        let mut buf = vec![0u8; 8 * g.nx * g.ny];
        r.read_exact(&mut buf)?;
        let values = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok((g, values))
    }
}

/// `(4 v - sum of neighbors) / spacing^2`, neighbors outside the mask taken as zero.
fn apply_laplacian(g: &GridRegion, v: &[f64], out: &mut [f64]) {
    let nx = g.nx;
    for j in 1..g.ny - 1 {
        for i in 1..nx - 1 {
            let k = j * nx + i;
            out[k] = if g.mask[k] { 4.0 * v[k] - v[k - 1] - v[k + 1] - v[k - nx] - v[k + nx] } else { 0.0 };
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Five-point Dirichlet problem `-Delta v = delta_y / spacing^2`, solved by conjugate
/// gradients to relative residual `tol`.
pub fn solve_green_with(g: &GridRegion, source: Node, tol: f64) -> Result<GreenSample> {
    if g.interior_count() == 0 {
        return Err(Error::InvalidRegion("grid has no interior nodes".into()));
    }
    if !g.is_interior(source) {
        return Err(Error::InvalidRegion(format!("source node {source:?} is not interior")));
    }
    let n = g.mask.len();
    // scaled system: (4v - sum) = delta, so v has unit total mass against -Delta
    let mut b = vec![0.0; n];
    b[g.index(source)] = 1.0;
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let bnorm = dot(&b, &b).sqrt();
    let mut rr = dot(&r, &r);
    let max_iter = 20 * (g.nx + g.ny) * 10 + 1000;
    let mut it = 0;
    while rr.sqrt() > tol * bnorm {
        if it >= max_iter {
            return Err(Error::NonConvergence(format!("conjugate gradients stalled at residual {:.3e}", rr.sqrt() / bnorm)));
        }
        apply_laplacian(g, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        it += 1;
    }
    // true residual
    apply_laplacian(g, &x, &mut ap);
    let res = ap.iter().zip(&b).zip(&g.mask).filter(|(_, m)| **m).map(|((a, b), _)| (a - b).powi(2)).sum::<f64>().sqrt() / bnorm;
    Ok(GreenSample { source, values: x, residual: res, iterations: it })
}

pub fn solve_green(g: &GridRegion, source: Node) -> Result<GreenSample> {
    solve_green_with(g, source, 1e-12)
}

/// Max relative error of the unit-disk Green function `(1/2 pi) ln(1/|x|)` over nodes with
/// `0.1 <= |x| <= 0.9`, on a grid of the given spacing.
pub fn disk_benchmark(spacing: f64) -> Result<f64> {
    Ok(disk_benchmark_sample(spacing)?.0)
}

/// [`disk_benchmark`] together with the grid and the computed solution.
pub fn disk_benchmark_sample(spacing: f64) -> Result<(f64, GridRegion, GreenSample)> {
    let disk = PlanarDomain::disk(Point::new(0.0, 0.0), 1.0, 2048)?;
    let g = GridRegion::from_predicate(Point::new(-1.0 - 2.0 * spacing, -1.0 - 2.0 * spacing), Point::new(1.0 + 2.0 * spacing, 1.0 + 2.0 * spacing), spacing, |x| {
        disk.contains_with_margin(x, 0.25 * spacing)
    })?;
    let src = g.nearest_node(Point::new(0.0, 0.0));
    let s = solve_green(&g, src)?;
    let y = g.point(src);
    let mut worst: f64 = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let x = g.point((i, j));
            let d = (x - y).norm();
            if g.is_interior((i, j)) && (0.1..=0.9).contains(&d) {
                let exact = -(x.norm()).ln() / (2.0 * PI);
                worst = worst.max((s.at(&g, (i, j)) - exact).abs() / exact);
            }
        }
    }
    Ok((worst, g, s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C3Report {
    /// Smallest `C` with `-G <= C - (1/2 pi) ln(|x - y| / r(y))` near each source.
    pub per_source: Vec<f64>,
    pub global: f64,
}

/// Near-diagonal log bound, fitted over nodes with `0 < |x - y| <= r(y)/4`. Sources must be
/// at least two spacings inside.
pub fn fit_c3(g: &GridRegion, r: &(dyn Fn(Point) -> f64 + Sync), sources: &[Node]) -> Result<C3Report> {
    for &src in sources {
        let far = (-2i64..=2).all(|dj| (-2i64..=2).all(|di| {
            let (a, b) = (src.0 as i64 + di, src.1 as i64 + dj);
            a >= 0 && b >= 0 && g.is_interior((a as usize, b as usize))
        }));
        if !far {
            return Err(Error::InvalidRegion(format!("source {src:?} is within 2 spacings of the boundary")));
        }
    }
    let per_source = sources
        .par_iter()
        .map(|&src| {
            let s = solve_green(g, src)?;
            let y = g.point(src);
            let ry = r(y);
            let mut c = f64::NEG_INFINITY;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let d = (g.point((i, j)) - y).norm();
                    if g.is_interior((i, j)) && d > 0.0 && d <= ry / 4.0 {
                        c = c.max(s.at(g, (i, j)) + (d / ry).ln() / (2.0 * PI));
                    }
                }
            }
            if c == f64::NEG_INFINITY {
                return Err(Error::InsufficientData { got: 0, need: 1 });
            }
            Ok(c)
        })
        .collect::<Result<Vec<f64>>>()?;
    let global = per_source.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(C3Report { per_source, global })
}

/// `int dt / r(t)` along a polyline, with `r` tabulated on a refined copy of it.
struct ArcIntegral {
    points: Vec<Point>,
    inv_r: Vec<f64>,
    cumulative: Vec<f64>,
    closed: bool,
}

impl ArcIntegral {
    const REFINE: usize = 4;

    fn new(curve: &[Point], closed: bool, r: &dyn Fn(Point) -> f64) -> Self {
        let mut coarse = curve.to_vec();
        if closed {
            coarse.push(curve[0]);
        }
        let mut points = vec![coarse[0]];
        for w in coarse.windows(2) {
            for k in 1..=Self::REFINE {
                points.push(w[0] + (w[1] - w[0]) * (k as f64 / Self::REFINE as f64));
            }
        }
        let inv_r: Vec<f64> = points.iter().map(|&p| 1.0 / r(p)).collect();
        let mut cumulative = vec![0.0];
        for k in 0..points.len() - 1 {
            let seg = (points[k + 1] - points[k]).norm() * 0.5 * (inv_r[k] + inv_r[k + 1]);
            cumulative.push(cumulative[k] + seg);
        }
        ArcIntegral { points, inv_r, cumulative, closed }
    }

    /// Integral value at the nearest-point projection of `x`.
    fn project(&self, x: Point) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..self.points.len() - 1 {
            let (a, b) = (self.points[k], self.points[k + 1]);
            let d = b - a;
            let t = (((x - a).re * d.re + (x - a).im * d.im) / d.norm_sqr()).clamp(0.0, 1.0);
            let dist = (x - (a + d * t)).norm();
            if dist < best.0 {
                let inv_p = self.inv_r[k] + t * (self.inv_r[k + 1] - self.inv_r[k]);
                best = (dist, self.cumulative[k] + t * d.norm() * 0.5 * (self.inv_r[k] + inv_p));
            }
        }
        best.1
    }

    fn distance(&self, s0: f64, s1: f64) -> f64 {
        let d = (s1 - s0).abs();
        if self.closed {
            d.min(self.cumulative.last().unwrap() - d)
        } else {
            d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// Slope of `ln(-G)` against `s(x) = int dt / r(t)`.
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
    pub nodes: usize,
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        self.slope < 0.0 && self.correlation <= -0.9
    }
}

/// Regression of `ln(-G(x, y))` against the weighted arclength `s(x)` between the projections
/// of `x` and `y` on `curve`, over nodes with `|x - y| >= r(y)`.
pub fn fit_c4_decay(g: &GridRegion, curve: &[Point], closed: bool, r: &dyn Fn(Point) -> f64, source: Node) -> Result<DecayReport> {
    let s = solve_green_with(g, source, 1e-13)?;
    let arc = ArcIntegral::new(curve, closed, r);
    let y = g.point(source);
    let sy = arc.project(y);
    let ry = r(y);
    let vmax = s.values.iter().copied().fold(0.0, f64::max);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let x = g.point((i, j));
            let v = s.at(g, (i, j));
            // values near the solver floor carry no signal
            if g.is_interior((i, j)) && (x - y).norm() >= ry && v > 1e-9 * vmax {
                xs.push(arc.distance(sy, arc.project(x)));
                ys.push(v.ln());
            }
        }
    }
    if xs.len() < 20 {
        return Err(Error::InsufficientData { got: xs.len(), need: 20 });
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DecayReport { slope, intercept: my - slope * mx, correlation: sxy / (sxx * syy).sqrt(), nodes: xs.len() })
}

/// Straight strip `[0, length] x [0, width]` with the source in the middle; returns the fitted
/// decay rate per unit length and the report.
pub fn strip_decay(width: f64, length: f64, spacing: f64) -> Result<(f64, DecayReport)> {
    let (rate, rep, _, _) = strip_decay_sample(width, length, spacing)?;
    Ok((rate, rep))
}

/// [`strip_decay`] together with the grid and the computed solution.
pub fn strip_decay_sample(width: f64, length: f64, spacing: f64) -> Result<(f64, DecayReport, GridRegion, GreenSample)> {
    let g = GridRegion::from_predicate(Point::new(-spacing, -spacing), Point::new(length + spacing, width + spacing), spacing, |x| {
        x.re > 0.0 && x.re < length && x.im > 0.0 && x.im < width
    })?;
    let center = [Point::new(0.0, width / 2.0), Point::new(length, width / 2.0)];
    let r = |_: Point| width;
    let src = g.nearest_node(Point::new(length / 2.0, width / 2.0));
    let rep = fit_c4_decay(&g, &center, false, &r, src)?;
    let s = solve_green_with(&g, src, 1e-13)?;
    Ok((-rep.slope / width, rep, g, s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C6Report {
    pub k1: f64,
    pub k2: f64,
    pub ratio: f64,
    /// `ratio > 25`.
    pub flagged: bool,
    pub nodes: usize,
}

/// Two-sided bound `K1 q <= -G <= K2 q`, `q = 1 + |ln(|x - y| / r(y))|`, over the nodes of an
/// elementary piece. The piece must lie inside the grid interior with a margin of `margin`
/// and have diameter at most `4 r(y)`.
pub fn verify_c6(g: &GridRegion, piece: &dyn Fn(Point) -> bool, r: &dyn Fn(Point) -> f64, source: Node, margin: f64) -> Result<C6Report> {
    let y = g.point(source);
    if !piece(y) {
        return Err(Error::InvalidRegion("source is not in the piece".into()));
    }
    let ry = r(y);
    let mut nodes = Vec::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            if piece(g.point((i, j))) {
                nodes.push((i, j));
            }
        }
    }
    let reach = (margin / g.spacing).ceil() as i64;
    for &(i, j) in &nodes {
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                let inside = a >= 0 && b >= 0 && g.is_interior((a as usize, b as usize));
                if (di * di + dj * dj) as f64 * g.spacing * g.spacing <= margin * margin && !inside {
                    return Err(Error::InvalidRegion(format!("piece node {:?} is within {margin} of the region boundary", (i, j))));
                }
            }
        }
    }
    let diam = nodes.iter().flat_map(|&a| nodes.iter().map(move |&b| (a, b))).map(|(a, b)| (g.point(a) - g.point(b)).norm()).fold(0.0, f64::max);
    if diam > 4.0 * ry {
        return Err(Error::InvalidRegion(format!("piece diameter {diam:.3} exceeds 4 r(y) = {:.3}", 4.0 * ry)));
    }
    let s = solve_green(g, source)?;
    let mut k1 = f64::INFINITY;
    let mut k2: f64 = 0.0;
    let mut count = 0;
    for &n in &nodes {
        let d = (g.point(n) - y).norm();
        if d == 0.0 {
            continue;
        }
        let q = 1.0 + (d / ry).ln().abs();
        let v = s.at(g, n) / q;
        k1 = k1.min(v);
        k2 = k2.max(v);
        count += 1;
    }
    if count == 0 {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let ratio = k2 / k1;
    Ok(C6Report { k1, k2, ratio, flagged: !(ratio <= 25.0), nodes: count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_grid(radius: f64, spacing: f64) -> GridRegion {
        let d = PlanarDomain::disk(Point::new(0.0, 0.0), radius, 1024).unwrap();
        GridRegion::from_domain(&d, spacing).unwrap()
    }

    #[test]
    fn disk_green_function() {
        let err = disk_benchmark(2.0 / 128.0).unwrap();
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn symmetric_and_nonnegative() {
        let g = disk_grid(1.0, 1.0 / 16.0);
        let a = g.nearest_node(Point::new(0.3, -0.2));
        let b = g.nearest_node(Point::new(-0.5, 0.4));
        let ga = solve_green(&g, a).unwrap();
        let gb = solve_green(&g, b).unwrap();
        assert!((ga.at(&g, b) - gb.at(&g, a)).abs() < 1e-10);
        assert!(ga.values.iter().all(|v| *v >= -1e-10));
        assert!(ga.residual < 1e-10);
    }

    #[test]
    fn void_or_exterior_source_rejected() {
        let g = GridRegion::from_predicate(Point::new(0.0, 0.0), Point::new(1.0, 1.0), 0.1, |_| false).unwrap();
        assert!(matches!(solve_green(&g, (5, 5)), Err(Error::InvalidRegion(_))));
    }

    #[test]
    fn grid_round_trip() {
        let g = disk_grid(1.0, 0.125);
        let mut buf = Vec::new();
        g.save(&mut buf).unwrap();
        assert_eq!(GridRegion::load(&buf[..]).unwrap(), g);
        let s = solve_green(&g, g.nearest_node(Point::new(0.0, 0.0))).unwrap();
        let mut buf = Vec::new();
        s.save(&g, &mut buf).unwrap();
        let (g2, v) = GreenSample::load_values(&buf[..]).unwrap();
        assert_eq!((g2.nx, g2.ny), (g.nx, g.ny));
        assert_eq!(v, s.values);
    }

    #[test]
    fn strip_decays_at_pi_over_width() {
        let (rate, rep) = strip_decay(0.25, 2.0, 0.25 / 48.0).unwrap();
        assert!(rep.passes(), "{rep:?}");
        let expected = PI / 0.25;
        assert!((rate - expected).abs() < 0.2 * expected, "{rate} vs {expected}");
    }

    #[test]
    fn c3_on_disk() {
        let g = disk_grid(1.0, 1.0 / 32.0);
        let rep = fit_c3(&g, &|_| 0.8, &[g.nearest_node(Point::new(0.0, 0.0))]).unwrap();
        // exact Green function gives C = ln(1/r)/(2 pi) at |x - y| -> 0
        assert!(rep.global > 0.0 && rep.global < 1.0, "{rep:?}");
    }

    #[test]
    fn c6_on_disk_piece() {
        let g = disk_grid(1.0, 1.0 / 64.0);
        let src = g.nearest_node(Point::new(0.0, 0.0));
        let rep = verify_c6(&g, &|x| x.norm() < 0.3, &|_| 0.5, src, 0.2).unwrap();
        assert!(!rep.flagged && rep.ratio <= 10.0, "{rep:?}");
        let bad = verify_c6(&g, &|x| x.norm() < 0.99, &|_| 0.5, src, 0.2);
        assert!(matches!(bad, Err(Error::InvalidRegion(_))));
    }

    #[test]
    fn green_increases_with_domain() {
        // both grids on the same node lattice
        let lo = Point::new(-1.125, -1.125);
        let hi = Point::new(1.125, 1.125);
        let dsmall = PlanarDomain::disk(Point::new(0.0, 0.0), 0.8, 1024).unwrap();
        let dbig = PlanarDomain::disk(Point::new(0.0, 0.0), 1.0, 1024).unwrap();
        let gs = GridRegion::from_predicate(lo, hi, 1.0 / 32.0, |x| dsmall.contains_with_margin(x, 1.0 / 128.0)).unwrap();
        let gb = GridRegion::from_predicate(lo, hi, 1.0 / 32.0, |x| dbig.contains_with_margin(x, 1.0 / 128.0)).unwrap();
        let src = gs.nearest_node(Point::new(0.1, 0.2));
        let vs = solve_green(&gs, src).unwrap();
        let vb = solve_green(&gb, src).unwrap();
        assert!(vs.values.iter().zip(&vb.values).all(|(a, b)| *b >= *a - 1e-8));
    }
}
