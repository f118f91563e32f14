use super::ExponentialSum;
use crate::error::{Error, Result};
use crate::geometry::{PlanarDomain, Point};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// A tie curve `{psi_j = psi_k = Psi}` with the line density `|phi_j' - phi_k'|` at each vertex.
#[derive(Debug, Clone, Serialize)]
pub struct StokesCurve {
    pub pair: (usize, usize),
    pub points: Vec<Point>,
    pub densities: Vec<f64>,
}

impl StokesCurve {
    /// Trapezoidal line mass of the curve.
    pub fn mass(&self) -> f64 {
        self.points
            .windows(2)
            .zip(self.densities.windows(2))
            .map(|(p, d)| 0.5 * (d[0] + d[1]) * (p[1] - p[0]).norm())
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StokesOptions {
    /// Gap between the two leading `psi` and the third below which a boundary
    /// tie counts as a triple tie, relative to `max(1, |Psi|)`.
    pub triple_tol: f64,
    /// Minimum tangential derivative of `psi_j - psi_k` at a boundary tie.
    pub tangency_tol: f64,
    /// Extra subdivision levels for cells whose corners see three or more leaders.
    pub refine_levels: u32,
}

impl Default for StokesOptions {
    fn default() -> Self {
        StokesOptions { triple_tol: 1e-8, tangency_tol: 1e-8, refine_levels: 6 }
    }
}

fn argmax(psi: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..psi.len() {
        if psi[j] > psi[best] {
            best = j;
        }
    }
    best
}

/// Index of the leader and the runner-up.
fn top_two(psi: &[f64]) -> (usize, usize) {
    let a = argmax(psi);
    let mut b = usize::MAX;
    for j in 0..psi.len() {
        if j != a && (b == usize::MAX || psi[j] > psi[b]) {
            b = j;
        }
    }
    (a, b)
}

fn diff(s: &ExponentialSum, j: usize, k: usize, z: Point) -> f64 {
    s.phases[j].eval(z).re - s.phases[k].eval(z).re
}

/// Checks that along the region boundary at most two phases lead and that the
/// tie curves cross the boundary transversally.
fn check_boundary(s: &ExponentialSum, region: &PlanarDomain, resolution: f64, opts: &StokesOptions) -> Result<()> {
    let n = region.len();
    for k in 0..n {
        let (a, b) = region.segment(k);
        let len = (b - a).norm();
        let tangent = (b - a) / len;
        let steps = ((len / (0.25 * resolution)).ceil() as usize).max(1);
        let at = |i: usize| a + (b - a) * (i as f64 / steps as f64);
        let mut prev = s.psi(at(0));
        for i in 1..=steps {
            let p = at(i);
            let cur = s.psi(p);
            let (j0, _) = top_two(&prev);
            let (j1, _) = top_two(&cur);
            if j0 != j1 {
                // leader changes inside this step; bisect the tie of the two leaders
                let (mut lo, mut hi) = ((i - 1) as f64 / steps as f64, i as f64 / steps as f64);
                let f = |t: f64| diff(s, j0, j1, a + (b - a) * t);
                let flo = f(lo);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if (f(mid) > 0.0) == (flo > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let z = a + (b - a) * (0.5 * (lo + hi));
                let psi = s.psi(z);
                let mut sorted = psi.clone();
                sorted.sort_by(|x, y| y.total_cmp(x));
                let scale = sorted[0].abs().max(1.0);
                if sorted.len() >= 3 && sorted[0] - sorted[2] <= opts.triple_tol * scale {
                    return Err(Error::TripleTie { at: z });
                }
                let (t1, t2) = top_two(&psi);
                let dj = s.phases[t1].eval_with_derivative(z).1 - s.phases[t2].eval_with_derivative(z).1;
                let slope = (dj * tangent).re.abs();
                if slope < opts.tangency_tol * dj.norm().max(1.0) {
                    return Err(Error::Tangency { at: z, slope });
                }
            } else {
                // an exact sustained tie along the edge is tangential by definition
                let (l, r2) = top_two(&cur);
                if r2 != usize::MAX && cur[l] - cur[r2] <= opts.triple_tol * cur[l].abs().max(1.0) {
                    let d = s.phases[l].eval_with_derivative(p).1 - s.phases[r2].eval_with_derivative(p).1;
                    if (d * tangent).re.abs() < opts.tangency_tol * d.norm().max(1.0) {
                        return Err(Error::Tangency { at: p, slope: (d * tangent).re.abs() });
                    }
                }
            }
            prev = cur;
        }
    }
    Ok(())
}

type Seg = (usize, usize, Point, Point);

fn interp(p: Point, q: Point, dp: f64, dq: f64) -> Point {
    if dp == dq {
        return (p + q) * 0.5;
    }
    p + (q - p) * (dp / (dp - dq))
}

/// Marching-squares segments of `psi_j - psi_k = 0` in the cell with corners
/// `c[0..4]` (counter-clockwise from lower left).
fn cell_segments(s: &ExponentialSum, j: usize, k: usize, c: [Point; 4], out: &mut Vec<Seg>) {
    let d: Vec<f64> = c.iter().map(|&p| diff(s, j, k, p)).collect();
    let pos: Vec<bool> = d.iter().map(|&v| v >= 0.0).collect();
    let mut cross = Vec::with_capacity(4);
    for e in 0..4 {
        let f = (e + 1) % 4;
        if pos[e] != pos[f] {
            // canonical orientation so shared edges interpolate identically
            let (a, b, da, db) = if (c[e].re, c[e].im) < (c[f].re, c[f].im) {
                (c[e], c[f], d[e], d[f])
            } else {
                (c[f], c[e], d[f], d[e])
            };
            cross.push(interp(a, b, da, db));
        }
    }
    let (a, b) = if j < k { (j, k) } else { (k, j) };
    match cross.len() {
        2 => out.push((a, b, cross[0], cross[1])),
        4 => {
            let center = (c[0] + c[2]) * 0.5;
            let dc = diff(s, j, k, center) >= 0.0;
            if dc == pos[0] {
                out.push((a, b, cross[0], cross[3]));
                out.push((a, b, cross[1], cross[2]));
            } else {
                out.push((a, b, cross[0], cross[1]));
                out.push((a, b, cross[2], cross[3]));
            }
        }
        _ => {}
    }
}

fn process_cell(s: &ExponentialSum, c: [Point; 4], depth: u32, out: &mut Vec<Seg>) {
    let leaders: Vec<usize> = c.iter().map(|&p| argmax(&s.psi(p))).collect();
    let mut set = leaders.clone();
    set.sort_unstable();
    set.dedup();
    match set.len() {
        1 => {}
        2 => cell_segments(s, set[0], set[1], c, out),
        _ if depth > 0 => {
            let m = (c[0] + c[2]) * 0.5;
            let e = [(c[0] + c[1]) * 0.5, (c[1] + c[2]) * 0.5, (c[2] + c[3]) * 0.5, (c[3] + c[0]) * 0.5];
            process_cell(s, [c[0], e[0], m, e[3]], depth - 1, out);
            process_cell(s, [e[0], c[1], e[1], m], depth - 1, out);
            process_cell(s, [m, e[1], c[2], e[2]], depth - 1, out);
            process_cell(s, [e[3], m, e[2], c[3]], depth - 1, out);
        }
        // unresolved multi-leader cell at full depth; its share of curve length is negligible
        _ => {}
    }
}

fn key(p: Point, q: f64) -> (i64, i64) {
    ((p.re / q).round() as i64, (p.im / q).round() as i64)
}

/// Joins segments sharing endpoints into polylines.
fn chain(segs: Vec<(Point, Point)>, quantum: f64) -> Vec<Vec<Point>> {
    let mut adj: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segs.iter().enumerate() {
        adj.entry(key(*a, quantum)).or_default().push(i);
        adj.entry(key(*b, quantum)).or_default().push(i);
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    let other = |i: usize, p: Point| if key(segs[i].0, quantum) == key(p, quantum) { segs[i].1 } else { segs[i].0 };
    let next_from = |p: Point, used: &[bool]| adj[&key(p, quantum)].iter().copied().find(|&i| !used[i]);
    // start at free ends first so open curves come out whole
    let mut starts: Vec<usize> = (0..segs.len()).filter(|&i| adj[&key(segs[i].0, quantum)].len() == 1).collect();
    starts.extend(0..segs.len());
    for i0 in starts {
        if used[i0] {
            continue;
        }
        used[i0] = true;
        let mut line = vec![segs[i0].0, segs[i0].1];
        let mut tip = segs[i0].1;
        while let Some(i) = next_from(tip, &used) {
            used[i] = true;
            tip = other(i, tip);
            line.push(tip);
        }
        let mut tail = segs[i0].0;
        let mut front = Vec::new();
        while let Some(i) = next_from(tail, &used) {
            used[i] = true;
            tail = other(i, tail);
            front.push(tail);
        }
        front.reverse();
        front.extend(line);
        lines.push(front);
    }
    lines
}

/// Tie curves of `Psi` inside `region`, traced on a grid of the given resolution.
pub fn stokes_curves(s: &ExponentialSum, region: &PlanarDomain, resolution: f64) -> Result<Vec<StokesCurve>> {
    stokes_curves_with(s, region, resolution, &StokesOptions::default())
}

pub fn stokes_curves_with(
    s: &ExponentialSum,
    region: &PlanarDomain,
    resolution: f64,
    opts: &StokesOptions,
) -> Result<Vec<StokesCurve>> {
    if !(resolution > 0.0) {
        return Err(Error::Parameter(format!("resolution {resolution} must be positive")));
    }
    check_boundary(s, region, resolution, opts)?;
    let (lo, hi) = region.bounding_box();
    let nx = ((hi.re - lo.re) / resolution).ceil().max(1.0) as usize;
    let ny = ((hi.im - lo.im) / resolution).ceil().max(1.0) as usize;
    let dx = (hi.re - lo.re) / nx as f64;
    let dy = (hi.im - lo.im) / ny as f64;
    let node = |i: usize, j: usize| Point::new(lo.re + i as f64 * dx, lo.im + j as f64 * dy);
    let rows: Vec<Vec<Seg>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let mut out = Vec::new();
            for i in 0..nx {
                let c = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)];
                process_cell(s, c, opts.refine_levels, &mut out);
            }
            out
        })
        .collect();
    let mut by_pair: std::collections::BTreeMap<(usize, usize), Vec<(Point, Point)>> = Default::default();
    for (a, b, p, q) in rows.into_iter().flatten() {
        for piece in region.clip_segment(p, q) {
            by_pair.entry((a, b)).or_default().push(piece);
        }
    }
    let quantum = 1e-9 * resolution;
    let mut curves = Vec::new();
    for ((j, k), segs) in by_pair {
        for points in chain(segs, quantum) {
            let densities = points
                .iter()
                .map(|&z| (s.phases[j].eval_with_derivative(z).1 - s.phases[k].eval_with_derivative(z).1).norm())
                .collect();
            curves.push(StokesCurve { pair: (j, k), points, densities });
        }
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holofunc::Polynomial;
    use num_complex::Complex64;

    fn lin(a: f64, b: f64) -> Polynomial {
        Polynomial::linear(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    #[test]
    fn cosh_family_has_one_vertical_curve() {
        let s = ExponentialSum::cosh_family();
        let sq = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let curves = stokes_curves(&s, &sq, 0.05).unwrap();
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.points.iter().all(|p| p.re.abs() < 1e-12));
        assert!(c.densities.iter().all(|&d| (d - 2.0).abs() < 1e-14));
        assert!((c.mass() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn offset_leaders_give_two_curves() {
        // z, -z, 2z - 1: -z leads for x < 0, z on (0, 1), 2z - 1 for x > 1
        let s = ExponentialSum::new(vec![lin(1.0, 0.0), lin(-1.0, 0.0), lin(2.0, -1.0)]).unwrap();
        let sq = PlanarDomain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap();
        let mut curves = stokes_curves(&s, &sq, 0.07).unwrap();
        curves.sort_by_key(|c| c.pair);
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].pair, (0, 1));
        assert!((curves[0].mass() - 2.0 * 4.0).abs() < 1e-9);
        assert_eq!(curves[1].pair, (0, 2));
        assert!(curves[1].points.iter().all(|p| (p.re - 1.0).abs() < 1e-9));
        assert!((curves[1].mass() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn triple_tie_on_boundary_is_rejected() {
        let s = ExponentialSum::new(vec![lin(1.0, 0.0), lin(-1.0, 0.0), lin(0.0, 0.0)]).unwrap();
        let sq = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(matches!(stokes_curves(&s, &sq, 0.05), Err(Error::TripleTie { .. })));
    }

    #[test]
    fn tangential_tie_is_rejected() {
        // the tie line Re z = 0 runs along the left edge of [0, 1]^2
        let s = ExponentialSum::cosh_family();
        let sq = PlanarDomain::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(stokes_curves(&s, &sq, 0.05), Err(Error::Tangency { .. })));
    }
}
