use super::domain::{first_self_intersection, PlanarDomain};
use super::weight::{mollify_with, ExtendedWeight, SmoothedWeight};
use super::Point;
use crate::error::{Error, Result};
use crate::quad::BumpRule;
use rayon::prelude::*;

/// Root of `f` on `[a, b]` given `f(a) < 0 < f(b)`, by Illinois regula falsi.
pub(crate) fn bracketed_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        if (b - a).abs() <= tol {
            return c;
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Arclength stations with spacing `step(s)` plus every vertex, sorted.
pub(crate) fn stations<F: Fn(f64) -> f64>(dom: &PlanarDomain, step: F) -> Vec<f64> {
    let p = dom.perimeter();
    let mut out: Vec<f64> = (0..dom.len()).map(|k| dom.vertex_arclength(k)).collect();
    let mut s = 0.0;
    while s < p {
        out.push(s);
        s += step(s).max(1e-9 * p);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * p);
    out
}

/// Walks from boundary arclength `s` along the unit ray `dir` until `f`
/// changes sign from negative to positive, starting with step `t0`.
pub(crate) fn trace_ray<F: Fn(Point) -> f64>(dom: &PlanarDomain, s: f64, dir: Point, t0: f64, f: F) -> Result<Point> {
    let p = dom.point_at(s);
    let g = |t: f64| f(p + dir * t);
    let f0 = g(0.0);
    if f0 >= 0.0 {
        return Err(Error::DegenerateGeometry { arclength: s, reason: "level function not negative on the boundary".into() });
    }
    let (mut a, mut fa) = (0.0, f0);
    let mut t = 0.5 * t0;
    for _ in 0..40 {
        let ft = g(t);
        if ft > 0.0 {
            let root = bracketed_root(g, a, t, fa, ft, 1e-10 * t0);
            return Ok(p + dir * root);
        }
        a = t;
        fa = ft;
        t += 0.5 * t0;
    }
    Err(Error::DegenerateGeometry { arclength: s, reason: "no level crossing along the normal ray".into() })
}

/// Traces along smoothed normals and checks that the resulting closed polyline is simple.
pub(crate) fn trace_curve<F, D>(dom: &PlanarDomain, st: &[f64], inward: bool, dist: D, f: F) -> Result<Vec<Point>>
where
    F: Fn(Point) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    let sign = if inward { 1.0 } else { -1.0 };
    let pts: Vec<Result<Point>> = st
        .par_iter()
        .map(|&s| {
            let d = dist(s);
            let dir = dom.smoothed_inward_normal(s, 4.0 * d) * sign;
            trace_ray(dom, s, dir, d, &f)
        })
        .collect();
    let mut out: Vec<Point> = pts.into_iter().collect::<Result<_>>()?;
    out.dedup_by(|a, b| (*a - *b).norm() < 1e-14);
    if let Some((i, _)) = first_self_intersection(&out) {
        let s = st[i.min(st.len() - 1)];
        return Err(Error::DegenerateGeometry { arclength: s, reason: "trace curve self-intersects".into() });
    }
    Ok(out)
}

/// The band `{ |g_eps| < c eps r }` around the boundary, with polygonal traces
/// of its inner and outer boundary curves.
#[derive(Debug, Clone)]
pub struct ThinNeighborhood {
    parent: PlanarDomain,
    weight: SmoothedWeight,
    eps: f64,
    cwidth: f64,
    stations: Vec<f64>,
    inner: Vec<Point>,
    outer: Vec<Point>,
}

pub const DEFAULT_EPS: f64 = 0.1;
pub const DEFAULT_CWIDTH: f64 = 2.0;

pub fn build_thin_neighborhood(dom: &PlanarDomain, rw: &SmoothedWeight, eps: f64, cwidth: f64) -> Result<ThinNeighborhood> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::Parameter(format!("eps = {eps} not in (0, 0.25]")));
    }
    if !(cwidth >= 1.0 && cwidth.is_finite()) {
        return Err(Error::Parameter(format!("cwidth = {cwidth} must be >= 1")));
    }
    let half_width = |x: Point| cwidth * eps * rw.eval(x);
    let rule = BumpRule::standard();
    let level = |x: Point, sign: f64| {
        let rt = rw.eval(x);
        sign * mollify_with(dom, rule, eps * rt, x) - cwidth * eps * rt
    };
    let st = stations(dom, |s| 0.5 * half_width(dom.point_at(s)));
    let dist = |s: f64| half_width(dom.point_at(s));
    let inner = trace_curve(dom, &st, true, dist, |x| level(x, 1.0))?;
    let outer = trace_curve(dom, &st, false, dist, |x| level(x, -1.0))?;
    let tn = ThinNeighborhood { parent: dom.clone(), weight: rw.clone(), eps, cwidth, stations: st, inner, outer };
    if tn.inner.len() == tn.outer.len() {
        for (i, &s) in tn.stations.iter().enumerate() {
            let nominal = 2.0 * dist(s);
            let w = (tn.outer[i] - tn.inner[i]).norm();
            if !(w >= 0.5 * nominal && w <= 2.0 * nominal) {
                return Err(Error::DegenerateGeometry {
                    arclength: s,
                    reason: format!("local width {w:.3e} not within a factor 2 of {nominal:.3e}"),
                });
            }
        }
    }
    PlanarDomain::polygon(tn.inner.clone())
        .map_err(|e| Error::DegenerateGeometry { arclength: 0.0, reason: format!("inner trace: {e}") })?;
    Ok(tn)
}

impl ThinNeighborhood {
    pub fn parent(&self) -> &PlanarDomain {
        &self.parent
    }

    pub fn weight(&self) -> &SmoothedWeight {
        &self.weight
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cwidth(&self) -> f64 {
        self.cwidth
    }

    /// Boundary arclengths at which the traces were sampled.
    pub fn stations(&self) -> &[f64] {
        &self.stations
    }

    /// Trace of `g_eps = c eps r` (inside the parent domain).
    pub fn inner_trace(&self) -> &[Point] {
        &self.inner
    }

    /// Trace of `g_eps = -c eps r` (outside the parent domain).
    pub fn outer_trace(&self) -> &[Point] {
        &self.outer
    }

    pub fn contains(&self, x: Point) -> bool {
        let rt = self.weight.eval(x);
        let g = mollify_with(&self.parent, BumpRule::standard(), self.eps * rt, x);
        g.abs() < self.cwidth * self.eps * rt
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.outer) - polygon_area(&self.inner)
    }
}

pub(crate) fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|k| v[k].re * v[(k + 1) % n].im - v[k].im * v[(k + 1) % n].re).sum::<f64>() * 0.5
}

/// The union of disks `D(x, alpha r(x))` over boundary points `x`, represented
/// by polygonal traces of its two boundary curves.
#[derive(Debug, Clone)]
pub struct BoundaryBand {
    alpha: f64,
    inner: Vec<Point>,
    outer: Vec<Point>,
}

impl BoundaryBand {
    pub fn new(dom: &PlanarDomain, ext: &ExtendedWeight, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("band factor {alpha} must be positive")));
        }
        let r = |s: f64| alpha * ext.eval(dom.point_at(s));
        let st = stations(dom, |s| 0.25 * r(s));
        let f = |x: Point| ext.disk_union_defect(x, alpha);
        let inner = trace_curve(dom, &st, true, r, f)?;
        let outer = trace_curve(dom, &st, false, r, f)?;
        Ok(BoundaryBand { alpha, inner, outer })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn inner_domain(&self) -> Result<PlanarDomain> {
        PlanarDomain::polygon(self.inner.clone())
    }

    pub fn outer_domain(&self) -> Result<PlanarDomain> {
        PlanarDomain::polygon(self.outer.clone())
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.outer) - polygon_area(&self.inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::weight::{smooth_weight, BoundaryWeight};

    #[test]
    fn regula_falsi_finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = bracketed_root(f, 0.0, 2.0, f(0.0), f(2.0), 1e-14);
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn disk_thin_neighborhood_is_annulus() {
        let dom = PlanarDomain::disk(Point::new(0.0, 0.0), 1.0, 256).unwrap();
        let w = BoundaryWeight::constant(&dom, 0.2).unwrap();
        let rw = smooth_weight(&w, &dom).unwrap();
        let tn = build_thin_neighborhood(&dom, &rw, 0.1, 2.0).unwrap();
        let half = 2.0 * 0.1 * rw.eval(Point::new(1.0, 0.0));
        for p in tn.inner_trace() {
            assert!((1.0 - p.norm() - half).abs() < 0.2 * half, "{}", p.norm());
        }
        for p in tn.outer_trace() {
            assert!((p.norm() - 1.0 - half).abs() < 0.2 * half, "{}", p.norm());
        }
        assert!(tn.contains(Point::new(1.0, 0.0)));
        assert!(!tn.contains(Point::new(0.5, 0.0)));
    }

    #[test]
    fn square_band_of_disks() {
        let dom = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let w = BoundaryWeight::constant(&dom, 0.2).unwrap();
        let ext = ExtendedWeight::new(&w, &dom).unwrap();
        let band = BoundaryBand::new(&dom, &ext, 1.0).unwrap();
        // inner square of side 1.6, outer rounded square offset 0.2
        let exact = (4.0 + 4.0 * 2.0 * 0.2 + std::f64::consts::PI * 0.04) - 1.6 * 1.6;
        assert!((band.area() - exact).abs() < 2e-3, "{} {}", band.area(), exact);
    }
}
