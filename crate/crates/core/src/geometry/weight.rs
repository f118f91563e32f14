use super::domain::{dot, PlanarDomain};
use super::index::{Segment, SegmentIndex};
use super::Point;
use crate::error::{Error, Result};
use crate::quad::BumpRule;

/// Boundary weight `r > 0` on the boundary, sampled at arclength positions and
/// interpolated linearly (periodically) in arclength.
#[derive(Debug, Clone)]
pub struct BoundaryWeight {
    samples: Vec<(f64, f64)>,
    perimeter: f64,
}

impl BoundaryWeight {
    pub fn new(dom: &PlanarDomain, mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidWeight("no samples".into()));
        }
        let p = dom.perimeter();
        for &(s, r) in &samples {
            if !s.is_finite() || !r.is_finite() {
                return Err(Error::InvalidWeight("non-finite sample".into()));
            }
            if r <= 0.0 {
                return Err(Error::InvalidWeight(format!("value {r} at arclength {s} is not positive")));
            }
            if !(0.0..=p).contains(&s) {
                return Err(Error::InvalidWeight(format!("arclength {s} outside [0, {p}]")));
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.last().map(|x| x.0) == Some(p) && samples.len() > 1 {
            samples.pop();
        }
        samples.dedup_by(|a, b| a.0 == b.0);
        let w = BoundaryWeight { samples, perimeter: p };
        if let Some((i, j)) = w.lipschitz_violation(dom) {
            let (a, b) = (w.samples[i], w.samples[j]);
            return Err(Error::InvalidWeight(format!(
                "Lipschitz modulus exceeds 1/2 between arclength {} (r = {}) and {} (r = {})",
                a.0, a.1, b.0, b.1
            )));
        }
        Ok(w)
    }

    /// `r = r0` sampled at every vertex.
    pub fn constant(dom: &PlanarDomain, r0: f64) -> Result<Self> {
        let samples = (0..dom.len()).map(|k| (dom.vertex_arclength(k), r0)).collect();
        Self::new(dom, samples)
    }

    /// Samples `f` at every vertex and at `n` evenly spaced arclengths.
    pub fn from_fn<F: Fn(Point) -> f64>(dom: &PlanarDomain, f: F, n: usize) -> Result<Self> {
        let mut s: Vec<f64> = (0..dom.len()).map(|k| dom.vertex_arclength(k)).collect();
        s.extend((0..n).map(|k| dom.perimeter() * k as f64 / n as f64));
        let samples = s.into_iter().map(|s| (s, f(dom.point_at(s)))).collect();
        Self::new(dom, samples)
    }

    /// First sample pair `(i, j)` with `|r_i - r_j| > |x_i - x_j| / 2`.
    pub fn lipschitz_violation(&self, dom: &PlanarDomain) -> Option<(usize, usize)> {
        let pts: Vec<Point> = self.samples.iter().map(|s| dom.point_at(s.0)).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let bound = 0.5 * (pts[i] - pts[j]).norm();
                if (self.samples[i].1 - self.samples[j].1).abs() > bound * (1.0 + 1e-12) + 1e-15 {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn max_value(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Value at arclength `s` (wrapped into [0, perimeter)).
    pub fn value_at(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.perimeter);
        let n = self.samples.len();
        if n == 1 {
            return self.samples[0].1;
        }
        let k = self.samples.partition_point(|x| x.0 <= s);
        let (lo, hi) = if k == 0 {
            let (s0, r0) = self.samples[n - 1];
            ((s0 - self.perimeter, r0), self.samples[0])
        } else if k == n {
            let (s1, r1) = self.samples[0];
            (self.samples[n - 1], (s1 + self.perimeter, r1))
        } else {
            (self.samples[k - 1], self.samples[k])
        };
        if hi.0 == lo.0 {
            return lo.1;
        }
        lo.1 + (hi.1 - lo.1) * (s - lo.0) / (hi.0 - lo.0)
    }
}

/// Minimizes `a + b u + k sqrt((u - u0)^2 + q^2)` over `u` in `[0, len]`.
/// The function is convex, so the clamped critical point is the minimizer.
pub(crate) fn minimize_cone(a: f64, b: f64, k: f64, u0: f64, q: f64, len: f64) -> f64 {
    let f = |u: f64| a + b * u + k * (u - u0).hypot(q);
    if b.abs() >= k {
        return f(0.0).min(f(len));
    }
    let u = (u0 - b * q / (k * k - b * b).sqrt()).clamp(0.0, len);
    f(u).min(f(0.0)).min(f(len))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightPiece {
    start: Point,
    dir: Point,
    len: f64,
    r0: f64,
    slope: f64,
}

impl WeightPiece {
    /// Local coordinates of `x`: projection `u0` along the piece and distance `q` to its line.
    fn frame(&self, x: Point) -> (f64, f64) {
        let d = x - self.start;
        let u0 = dot(d, self.dir);
        let q = (d.re * self.dir.im - d.im * self.dir.re).abs();
        (u0, q)
    }

    fn r_min(&self) -> f64 {
        self.r0.min(self.r0 + self.slope * self.len)
    }
}

/// The inf-convolution extension `r(x) = inf_y (r(y) + |x - y| / 2)` of a
/// boundary weight, evaluated exactly on the piecewise-linear boundary data.
#[derive(Debug, Clone)]
pub struct ExtendedWeight {
    pieces: Vec<WeightPiece>,
    index: SegmentIndex,
    global_min: f64,
}

impl ExtendedWeight {
    pub fn new(w: &BoundaryWeight, dom: &PlanarDomain) -> Result<Self> {
        if dom.is_empty() {
            return Err(Error::InvalidDomain("empty boundary".into()));
        }
        if (w.perimeter() - dom.perimeter()).abs() > 1e-9 * dom.perimeter() {
            return Err(Error::InvalidWeight("weight was built for a different boundary".into()));
        }
        let mut breaks: Vec<f64> = (0..dom.len()).map(|k| dom.vertex_arclength(k)).collect();
        breaks.extend(w.samples().iter().map(|s| s.0));
        breaks.push(dom.perimeter());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * dom.perimeter());
        let mut pieces = Vec::new();
        for win in breaks.windows(2) {
            let (s0, s1) = (win[0], win[1]);
            if s1 - s0 <= 0.0 {
                continue;
            }
            let mid = 0.5 * (s0 + s1);
            let dir = dom.tangent_at(mid);
            let start = dom.point_at(s0);
            let len = s1 - s0;
            let r0 = w.value_at(s0);
            let r1 = w.value_at(s1);
            let slope = (r1 - r0) / len;
            pieces.push(WeightPiece { start, dir, len, r0, slope });
        }
        let segs = pieces.iter().map(|p| Segment { a: p.start, b: p.start + p.dir * p.len }).collect();
        let global_min = pieces.iter().map(|p| p.r_min()).fold(f64::INFINITY, f64::min);
        Ok(ExtendedWeight { pieces, index: SegmentIndex::new(segs), global_min })
    }

    fn piece_value(&self, k: usize, x: Point) -> f64 {
        let p = &self.pieces[k];
        let (u0, q) = p.frame(x);
        minimize_cone(p.r0, p.slope, 0.5, u0, q, p.len)
    }

    pub fn eval(&self, x: Point) -> f64 {
        let (k0, _, d0) = self.index.nearest(x);
        let mut best = self.piece_value(k0, x);
        // any piece farther than 2 (best - min r) cannot beat `best`
        let radius = 2.0 * (best - self.global_min) + 1e-12 * (1.0 + d0);
        self.index.for_each_near(x, radius, |k| {
            let v = self.piece_value(k, x);
            if v < best {
                best = v;
            }
        });
        best
    }

    /// `min_y (|x - y| - alpha r(y))` over the boundary; negative exactly on
    /// the union of disks `D(y, alpha r(y))`.
    pub fn disk_union_defect(&self, x: Point, alpha: f64) -> f64 {
        let mut best = f64::INFINITY;
        let (_, _, d0) = self.index.nearest(x);
        let r_max = self.pieces.iter().map(|p| p.r0.max(p.r0 + p.slope * p.len)).fold(0.0, f64::max);
        let radius = d0 + alpha * (r_max - self.global_min) + 1e-12;
        self.index.for_each_near(x, radius, |k| {
            let p = &self.pieces[k];
            let (u0, q) = p.frame(x);
            let v = minimize_cone(-alpha * p.r0, -alpha * p.slope, 1.0, u0, q, p.len);
            if v < best {
                best = v;
            }
        });
        best
    }

    pub fn min_value(&self) -> f64 {
        self.global_min
    }
}

/// Extended weight at a single point.
pub fn extend_weight(w: &BoundaryWeight, dom: &PlanarDomain, x: Point) -> Result<f64> {
    Ok(ExtendedWeight::new(w, dom)?.eval(x))
}

/// Smooth comparison weight built by one variable-radius mollification pass
/// of the extended weight, rescaled so that `r_s <= r` and `|grad r_s| <= 1/2`.
///
/// With mollifier radius `kappa r(x)` and the rescaling `1 / (1 + kappa/2)`,
/// `r / C <= r_s <= r` holds with `C = (1 + kappa/2) / (1 - kappa m1 / 2)` where
/// `m1` is the mean radius of the mollifier.
#[derive(Debug, Clone)]
pub struct SmoothedWeight {
    ext: ExtendedWeight,
    kappa: f64,
    rescale: f64,
    rule: &'static BumpRule,
}

pub const DEFAULT_SMOOTHING_KAPPA: f64 = 0.25;

impl SmoothedWeight {
    pub fn new(ext: ExtendedWeight, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Parameter(format!("smoothing radius factor {kappa} not in (0, 1)")));
        }
        Ok(SmoothedWeight { ext, kappa, rescale: 1.0 / (1.0 + 0.5 * kappa), rule: BumpRule::standard() })
    }

    pub fn extended(&self) -> &ExtendedWeight {
        &self.ext
    }

    /// Unscaled mollification `(r * chi_{kappa r(x)})(x)`.
    pub fn mollified(&self, x: Point) -> f64 {
        let delta = self.kappa * self.ext.eval(x);
        self.rule.apply(x, delta, |y| self.ext.eval(y))
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.rescale * self.mollified(x)
    }

    /// Factor applied after mollification; affine weights come out as `rescale * r`.
    pub fn rescale(&self) -> f64 {
        self.rescale
    }

    pub fn comparison_constant(&self) -> f64 {
        (1.0 + 0.5 * self.kappa) / (1.0 - 0.5 * self.kappa * self.rule.mean_radius)
    }

    fn fd_step(&self, x: Point) -> f64 {
        1e-6 * self.ext.eval(x).max(1e-12)
    }

    pub fn gradient(&self, x: Point) -> Point {
        let h = self.fd_step(x);
        let gx = (self.eval(x + Point::new(h, 0.0)) - self.eval(x - Point::new(h, 0.0))) / (2.0 * h);
        let gy = (self.eval(x + Point::new(0.0, h)) - self.eval(x - Point::new(0.0, h))) / (2.0 * h);
        Point::new(gx, gy)
    }

    /// Second derivatives `(r_xx, r_xy, r_yy)` by central differences at scale `1e-3 r`.
    pub fn hessian(&self, x: Point) -> (f64, f64, f64) {
        let h = 1e-3 * self.ext.eval(x).max(1e-12);
        let ex = Point::new(h, 0.0);
        let ey = Point::new(0.0, h);
        let f0 = self.eval(x);
        let fxx = (self.eval(x + ex) - 2.0 * f0 + self.eval(x - ex)) / (h * h);
        let fyy = (self.eval(x + ey) - 2.0 * f0 + self.eval(x - ey)) / (h * h);
        let fxy = (self.eval(x + ex + ey) - self.eval(x + ex - ey) - self.eval(x - ex + ey) + self.eval(x - ex - ey))
            / (4.0 * h * h);
        (fxx, fxy, fyy)
    }
}

pub fn smooth_weight(w: &BoundaryWeight, dom: &PlanarDomain) -> Result<SmoothedWeight> {
    SmoothedWeight::new(ExtendedWeight::new(w, dom)?, DEFAULT_SMOOTHING_KAPPA)
}

/// Bound `K` in `|g_eps - g| <= K eps r`: the signed distance is 1-Lipschitz,
/// so the mean mollifier radius works.
pub fn mollification_constant() -> f64 {
    BumpRule::finest().mean_radius
}

pub(crate) fn mollify_with(dom: &PlanarDomain, rule: &BumpRule, scale: f64, x: Point) -> f64 {
    rule.apply(x, scale, |y| dom.signed_distance(y))
}

/// Mollified signed distance `g_eps(x)` at scale `eps r(x)`.
pub fn mollify_distance(dom: &PlanarDomain, rw: &SmoothedWeight, eps: f64, x: Point) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::Parameter(format!("eps = {eps} not in (0, 0.25]")));
    }
    let scale = eps * rw.eval(x);
    let coarse = mollify_with(dom, BumpRule::standard(), scale, x);
    let fine = mollify_with(dom, BumpRule::fine(), scale, x);
    if (coarse - fine).abs() <= 1e-6 * fine.abs().max(scale) {
        return Ok(fine);
    }
    Ok(mollify_with(dom, BumpRule::finest(), scale, x))
}
