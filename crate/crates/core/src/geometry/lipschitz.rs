use super::domain::PlanarDomain;
use super::weight::BoundaryWeight;
use super::Point;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzFailure {
    pub arclength: f64,
    pub at: Point,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub samples: usize,
    /// Largest over sampled points of the best graph slope found.
    pub worst_slope: f64,
    pub worst_at: Option<Point>,
    pub failures: Vec<LipschitzFailure>,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Liang-Barsky clip of `a + t (b - a)` to `|x| < hx, |y| < hy`.
fn clip(a: Point, b: Point, hx: f64, hy: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-d.re, a.re + hx), (d.re, hx - a.re), (-d.im, a.im + hy), (d.im, hy - a.im)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t1 > t0).then_some((t0, t1))
}

/// Graph slope of the boundary inside the rotated rectangle, or why it is not a graph.
fn frame_slope(segments: &[(Point, Point)], r: f64, c0: f64) -> Result<f64, &'static str> {
    let (hx, hy) = (r, c0 * r);
    let tol = 1e-9 * r;
    let mut entries = 0;
    let mut exits = 0;
    let mut slope = 0.0f64;
    let mut any = false;
    for &(a, b) in segments {
        let Some((t0, t1)) = clip(a, b, hx, hy) else { continue };
        any = true;
        let (p, q) = (a + (b - a) * t0, a + (b - a) * t1);
        if t0 > 0.0 {
            entries += 1;
            if (p.re + hx).abs() > tol {
                return Err("boundary enters the rectangle away from its left side");
            }
        }
        if t1 < 1.0 {
            exits += 1;
            if (q.re - hx).abs() > tol {
                return Err("boundary leaves the rectangle away from its right side");
            }
        }
        let dx = q.re - p.re;
        if dx <= 0.0 {
            return Err("boundary is not increasing in the graph variable");
        }
        slope = slope.max((q.im - p.im).abs() / dx);
    }
    if !any || entries != 1 || exits != 1 {
        return Err("boundary inside the rectangle is not a single chain");
    }
    Ok(slope)
}

fn best_frame(dom: &PlanarDomain, x: Point, r: f64, c0: f64) -> Result<f64, &'static str> {
    let reach = r * (1.0 + c0 * c0).sqrt() * 1.01;
    let mut ks = Vec::new();
    dom.segment_index().for_each_near(x, reach, |k| ks.push(k));
    let eval = |beta: f64| {
        let rot = Point::from_polar(1.0, -beta);
        let segs: Vec<(Point, Point)> = ks
            .iter()
            .map(|&k| {
                let (a, b) = dom.segment(k);
                ((a - x) * rot, (b - x) * rot)
            })
            .collect();
        frame_slope(&segs, r, c0)
    };
    let mut best: Option<(f64, f64)> = None;
    let mut last_err = "no admissible frame";
    for deg in 0..360 {
        let beta = (deg as f64).to_radians();
        match eval(beta) {
            Ok(s) if best.is_none_or(|b| s < b.1) => best = Some((beta, s)),
            Ok(_) => {}
            Err(e) => last_err = e,
        }
    }
    let Some((b0, mut s0)) = best else { return Err(last_err) };
    for k in -10..=10 {
        if let Ok(s) = eval(b0 + (k as f64 * 0.1).to_radians()) {
            s0 = s0.min(s);
        }
    }
    Ok(s0)
}

/// Sampled check that the boundary is a Lipschitz graph of modulus at most `c0`
/// in a suitable rotated frame around each sample point.
pub fn verify_lipschitz_boundary(dom: &PlanarDomain, w: &BoundaryWeight, c0: f64) -> LipschitzReport {
    let mut s_list: Vec<f64> = (0..dom.len()).map(|k| dom.vertex_arclength(k)).collect();
    let mut s = 0.0;
    while s < dom.perimeter() && s_list.len() < 4000 {
        s_list.push(s);
        s += 0.5 * w.value_at(s);
    }
    s_list.sort_by(f64::total_cmp);
    s_list.dedup();
    let mut report = LipschitzReport { samples: s_list.len(), worst_slope: 0.0, worst_at: None, failures: Vec::new() };
    for &s in &s_list {
        let x = dom.point_at(s);
        match best_frame(dom, x, w.value_at(s), c0) {
            Ok(slope) => {
                if slope > report.worst_slope {
                    report.worst_slope = slope;
                    report.worst_at = Some(x);
                }
                if slope > c0 {
                    report.failures.push(LipschitzFailure { arclength: s, at: x, reason: format!("slope {slope:.4} exceeds {c0}") });
                }
            }
            Err(reason) => report.failures.push(LipschitzFailure { arclength: s, at: x, reason: reason.to_string() }),
        }
    }
    report
}
