use super::domain::PlanarDomain;
use super::weight::SmoothedWeight;
use super::Point;
use crate::error::{Error, Result};
use serde::Serialize;

/// Cyclic net of boundary points with consecutive gaps in `[r/4, r/2]`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryNet {
    pub points: Vec<Point>,
    pub arclengths: Vec<f64>,
    /// Weight `r` at each point.
    pub radii: Vec<f64>,
}

impl BoundaryNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index `j` of the first gap `|z_{j+1} - z_j|` outside `[r_j/4, r_j/2]`.
    pub fn spacing_violation(&self) -> Option<usize> {
        first_bad_gap(&self.points, &self.radii)
    }
}

fn first_bad_gap(points: &[Point], radii: &[f64]) -> Option<usize> {
    let n = points.len();
    (0..n).find(|&j| {
        let gap = (points[(j + 1) % n] - points[j]).norm();
        !(gap >= 0.25 * radii[j] && gap <= 0.5 * radii[j])
    })
}

/// Smallest arclength `t > s` at which the chord from `point_at(s)` reaches `chord`.
fn advance(dom: &PlanarDomain, s: f64, chord: f64) -> f64 {
    let p = dom.point_at(s);
    let step = chord / 16.0;
    let mut lo = s;
    let mut hi = s + step;
    while (dom.point_at(hi) - p).norm() < chord {
        lo = hi;
        hi += step;
        if hi - s > dom.perimeter() {
            return f64::INFINITY;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (dom.point_at(mid) - p).norm() < chord {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn distribute_boundary_points(dom: &PlanarDomain, rw: &SmoothedWeight) -> Result<BoundaryNet> {
    let per = dom.perimeter();
    let r_at = |s: f64| rw.eval(dom.point_at(s));
    let r_max = (0..dom.len())
        .map(|k| dom.vertex_arclength(k))
        .chain((0..64).map(|k| per * k as f64 / 64.0))
        .map(r_at)
        .fold(0.0, f64::max);
    if per < 2.0 * r_max {
        return Err(Error::GeometryTooCoarse(format!("perimeter {per:.4} is below twice the weight {r_max:.4}")));
    }
    let p0 = dom.point_at(0.0);
    let mut s_list = vec![0.0];
    loop {
        let s = *s_list.last().unwrap();
        let r = r_at(s);
        let next = advance(dom, s, r / 3.0);
        // stop once the next step would pass or crowd the starting point
        if next >= per || (dom.point_at(next) - p0).norm() < r / 3.0 && next > 0.5 * per {
            break;
        }
        s_list.push(next);
    }
    let build = |s: &[f64]| {
        let points: Vec<Point> = s.iter().map(|&s| dom.point_at(s)).collect();
        let radii: Vec<f64> = s.iter().map(|&s| r_at(s)).collect();
        (points, radii)
    };
    let (points, radii) = build(&s_list);
    if first_bad_gap(&points, &radii).is_none() {
        return Ok(BoundaryNet { points, arclengths: s_list, radii });
    }
    // redistribute the tail uniformly in arclength, trying nearby point counts
    let n = s_list.len();
    let m = n.div_ceil(10).max(1);
    for tail in [m, m.saturating_sub(1), m + 1, m + 2].into_iter().filter(|&t| t >= 1 && t < n) {
        for keep_delta in [0isize, -1, 1] {
            let keep = n - tail;
            let count = tail as isize + keep_delta;
            if count < 0 {
                continue;
            }
            let start = s_list[keep - 1];
            let span = per - start;
            let mut s: Vec<f64> = s_list[..keep].to_vec();
            let count = count as usize;
            for i in 1..=count {
                s.push(start + span * i as f64 / (count + 1) as f64);
            }
            let (points, radii) = build(&s);
            if first_bad_gap(&points, &radii).is_none() {
                return Ok(BoundaryNet { points, arclengths: s, radii });
            }
        }
    }
    Err(Error::GeometryTooCoarse("spacing window not met after the closure pass".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::weight::{smooth_weight, BoundaryWeight};

    #[test]
    fn unit_circle_net() {
        let dom = PlanarDomain::disk(Point::new(0.0, 0.0), 1.0, 512).unwrap();
        let w = BoundaryWeight::constant(&dom, 0.2).unwrap();
        let rw = smooth_weight(&w, &dom).unwrap();
        let net = distribute_boundary_points(&dom, &rw).unwrap();
        assert!((63..=126).contains(&net.len()), "{}", net.len());
        assert!(net.spacing_violation().is_none());
        for j in 0..net.len() {
            let gap = (net.points[(j + 1) % net.len()] - net.points[j]).norm();
            assert!((0.05..=0.1).contains(&gap), "{gap}");
        }
    }

    #[test]
    fn small_domain_rejected() {
        let dom = PlanarDomain::rectangle(0.0, 0.01, 0.0, 0.01).unwrap();
        let w = BoundaryWeight::constant(&dom, 1.0).unwrap();
        let rw = smooth_weight(&w, &dom).unwrap();
        assert!(matches!(distribute_boundary_points(&dom, &rw), Err(Error::GeometryTooCoarse(_))));
    }
}
