use super::index::{Segment, SegmentIndex};
use super::Point;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How a domain was constructed. Polylines are the only representation; the
/// tag keeps the generating parameters for reports and file round trips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Polygon,
    Disk { center: [f64; 2], radius: f64, n: usize },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    TruncatedSector { theta: f64, vartheta: f64, r_in: f64, r_out: f64 },
}

/// Simply connected region bounded by a closed, simple, positively oriented
/// polyline. The closing edge from the last vertex back to the first is implicit.
#[derive(Debug, Clone)]
pub struct PlanarDomain {
    vertices: Vec<Point>,
    kind: DomainKind,
    cumulative: Vec<f64>,
    perimeter: f64,
    index: SegmentIndex,
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Proper or touching intersection test for segments `p1p2` and `q1q2`.
pub(crate) fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d == 0.0 && p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Returns the first pair of non-adjacent intersecting edges, if any.
pub(crate) fn first_self_intersection(v: &[Point]) -> Option<(usize, usize)> {
    let n = v.len();
    let bbox = |k: usize| {
        let (a, b) = (v[k], v[(k + 1) % n]);
        (a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im))
    };
    let boxes: Vec<_> = (0..n).map(bbox).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| boxes[a].0.total_cmp(&boxes[b].0));
    // sweep over x-sorted boxes
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            if boxes[j].0 > boxes[i].1 {
                break;
            }
            if boxes[j].2 > boxes[i].3 || boxes[j].3 < boxes[i].2 {
                continue;
            }
            let (a, b) = (i.min(j), i.max(j));
            if b == a + 1 || (a == 0 && b == n - 1) {
                continue;
            }
            if segments_intersect(v[a], v[(a + 1) % n], v[b], v[(b + 1) % n]) {
                return Some((a, b));
            }
        }
    }
    None
}

impl PlanarDomain {
    /// General polygon. Vertices must be finite, distinct consecutive, simple and
    /// counter-clockwise. A repeated closing vertex is dropped.
    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Self::build(vertices, DomainKind::Polygon, true)
    }

    pub fn disk(center: Point, radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || n < 3 {
            return Err(Error::InvalidDomain(format!("disk needs radius > 0 and n >= 3 (got {radius}, {n})")));
        }
        let v = (0..n).map(|k| center + Point::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect();
        Self::build(v, DomainKind::Disk { center: [center.re, center.im], radius, n }, false)
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::InvalidDomain(format!("empty rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        let v = vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)];
        Self::build(v, DomainKind::Rectangle { x0, x1, y0, y1 }, false)
    }

    /// `{ r e^{iw} : r_in < r < r_out, theta < w < vartheta }`, arcs replaced by
    /// chords with at most `arc_step` radians per chord.
    pub fn truncated_sector(theta: f64, vartheta: f64, r_in: f64, r_out: f64, arc_step: f64) -> Result<Self> {
        if !(vartheta > theta && vartheta - theta < 2.0 * PI && r_out > r_in && r_in > 0.0 && arc_step > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "truncated sector needs theta < vartheta < theta + 2pi and 0 < r_in < r_out (got {theta}, {vartheta}, {r_in}, {r_out})"
            )));
        }
        let n = ((vartheta - theta) / arc_step).ceil().max(1.0) as usize;
        let mut v = Vec::with_capacity(2 * n + 2);
        for k in 0..=n {
            v.push(Point::from_polar(r_out, theta + (vartheta - theta) * k as f64 / n as f64));
        }
        for k in (0..=n).rev() {
            v.push(Point::from_polar(r_in, theta + (vartheta - theta) * k as f64 / n as f64));
        }
        Self::build(v, DomainKind::TruncatedSector { theta, vartheta, r_in, r_out }, false)
    }

    fn build(mut vertices: Vec<Point>, kind: DomainKind, check_simple: bool) -> Result<Self> {
        if vertices.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidDomain("non-finite vertex".into()));
        }
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        vertices.dedup();
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain("empty boundary (fewer than 3 distinct vertices)".into()));
        }
        let n = vertices.len();
        let area: f64 = (0..n).map(|k| cross(vertices[k], vertices[(k + 1) % n])).sum::<f64>() * 0.5;
        if area <= 0.0 {
            return Err(Error::InvalidDomain(format!("boundary must be positively oriented (signed area {area})")));
        }
        if check_simple {
            if let Some((a, b)) = first_self_intersection(&vertices) {
                return Err(Error::InvalidDomain(format!("boundary self-intersects (edges {a} and {b})")));
            }
        }
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        cumulative.push(0.0);
        for k in 0..n {
            s += (vertices[(k + 1) % n] - vertices[k]).norm();
            cumulative.push(s);
        }
        let segments = (0..n).map(|k| Segment { a: vertices[k], b: vertices[(k + 1) % n] }).collect();
        Ok(PlanarDomain { vertices, kind, cumulative, perimeter: s, index: SegmentIndex::new(segments) })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn area(&self) -> f64 {
        let n = self.len();
        (0..n).map(|k| cross(self.vertices[k], self.vertices[(k + 1) % n])).sum::<f64>() * 0.5
    }

    pub fn segment(&self, k: usize) -> (Point, Point) {
        (self.vertices[k], self.vertices[(k + 1) % self.len()])
    }

    /// Arclength at which vertex `k` sits.
    pub fn vertex_arclength(&self, k: usize) -> f64 {
        self.cumulative[k]
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Wraps an arclength into [0, perimeter).
    pub fn wrap(&self, s: f64) -> f64 {
        s.rem_euclid(self.perimeter)
    }

    /// Segment index containing arclength `s` and the local offset.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let s = self.wrap(s);
        let k = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(k) => k.min(self.len() - 1),
            Err(k) => k - 1,
        };
        (k, s - self.cumulative[k])
    }

    pub fn point_at(&self, s: f64) -> Point {
        let (k, u) = self.locate(s);
        let (a, b) = self.segment(k);
        let len = (b - a).norm();
        if len == 0.0 {
            a
        } else {
            a + (b - a) * (u / len)
        }
    }

    /// Unit tangent of the segment containing `s`.
    pub fn tangent_at(&self, s: f64) -> Point {
        let (k, _) = self.locate(s);
        let (a, b) = self.segment(k);
        (b - a) / (b - a).norm()
    }

    /// Unit outward normal of segment `k`.
    pub fn outward_normal(&self, k: usize) -> Point {
        let (a, b) = self.segment(k);
        let t = (b - a) / (b - a).norm();
        Point::new(t.im, -t.re)
    }

    /// Inward normal averaged over the arclength window `[s - w, s + w]`.
    /// With `w = 0` this is the segment normal (the bisector at a vertex).
    pub fn smoothed_inward_normal(&self, s: f64, w: f64) -> Point {
        let n = self.len();
        if w <= 0.0 {
            let (k, u) = self.locate(s);
            let nk = -self.outward_normal(k);
            if u == 0.0 {
                let prev = -self.outward_normal((k + n - 1) % n);
                let m = nk + prev;
                return m / m.norm();
            }
            return nk;
        }
        let mut acc = Point::new(0.0, 0.0);
        let (mut k, mut u) = self.locate(s - w);
        let mut remaining = 2.0 * w;
        let mut guard = 0;
        while remaining > 0.0 && guard < 4 * n + 4 {
            let (a, b) = self.segment(k);
            let len = (b - a).norm();
            let take = (len - u).min(remaining);
            acc += -self.outward_normal(k) * take;
            remaining -= take;
            u = 0.0;
            k = (k + 1) % n;
            guard += 1;
        }
        if acc.norm() == 0.0 {
            return self.smoothed_inward_normal(s, 0.0);
        }
        acc / acc.norm()
    }

    /// Distance to the boundary with the arclength and location of the nearest point.
    pub fn nearest(&self, x: Point) -> (f64, f64, Point) {
        let (k, t, d) = self.index.nearest(x);
        let (a, b) = self.segment(k);
        let p = a + (b - a) * t;
        (d, self.cumulative[k] + t * (b - a).norm(), p)
    }

    pub fn distance(&self, x: Point) -> f64 {
        self.index.nearest(x).2
    }

    /// Positive inside, negative outside, zero on the boundary.
    pub fn signed_distance(&self, x: Point) -> f64 {
        let n = self.len();
        let (k, t, d) = self.index.nearest(x);
        if d == 0.0 {
            return 0.0;
        }
        // pseudo-normal sign test; at a vertex both adjacent edge normals count
        let normal = if t <= 0.0 {
            self.outward_normal(k) + self.outward_normal((k + n - 1) % n)
        } else if t >= 1.0 {
            self.outward_normal(k) + self.outward_normal((k + 1) % n)
        } else {
            self.outward_normal(k)
        };
        let (a, b) = self.segment(k);
        let p = a + (b - a) * t;
        if dot(x - p, normal) > 0.0 {
            -d
        } else {
            d
        }
    }

    /// Strict interior test.
    pub fn contains(&self, x: Point) -> bool {
        self.signed_distance(x) > 0.0
    }

    /// Winding-number interior test that does not rely on the segment index.
    pub fn contains_by_winding(&self, x: Point) -> bool {
        let n = self.len();
        let mut wn = 0i32;
        for k in 0..n {
            let (a, b) = self.segment(k);
            if a.im <= x.im {
                if b.im > x.im && cross(b - a, x - a) > 0.0 {
                    wn += 1;
                }
            } else if b.im <= x.im && cross(b - a, x - a) < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    /// `signed_distance(x) >= margin` for `margin > 0`, without a global nearest search.
    pub fn contains_with_margin(&self, x: Point, margin: f64) -> bool {
        if !self.contains_by_winding(x) {
            return false;
        }
        let mut clear = true;
        self.index.for_each_near(x, margin, |k| {
            if self.index.segments()[k].closest(x).1 < margin {
                clear = false;
            }
        });
        clear
    }

    pub fn segment_index(&self) -> &SegmentIndex {
        &self.index
    }

    /// Pieces of the segment `ab` lying inside the domain, in order from `a`.
    pub fn clip_segment(&self, a: Point, b: Point) -> Vec<(Point, Point)> {
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return Vec::new();
        }
        let mut ts = vec![0.0, 1.0];
        self.index.for_each_near((a + b) * 0.5, 0.5 * len, |k| {
            let (p, q) = self.segment(k);
            let e = q - p;
            let den = cross(d, e);
            if den == 0.0 {
                return;
            }
            let t = cross(p - a, e) / den;
            let u = cross(p - a, d) / den;
            if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                ts.push(t);
            }
        });
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut out: Vec<(Point, Point)> = Vec::new();
        for w in ts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let mid = a + d * (0.5 * (w[0] + w[1]));
            if self.contains(mid) {
                let (p, q) = (a + d * w[0], a + d * w[1]);
                match out.last_mut() {
                    Some(last) if last.1 == p => last.1 = q,
                    _ => out.push((p, q)),
                }
            }
        }
        out
    }

    /// Whether vertex `k` turns left (convex corner of the interior).
    pub fn is_convex_vertex(&self, k: usize) -> bool {
        let n = self.len();
        let prev = self.vertices[(k + n - 1) % n];
        cross(self.vertices[k] - prev, self.vertices[(k + 1) % n] - self.vertices[k]) >= 0.0
    }
}

/// Signed distance to a domain boundary.
pub fn signed_distance(dom: &PlanarDomain, x: Point) -> f64 {
    dom.signed_distance(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_center_distance() {
        let d = PlanarDomain::disk(Point::new(0.0, 0.0), 1.0, 512).unwrap();
        assert!((signed_distance(&d, Point::new(0.0, 0.0)) - 1.0).abs() < 2e-4);
    }

    #[test]
    fn point_on_boundary_has_zero_distance() {
        let d = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(signed_distance(&d, Point::new(1.0, 0.3)), 0.0);
        assert_eq!(signed_distance(&d, Point::new(-1.0, -1.0)), 0.0);
    }

    #[test]
    fn clip_segment_through_l_shape() {
        let d = PlanarDomain::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ])
        .unwrap();
        let pieces = d.clip_segment(Point::new(-1.0, 1.5), Point::new(3.0, 1.5));
        assert_eq!(pieces, vec![(Point::new(0.0, 1.5), Point::new(1.0, 1.5))]);
        let pieces = d.clip_segment(Point::new(1.5, -1.0), Point::new(-0.5, 3.0));
        let total: f64 = pieces.iter().map(|(a, b)| (b - a).norm()).sum();
        // enters at y = 0 (x = 1), leaves at x = 0 (y = 2)
        assert!((total - 5f64.sqrt()).abs() < 1e-12, "{total}");
    }

    #[test]
    fn square_outside_point() {
        let d = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(signed_distance(&d, Point::new(2.0, 0.0)), -1.0);
        // outside near a corner: nearest feature is the vertex
        let v = signed_distance(&d, Point::new(2.0, 2.0));
        assert!((v + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sign_agrees_with_winding_on_nonconvex_polygon() {
        let l = PlanarDomain::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ])
        .unwrap();
        for i in 0..60 {
            for j in 0..60 {
                let x = Point::new(-0.5 + 3.0 * i as f64 / 59.0 + 1e-3, -0.5 + 3.0 * j as f64 / 59.0 + 2e-3);
                assert_eq!(l.contains(x), l.contains_by_winding(x), "{x}");
            }
        }
    }

    #[test]
    fn rejects_bad_boundaries() {
        assert!(PlanarDomain::polygon(vec![]).is_err());
        let cw = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0)];
        assert!(PlanarDomain::polygon(cw).is_err());
        let bowtie = vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(PlanarDomain::polygon(bowtie).is_err());
        assert!(PlanarDomain::polygon(vec![Point::new(f64::NAN, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).is_err());
    }

    #[test]
    fn arclength_parametrization() {
        let d = PlanarDomain::rectangle(0.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(d.perimeter(), 6.0);
        assert_eq!(d.point_at(2.5), Point::new(2.0, 0.5));
        assert_eq!(d.point_at(6.5), Point::new(0.5, 0.0));
        let (dist, s, _) = d.nearest(Point::new(1.0, -0.5));
        assert_eq!((dist, s), (0.5, 1.0));
    }
}
