//! Uniform-grid bucketing of line segments for nearest-segment queries.

use super::Point;

#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    /// Closest point parameter in [0, 1] and the distance.
    pub fn closest(&self, x: Point) -> (f64, f64) {
        let d = self.b - self.a;
        let len2 = d.norm_sqr();
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((x - self.a).re * d.re + (x - self.a).im * d.im) / len2).clamp(0.0, 1.0)
        };
        if t > 0.0 && t < 1.0 {
            // perpendicular distance is exact for points on axis-aligned segments
            let c = (x - self.a).re * d.im - (x - self.a).im * d.re;
            return (t, c.abs() / len2.sqrt());
        }
        let p = self.a + d * t;
        (t, (x - p).norm())
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

#[derive(Debug, Clone)]
pub struct SegmentIndex {
    segments: Vec<Segment>,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SegmentIndex {
    pub fn new(segments: Vec<Segment>) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN));
        let mut total_len = 0.0;
        for s in &segments {
            for p in [s.a, s.b] {
                lo.re = lo.re.min(p.re);
                lo.im = lo.im.min(p.im);
                hi.re = hi.re.max(p.re);
                hi.im = hi.im.max(p.im);
            }
            total_len += s.length();
        }
        let n = segments.len().max(1);
        let extent = (hi.re - lo.re).max(hi.im - lo.im).max(1e-300);
        let cell = (2.0 * total_len / n as f64).max(extent / 512.0).max(1e-300);
        let nx = (((hi.re - lo.re) / cell).floor() as usize + 1).min(4096);
        let ny = (((hi.im - lo.im) / cell).floor() as usize + 1).min(4096);
        let cell = cell.max((hi.re - lo.re) / nx as f64).max((hi.im - lo.im) / ny as f64);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, s) in segments.iter().enumerate() {
            let (i0, j0) = Self::cell_of(lo, cell, nx, ny, Point::new(s.a.re.min(s.b.re), s.a.im.min(s.b.im)));
            let (i1, j1) = Self::cell_of(lo, cell, nx, ny, Point::new(s.a.re.max(s.b.re), s.a.im.max(s.b.im)));
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * nx + i].push(k as u32);
                }
            }
        }
        SegmentIndex { segments, origin: lo, cell, nx, ny, buckets }
    }

    fn cell_of(origin: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let i = ((p.re - origin.re) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let j = ((p.im - origin.im) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (i, j)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn box_distance(&self, x: Point) -> f64 {
        let hi = self.origin + Point::new(self.nx as f64 * self.cell, self.ny as f64 * self.cell);
        let dx = (self.origin.re - x.re).max(0.0).max(x.re - hi.re);
        let dy = (self.origin.im - x.im).max(0.0).max(x.im - hi.im);
        dx.hypot(dy)
    }

    /// Nearest segment: `(index, parameter, distance)`.
    pub fn nearest(&self, x: Point) -> (usize, f64, f64) {
        let mut best = (usize::MAX, 0.0, f64::INFINITY);
        if self.segments.is_empty() {
            return best;
        }
        if self.box_distance(x) > 4.0 * self.cell {
            for (k, s) in self.segments.iter().enumerate() {
                let (t, d) = s.closest(x);
                if d < best.2 {
                    best = (k, t, d);
                }
            }
            return best;
        }
        let (ci, cj) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, x);
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            // every cell in this ring is at least (ring - 1) * cell away
            if best.2.is_finite() && best.2 <= (ring as f64 - 1.0).max(0.0) * self.cell {
                break;
            }
            // far from the boundary a linear scan is cheaper than more rings
            if (2 * ring + 1) * (2 * ring + 1) > 2 * self.segments.len() {
                for (k, s) in self.segments.iter().enumerate() {
                    let (t, d) = s.closest(x);
                    if d < best.2 || (d == best.2 && k < best.0) {
                        best = (k, t, d);
                    }
                }
                return best;
            }
            let r = ring as isize;
            for dj in -r..=r {
                for di in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    let (i, j) = (ci as isize + di, cj as isize + dj);
                    if i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
                        continue;
                    }
                    for &k in &self.buckets[j as usize * self.nx + i as usize] {
                        let (t, d) = self.segments[k as usize].closest(x);
                        if d < best.2 || (d == best.2 && (k as usize) < best.0) {
                            best = (k as usize, t, d);
                        }
                    }
                }
            }
        }
        best
    }

    /// Calls `f(k)` for every segment whose bucket intersects the disk
    /// `D(x, radius)` (a superset of the segments within `radius`).
    pub fn for_each_near<F: FnMut(usize)>(&self, x: Point, radius: f64, mut f: F) {
        if !radius.is_finite() || self.box_distance(x) > 4.0 * self.cell || radius > 64.0 * self.cell {
            (0..self.segments.len()).for_each(f);
            return;
        }
        let (i0, j0) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, x - Point::new(radius, radius));
        let (i1, j1) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, x + Point::new(radius, radius));
        let mut seen = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &k in &self.buckets[j * self.nx + i] {
                    seen.push(k);
                }
            }
        }
        seen.sort_unstable();
        seen.dedup();
        for k in seen {
            f(k as usize);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn nearest_matches_brute_force() {
        let n = 200;
        let pts: Vec<Point> = (0..n)
            .map(|k| Point::from_polar(1.0 + 0.3 * (5.0 * k as f64 / n as f64 * 6.283).sin(), k as f64 / n as f64 * std::f64::consts::TAU))
            .collect();
        let segs: Vec<Segment> = (0..n).map(|k| Segment { a: pts[k], b: pts[(k + 1) % n] }).collect();
        let idx = SegmentIndex::new(segs.clone());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let x = Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let brute = segs.iter().map(|s| s.closest(x).1).fold(f64::INFINITY, f64::min);
            let (_, _, d) = idx.nearest(x);
            assert!((d - brute).abs() < 1e-14, "{d} vs {brute}");
        }
    }
}
