//! Minimal SVG plots with no timestamps or other run-dependent metadata.

use holozeros::greenfd::GridRegion;
use holozeros::zerocount::LocatedZero;
use holozeros::Point;
use std::fmt::Write;

const SIZE: f64 = 480.0;
const PAD: f64 = 48.0;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{w}\" viewBox=\"0 0 {w} {w}\">\n<title>{title}</title>\n<rect width=\"{w}\" height=\"{w}\" fill=\"white\"/>\n",
        w = SIZE + 2.0 * PAD
    )
}

/// Affine map from a data box onto the plot square, y up.
struct Frame {
    lo: Point,
    scale: f64,
}

impl Frame {
    fn fit(lo: Point, hi: Point) -> Self {
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-300);
        Frame { lo, scale: SIZE / span }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (PAD + (p.re - self.lo.re) * self.scale, PAD + SIZE - (p.im - self.lo.im) * self.scale)
    }
}

/// Region outline with located zeros; circle radius grows with multiplicity.
pub fn zeros_plot(outline: &[Point], zeros: &[LocatedZero], title: &str) -> String {
    let (mut lo, mut hi) = (outline[0], outline[0]);
    for p in outline.iter().chain(zeros.iter().map(|z| &z.at)) {
        lo = Point::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Point::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let f = Frame::fit(lo, hi);
    let mut s = header(title);
    s.push_str("<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"");
    for p in outline {
        let (x, y) = f.map(*p);
        write!(s, "{x:.2},{y:.2} ").unwrap();
    }
    s.push_str("\"/>\n");
    for z in zeros {
        let (x, y) = f.map(z.at);
        writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.1}\" fill=\"crimson\"/>", 2.0 + z.multiplicity as f64).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Points `(x, y)` on log-log axes with decade grid lines; nonpositive values are skipped.
pub fn loglog_plot(points: &[(f64, f64)], xlabel: &str, ylabel: &str, title: &str) -> String {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect();
    let mut s = header(title);
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (x0, x1) = (pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor(), pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil());
    let (y0, y1) = (pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor(), pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil());
    let (x1, y1) = (x1.max(x0 + 1.0), y1.max(y0 + 1.0));
    let map = |(x, y): (f64, f64)| (PAD + (x - x0) / (x1 - x0) * SIZE, PAD + SIZE - (y - y0) / (y1 - y0) * SIZE);
    for d in x0 as i32..=x1 as i32 {
        let (x, _) = map((d as f64, y0));
        writeln!(s, "<line x1=\"{x:.2}\" y1=\"{PAD}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#ddd\"/>", PAD + SIZE).unwrap();
        writeln!(s, "<text x=\"{x:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>", PAD + SIZE + 16.0).unwrap();
    }
    for d in y0 as i32..=y1 as i32 {
        let (_, y) = map((x0, d as f64));
        writeln!(s, "<line x1=\"{PAD}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>", PAD + SIZE).unwrap();
        writeln!(s, "<text x=\"{}\" y=\"{y:.2}\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>", PAD - 4.0).unwrap();
    }
    writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>", PAD + SIZE / 2.0, PAD + SIZE + 36.0).unwrap();
    writeln!(s, "<text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">{ylabel}</text>", PAD + SIZE / 2.0, PAD + SIZE / 2.0).unwrap();
    s.push_str("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"");
    for p in &pts {
        let (x, y) = map(*p);
        write!(s, "{x:.2},{y:.2} ").unwrap();
    }
    s.push_str("\"/>\n");
    for p in &pts {
        let (x, y) = map(*p);
        writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"steelblue\"/>").unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Linear blue-to-yellow ramp.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(40.0, 250.0), lerp(30.0, 230.0), lerp(120.0, 40.0))
}

/// Interior node values as cells, subsampled to at most 128 cells per side.
pub fn heatmap(g: &GridRegion, values: &[f64], title: &str) -> String {
    let stride = g.nx.max(g.ny).div_ceil(128).max(1);
    let vmax = g.mask.iter().zip(values).filter(|(m, _)| **m).map(|(_, v)| *v).fold(0.0, f64::max).max(1e-300);
    let lo = g.origin;
    let hi = g.point((g.nx - 1, g.ny - 1));
    let f = Frame::fit(lo, hi);
    let cell = g.spacing * stride as f64 * f.scale;
    let mut s = header(title);
    for j in (0..g.ny).step_by(stride) {
        for i in (0..g.nx).step_by(stride) {
            if !g.is_interior((i, j)) {
                continue;
            }
            let (x, y) = f.map(g.point((i, j)));
            let v = values[g.index((i, j))];
            writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"{}\"/>",
                x - cell / 2.0,
                y - cell / 2.0,
                // log scale keeps the logarithmic peak from washing out the rest
                color((1.0 + v / vmax * 1e3).ln() / (1.0 + 1e3f64).ln())
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
