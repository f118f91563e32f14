//! Riesz measures `mu = Delta phi` as an area density plus line parts and atoms.

mod angular;
mod green;
mod logkernel;

pub use angular::{homogeneous_measure, sector_weyl_mass, AngularMeasure, KinkOptions, SampledFunction, SectorMass};
pub use green::{mass_via_green_formula, PhiField, PsiField, ScalarField};
pub use logkernel::{growth_profile_bound, disk_mass, log_kernel_integral, GrowthProfile};

use crate::error::Result;
use crate::geometry::{PlanarDomain, Point};
use crate::holofunc::{ExponentialSum, StokesCurve};
use crate::quad::{integrate_triangles, triangulate, AreaQuadOptions};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Absolutely continuous part of a measure.
#[derive(Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `Delta Phi` of an exponential sum at fixed `h`.
    ExpSumLaplacian {
        sum: ExponentialSum,
        h: f64,
    },
    /// Bilinear interpolation of node values; zero outside the grid.
    Grid {
        origin: [f64; 2],
        spacing: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    },
    #[serde(skip)]
    Custom(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Density::Zero => write!(f, "Zero"),
            Density::Constant { value } => write!(f, "Constant({value})"),
            Density::ExpSumLaplacian { h, .. } => write!(f, "ExpSumLaplacian(h = {h})"),
            Density::Grid { nx, ny, .. } => write!(f, "Grid({nx}x{ny})"),
            Density::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Density {
    pub fn eval(&self, z: Point) -> f64 {
        match self {
            Density::Zero => 0.0,
            Density::Constant { value } => *value,
            Density::ExpSumLaplacian { sum, h } => sum.laplacian_phi(z, *h).value,
            Density::Grid { origin, spacing, nx, ny, values } => {
                let x = (z.re - origin[0]) / spacing;
                let y = (z.im - origin[1]) / spacing;
                if x < 0.0 || y < 0.0 || x > (*nx - 1) as f64 || y > (*ny - 1) as f64 {
                    return 0.0;
                }
                let i = (x.floor() as usize).min(nx - 2);
                let j = (y.floor() as usize).min(ny - 2);
                let (fx, fy) = (x - i as f64, y - j as f64);
                let v = |i: usize, j: usize| values[j * nx + i];
                (1.0 - fx) * (1.0 - fy) * v(i, j) + fx * (1.0 - fy) * v(i + 1, j) + (1.0 - fx) * fy * v(i, j + 1) + fx * fy * v(i + 1, j + 1)
            }
            Density::Custom(f) => f(z),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Density::Zero)
    }
}

/// Polyline carrying a line density that varies linearly between vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePart {
    pub points: Vec<Point>,
    pub densities: Vec<f64>,
}

impl LinePart {
    /// Density at parameter `t` of segment `k`.
    pub fn density_on(&self, k: usize, t: f64) -> f64 {
        self.densities[k] * (1.0 - t) + self.densities[k + 1] * t
    }
}

impl From<&StokesCurve> for LinePart {
    fn from(c: &StokesCurve) -> Self {
        LinePart { points: c.points.clone(), densities: c.densities.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: Point,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RieszMeasure {
    #[serde(default)]
    pub density: Density,
    #[serde(default)]
    pub lines: Vec<LinePart>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
}

impl RieszMeasure {
    pub fn from_density(density: Density) -> Self {
        RieszMeasure { density, ..Default::default() }
    }

    /// `Delta Phi` of an exponential sum as an area density.
    pub fn exp_sum_phi(sum: &ExponentialSum, h: f64) -> Self {
        Self::from_density(Density::ExpSumLaplacian { sum: sum.clone(), h })
    }

    /// `Delta Psi` of an exponential sum: line densities on the tie curves.
    pub fn exp_sum_psi(curves: &[StokesCurve]) -> Self {
        RieszMeasure { lines: curves.iter().map(LinePart::from).collect(), ..Default::default() }
    }

    pub fn with_atom(mut self, at: Point, mass: f64) -> Self {
        self.atoms.push(Atom { at, mass });
        self
    }

    /// First negative density sample, line density or atom mass, if any.
    pub fn check_nonnegative(&self) -> Option<String> {
        for (i, l) in self.lines.iter().enumerate() {
            if l.points.len() != l.densities.len() {
                return Some(format!("line part {i} has mismatched vertex and density counts"));
            }
            if let Some(d) = l.densities.iter().find(|d| **d < 0.0) {
                return Some(format!("line part {i} has negative density {d}"));
            }
        }
        self.atoms.iter().find(|a| a.mass < 0.0).map(|a| format!("atom at {} has negative mass {}", a.at, a.mass))
    }
}

/// Line mass of `lines` inside `region`, using exact segment clipping.
pub fn line_mass_in_region(lines: &[LinePart], region: &PlanarDomain) -> f64 {
    let mut total = 0.0;
    for l in lines {
        for k in 0..l.points.len().saturating_sub(1) {
            let (a, b) = (l.points[k], l.points[k + 1]);
            let len = (b - a).norm();
            if len == 0.0 {
                continue;
            }
            for (p, q) in region.clip_segment(a, b) {
                let tp = (p - a).norm() / len;
                let tq = (q - a).norm() / len;
                total += (q - p).norm() * 0.5 * (l.density_on(k, tp) + l.density_on(k, tq));
            }
        }
    }
    total
}

/// `mu(region)`: adaptive area quadrature of the density, clipped line masses and interior atoms.
pub fn mass_over_region(m: &RieszMeasure, region: &PlanarDomain) -> Result<f64> {
    mass_over_region_with(m, region, &AreaQuadOptions { initial_diameter: region.diameter() / 32.0, ..Default::default() })
}

pub fn mass_over_region_with(m: &RieszMeasure, region: &PlanarDomain, opts: &AreaQuadOptions) -> Result<f64> {
    let ac = match &m.density {
        Density::Zero => 0.0,
        Density::Constant { value } => value * region.area(),
        d => {
            let tris = triangulate(region.vertices());
            integrate_triangles(&|z| d.eval(z), &tris, opts)?
        }
    };
    let lines = line_mass_in_region(&m.lines, region);
    let atoms: f64 = m.atoms.iter().filter(|a| region.contains(a.at)).map(|a| a.mass).sum();
    Ok(ac + lines + atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_density_over_disk() {
        let disk = PlanarDomain::disk(Point::new(0.0, 0.0), 1.0, 4096).unwrap();
        let m = RieszMeasure::from_density(Density::Custom(Arc::new(|_| 4.0)));
        let v = mass_over_region(&m, &disk).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-5, "{}", v - 4.0 * PI);
    }

    #[test]
    fn vertical_line_over_square() {
        let sq = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let m = RieszMeasure {
            lines: vec![LinePart { points: vec![Point::new(0.0, -3.0), Point::new(0.0, 3.0)], densities: vec![2.0, 2.0] }],
            ..Default::default()
        };
        assert!((mass_over_region(&m, &sq).unwrap() - 4.0).abs() < 1e-14);
        let far = PlanarDomain::rectangle(5.0, 6.0, 5.0, 6.0).unwrap();
        assert_eq!(mass_over_region(&m.clone().with_atom(Point::new(0.0, 0.0), 1.0), &far).unwrap(), 0.0);
    }

    #[test]
    fn grid_density_is_bilinear() {
        let d = Density::Grid { origin: [0.0, 0.0], spacing: 1.0, nx: 2, ny: 2, values: vec![0.0, 1.0, 2.0, 3.0] };
        assert!((d.eval(Point::new(0.5, 0.5)) - 1.5).abs() < 1e-15);
        assert_eq!(d.eval(Point::new(-0.1, 0.5)), 0.0);
    }

    #[test]
    fn cosh_phi_mass_approaches_line_mass() {
        let sq = PlanarDomain::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let h = 0.05;
        let m = RieszMeasure::exp_sum_phi(&ExponentialSum::cosh_family(), h);
        // integral of sech^2(x/h)/h over [-1, 1] is 2 tanh(1/h)
        let exact = 2.0 * 2.0 * (1.0 / h).tanh();
        let v = mass_over_region(&m, &sq).unwrap();
        assert!((v - exact).abs() < 1e-6 * exact, "{v} {exact}");
    }
}
