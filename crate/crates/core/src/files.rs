//! Structured text files for domains, boundary weights, exponential-sum models and measures.
//! The format follows the file extension: `.toml` or `.json`.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryWeight, DomainKind, PlanarDomain, Point};
use crate::holofunc::{ExponentialSum, Polynomial};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Ok(Format::Toml),
            Some("json") => Ok(Format::Json),
            _ => Err(Error::Parse(format!("{}: expected a .toml or .json file", path.display()))),
        }
    }
}

pub fn to_string<T: Serialize>(value: &T, format: Format) -> Result<String> {
    match format {
        Format::Toml => toml::to_string(value).map_err(|e| Error::Parse(e.to_string())),
        Format::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
    }
}

pub fn from_str<T: DeserializeOwned>(text: &str, format: Format) -> Result<T> {
    match format {
        Format::Toml => Ok(toml::from_str(text)?),
        Format::Json => Ok(serde_json::from_str(text)?),
    }
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let format = Format::from_path(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_str(&text, format).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_string(value, Format::from_path(path)?)?)?;
    Ok(())
}

/// Domain description: a built-in shape or an explicit vertex list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_disk_vertices")]
        n: usize,
    },
    Rectangle {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    },
    TruncatedSector {
        theta: f64,
        vartheta: f64,
        r_in: f64,
        r_out: f64,
        #[serde(default = "default_arc_step")]
        arc_step: f64,
    },
}

fn default_disk_vertices() -> usize {
    256
}

fn default_arc_step() -> f64 {
    0.05
}

fn pt(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

impl DomainSpec {
    pub fn build(&self) -> Result<PlanarDomain> {
        match self {
            DomainSpec::Polygon { vertices } => PlanarDomain::polygon(vertices.iter().copied().map(pt).collect()),
            DomainSpec::Disk { center, radius, n } => PlanarDomain::disk(pt(*center), *radius, *n),
            DomainSpec::Rectangle { x0, x1, y0, y1 } => PlanarDomain::rectangle(*x0, *x1, *y0, *y1),
            DomainSpec::TruncatedSector { theta, vartheta, r_in, r_out, arc_step } => {
                PlanarDomain::truncated_sector(*theta, *vartheta, *r_in, *r_out, *arc_step)
            }
        }
    }

    /// Built-in kinds keep their parameters; sectors get the default arc step.
    pub fn from_domain(dom: &PlanarDomain) -> Self {
        match dom.kind() {
            DomainKind::Polygon => DomainSpec::Polygon { vertices: dom.vertices().iter().map(|p| [p.re, p.im]).collect() },
            DomainKind::Disk { center, radius, n } => DomainSpec::Disk { center: *center, radius: *radius, n: *n },
            DomainKind::Rectangle { x0, x1, y0, y1 } => DomainSpec::Rectangle { x0: *x0, x1: *x1, y0: *y0, y1: *y1 },
            DomainKind::TruncatedSector { theta, vartheta, r_in, r_out } => DomainSpec::TruncatedSector {
                theta: *theta,
                vartheta: *vartheta,
                r_in: *r_in,
                r_out: *r_out,
                arc_step: default_arc_step(),
            },
        }
    }
}

/// Boundary weight as a constant or as `(arclength, value)` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { value: f64 },
    Samples { samples: Vec<[f64; 2]> },
}

impl WeightSpec {
    pub fn build(&self, dom: &PlanarDomain) -> Result<BoundaryWeight> {
        match self {
            WeightSpec::Constant { value } => BoundaryWeight::constant(dom, *value),
            WeightSpec::Samples { samples } => BoundaryWeight::new(dom, samples.iter().map(|s| (s[0], s[1])).collect()),
        }
    }

    pub fn from_weight(w: &BoundaryWeight) -> Self {
        WeightSpec::Samples { samples: w.samples().iter().map(|&(s, r)| [s, r]).collect() }
    }
}

/// A domain with an optional boundary weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
}

/// `N` phases given as `[re, im]` coefficient pairs in ascending degree, with an optional
/// `h` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub phases: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_grid: Vec<f64>,
}

impl ModelFile {
    pub fn to_sum(&self) -> Result<ExponentialSum> {
        if self.n != self.phases.len() {
            return Err(Error::Parse(format!("model declares n = {} but lists {} phases", self.n, self.phases.len())));
        }
        if self.h_grid.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Parse("h grid entries must be positive".into()));
        }
        let phases = self
            .phases
            .iter()
            .map(|c| Polynomial::new(c.iter().map(|p| Complex64::new(p[0], p[1])).collect()))
            .collect::<Result<Vec<_>>>()?;
        ExponentialSum::new(phases)
    }

    pub fn from_sum(sum: &ExponentialSum, h_grid: Vec<f64>) -> Self {
        ModelFile {
            n: sum.len(),
            phases: sum.phases.iter().map(|p| p.coeffs.iter().map(|c| [c.re, c.im]).collect()).collect(),
            h_grid,
        }
    }
}
