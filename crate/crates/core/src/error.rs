use crate::geometry::Point;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid boundary weight: {0}")]
    InvalidWeight(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("degenerate geometry at boundary arclength {arclength:.6}: {reason}")]
    DegenerateGeometry { arclength: f64, reason: String },

    #[error("geometry too coarse for the requested boundary net: {0}")]
    GeometryTooCoarse(String),

    #[error("evaluation at a zero of u (pole of u'/u) near ({}, {})", at.re, at.im)]
    Pole { at: Point },

    #[error("assumption violated: more than two phases attain the maximum near ({}, {})", at.re, at.im)]
    TripleTie { at: Point },

    #[error("assumption violated: tie curve meets the boundary tangentially near ({}, {}) (|d/ds (psi_j - psi_k)| = {slope:.3e})", at.re, at.im)]
    Tangency { at: Point, slope: f64 },

    #[error("weight is not subharmonic: {0}")]
    NotSubharmonic(String),

    #[error("quadrature tolerance not met (best estimate {best}, error estimate {error_estimate:.3e})")]
    ToleranceNotMet { best: f64, error_estimate: f64 },

    #[error("zero of u on the contour near ({}, {}) after {retries} nudges", at.re, at.im)]
    ZeroOnContour { at: Point, retries: usize },

    #[error("argument-principle integral did not converge: {0}")]
    NonConvergence(String),

    #[error("angular measure charges the sector edge at angle {angle:.6} (atom mass {mass:.3e})")]
    BoundaryCharge { angle: f64, mass: f64 },

    #[error("insufficient data: {got} usable samples, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("invalid grid region: {0}")]
    InvalidRegion(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
