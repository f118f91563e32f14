pub mod bounds;
pub mod error;
pub mod files;
pub mod geometry;
pub mod greenfd;
pub mod holofunc;
pub mod measure;
pub mod quad;
pub mod zerocount;

pub use error::{Error, Result};
pub use geometry::Point;
