//! Domains, boundary weights, signed distance and thin boundary neighborhoods.

mod domain;
mod index;
mod lipschitz;
mod net;
mod thin;
mod weight;

pub type Point = num_complex::Complex64;

pub use domain::{signed_distance, DomainKind, PlanarDomain};
pub use index::{Segment, SegmentIndex};
pub use lipschitz::{verify_lipschitz_boundary, LipschitzFailure, LipschitzReport};
pub use net::{distribute_boundary_points, BoundaryNet};
pub use thin::{build_thin_neighborhood, BoundaryBand, ThinNeighborhood, DEFAULT_CWIDTH, DEFAULT_EPS};
pub use weight::{
    extend_weight, mollification_constant, mollify_distance, smooth_weight, BoundaryWeight, ExtendedWeight,
    SmoothedWeight, DEFAULT_SMOOTHING_KAPPA,
};
