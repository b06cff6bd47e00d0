//! The Kepler problem on the 3-sphere and its regularizations: Moser's
//! hodograph, a Ligon–Schaaf map onto the Delaunay flow, and the gnomonic
//! transformation to the Euclidean Kepler problem.
//!
//! Everything is generic over the scalar `T: Real`; the aliases at the crate
//! root fix `T = f64`.

// `!(x > 0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conserved;
pub mod dynamics;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod gnomonic;
pub mod ligon_schaaf;
pub mod moser;
pub mod scalar;
pub mod verify;

pub use error::{KeplerError, Result};
pub use scalar::Real;

pub type Vec3 = geometry::Vec3<f64>;
pub type Vec4 = geometry::Vec4<f64>;
pub type SpherePhasePoint = geometry::SpherePhasePoint<f64>;
pub type Tolerances = geometry::Tolerances<f64>;
pub type KeplerParams = dynamics::KeplerParams<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type ConservedSet = conserved::ConservedSet<f64>;
pub type DelaunayPoint = ligon_schaaf::DelaunayPoint<f64>;
pub type So4Element = ligon_schaaf::So4Element<f64>;
pub type EuclidPhasePoint = gnomonic::EuclidPhasePoint<f64>;
