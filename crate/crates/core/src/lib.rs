//! Stationary radiative transport in bounded convex domains with
//! piecewise-constant incoming data, jump extraction at the outgoing
//! boundary and jump-based X-ray tomography.

pub mod boundary;
pub mod config;
pub mod error;
pub mod geometry;
pub mod io;
pub mod jump;
pub mod media;
pub mod problem;
pub mod solver;
pub mod quadrature;
pub mod vector;
pub mod xray;

pub use boundary::{BoundarySource, Gamma, Side, SideA, SourceKind};
pub use error::{Error, Result};
pub use geometry::{DomainGeometry, Interface, SubdomainPartition};
pub use media::{CoefficientField, MediumModel, PhaseFunction};
pub use problem::TransportProblem;
pub use vector::Vec3;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
