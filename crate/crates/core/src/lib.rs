//! Numerical geometry of tangent-space variation on submanifolds of R^N,
//! measured against the local feature size.
//!
//! * [`subspace`]: orthonormal bases, principal angles, point-to-subspace distance.
//! * [`manifolds`]: analytic shapes with exact tangents and local feature size,
//!   plus a sampled medial-axis oracle.
//! * [`bounds`]: every tangent-variation and distance bound as a function of
//!   the normalized distance `t = |p - q| / lfs(p)`.
//! * [`verify`]: seeded Monte-Carlo harness that checks the bounds on the zoo.
//! * [`pointcloud`]: tangent and local-feature-size estimation from samples.
//! * [`cli`]: the `lfsgeo` command-line frontend.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod manifolds;
pub mod pointcloud;
pub mod spatial;
pub mod subspace;
pub mod verify;

pub use error::{GeoError, Result};
