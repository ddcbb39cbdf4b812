//! Numerical laboratory for almost-fuchsian submanifolds of hyperbolic space.
//!
//! The crate provides hyperboloid-model geometry, discrete immersed
//! submanifolds with their fundamental forms, normal-flow transfer checks,
//! Klein-model convex hulls of ideal boundary sets, and a mean-curvature-flow
//! solver for disc-type boundary problems, together with the verification
//! harness the `afp` binary exposes.

pub mod error;
pub mod hull;
pub mod io;
pub mod normal_flow;
pub mod plateau;
pub mod report;
pub mod space;
pub mod surface;

pub use error::{Error, Result};
pub use report::{CheckItem, CheckReport};
pub use space::{HyperboloidPoint, IdealPoint, ModelSpace, TangentVector};
pub use surface::ParametricPatch;
