//! Geometry of the normal exponential map off an immersed submanifold:
//! Jacobi-field transfer functions along normal geodesics, equidistant
//! shape-operator evolution, convexity radii, and the lower bound of exp
//! against the warped comparison metric.

pub mod expansion;
pub mod jacobi;
pub mod riccati;

pub use expansion::{exp_metric_lower_bound, EXPANSION_SLACK};
pub use jacobi::{
    char_eq_check, jacobi_transfer, jacobi_transfer_along, TransferTrace, JACOBI_STEP, MAX_HORIZON,
};
pub use riccati::{
    bounded_slice_check, convexity_radius, equidistant_spectrum, k_convexity_check, mobius_shift,
    riccati_evolve, ConvexityRadii, EquidistantSpectrum, RICCATI_STEP,
};
