//! Discrete immersed submanifolds: parametric grid patches, fundamental
//! forms by covariant differencing, induced curvature, and the geometric
//! checks that certify a patch as almost-fuchsian.

pub mod canned;
pub mod curvature;
pub mod forms;
pub mod patch;
pub mod quasi;

pub use canned::{equidistant_patch, geodesic_plane_patch, horosphere_patch};
pub use curvature::{
    brioschi_curvature, gauss_consistency_check, gauss_curvature, induced_sectional_curvature,
    pinching_check, PinchingReport, PINCH_TOL,
};
pub use forms::{
    fundamental_forms, mean_curvature_from_forms, mean_curvature_vector, shape_spectra,
    shape_spectrum, sup_second_form, vertex_second_form_sup, FundamentalForms, SecondFormSummary,
    ShapeSpectrum,
};
pub use patch::ParametricPatch;
pub use quasi::{quasi_isometry_check, QuasiIsometryReport, GRAPH_SLACK};
