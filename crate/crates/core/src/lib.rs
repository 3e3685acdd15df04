//! Direct sampling imaging of small dielectric scatterers from limited-aperture
//! bistatic scattered-field data in two dimensions.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: Bessel, Hankel and Green's function kernels.
//! - [`geometry`]: antenna rings, bistatic masking and receiver index sets.
//! - [`forward`]: Born-approximation synthesis of the masked measurement matrix.
//! - [`indicator`]: single- and multi-source direct sampling indicator functions.
//! - [`structure`]: truncated Bessel-series forms of the indicators, checked
//!   against the direct inner products.
//! - [`io`]: dataset, scenario and map file formats, external import and presets.
//!
//! Antenna indices in the public API are 1-based (`m = 1..=M`, `n = 1..=N`),
//! matching the file formats and the command line.

pub mod error;
pub mod forward;
pub mod geometry;
pub mod indicator;
pub mod io;
pub mod specfun;
pub mod structure;

pub use num_complex::Complex64;

pub use error::{Error, ErrorClass, Result};
pub use forward::{
    contrast, disk_scattered_field, field_matrix, matrix_modulus, point_scattered_field,
    synthesize, DataOrigin, EntryKind, ForwardModel, MaskedMeasurementMatrix, ObjectSet, Scatterer,
};
pub use geometry::{IndexSets, MeasurementConfig, Point};
pub use indicator::{
    classical_indicator, dsm_inner, f_dsm, f_msm, image, inner_l2, msm_inner, norm_l2,
    test_vector_rx, test_vector_tx, ImagingGrid, ImagingMode, IndicatorMap, Peak,
};
pub use structure::{
    disturb_e1, disturb_e2, f1_f2_profile, jacobi_anger_discrete, lambda_gamma, phi_psi,
    structure_vs_direct, SeriesTruncation, StructureEvaluation, StructureStats,
};

/// Complex scalar used for every field amplitude; time dependence `e^{-iωt}`.
pub type ComplexScalar = Complex64;
