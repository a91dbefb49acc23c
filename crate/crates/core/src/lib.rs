//! Numerical solver for line-of-sight communication between planar
//! intelligent surfaces.
//!
//! The library models a link between two rectangular apertures in the
//! radiating near field (Fresnel region). It discretizes the scalar
//! free-space Green function between the surfaces, extracts the orthogonal
//! communication modes by singular value decomposition, counts the
//! effective degrees of freedom, evaluates the near-field channel power
//! gain of an isotropic source against a receiving surface, and allocates
//! power over the resulting parallel channels by waterfilling.

pub mod capacity;
pub mod emkernel;
pub mod error;
pub mod geometry;
pub mod linkbudget;
pub mod modes;

pub use capacity::{capacity, waterfill, Allocation};
pub use emkernel::{assemble_coupling_matrix, green_scalar, CouplingMatrix};
pub use error::Error;
pub use geometry::{build_mesh, fraunhofer_distance, transform, Mesh, Surface, Wave};
pub use linkbudget::{gain_exact, gain_friis, gain_from_modes, GainReport};
pub use modes::{
    count_modes, mode_spectrum, n_limit_parallel, n_paraxial, CountRule, ModeSpectrum, SvdMethod,
};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
