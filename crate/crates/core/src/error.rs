//! Error types shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input data contains non-finite or otherwise unusable values.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The Green function was evaluated at zero separation.
    #[error("singular kernel: transmit and receive points coincide (R = 0)")]
    SingularKernel,

    /// A dense matrix would exceed the configured memory cap.
    #[error("resource limit: assembly requires {required_bytes} bytes, cap is {cap_bytes} bytes")]
    ResourceLimit {
        required_bytes: u64,
        cap_bytes: u64,
    },

    /// Geometric configuration is unusable (e.g. source lies on the aperture).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Adaptive quadrature hit the subdivision cap before reaching tolerance.
    /// Carries the best available estimate and its error estimate.
    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate}")]
    QuadratureNotConverged {
        estimate: f64,
        error_estimate: f64,
    },

    /// An operation was called on data that cannot support it
    /// (e.g. summing mode energies of a truncated spectrum without a tail bound).
    #[error("invalid use: {0}")]
    InvalidUse(String),
}
