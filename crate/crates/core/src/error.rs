use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("coefficient {name} = {value} outside [1/M, M] with M = {bound}")]
    Admissibility { name: &'static str, value: f64, bound: f64 },
    #[error("linear solve failed at step {step}: {reason}")]
    SolverFailure { step: usize, reason: String },
    #[error("non-finite values at step {step}")]
    Divergence { step: usize },
    #[error("Picard iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    PicardDivergence { iterations: usize, residual: f64, history: alloc::vec::Vec<f64> },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("grid under-resolves frequency {sigma}: {points_per_wavelength:.2} points per wavelength, need nx >= {required_nx} and nt >= {required_nt}")]
    Resolution { sigma: f64, points_per_wavelength: f64, required_nx: usize, required_nt: usize },
    #[error("quadrature range error: {0}")]
    Range(String),
    #[error("support hypothesis violated: {0}")]
    Support(String),
    #[error("regularization parameter must be positive for an underdetermined system")]
    RegularizationRequired,
    #[error("missing data: {0}")]
    MissingData(String),
}

pub type Result<T> = core::result::Result<T, Error>;
