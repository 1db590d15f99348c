use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("mean-field minimization did not converge: best gradient norm {best_gradient:.3e} after {iterations} iterations")]
    NonConvergence { best_gradient: f64, iterations: usize },

    #[error("expansion point is not stationary (gradient norm {gradient_norm:.3e})")]
    InvalidExpansionPoint { gradient_norm: f64 },

    #[error("quadratic Hamiltonian is not positive semidefinite (lowest eigenvalue {eigenvalue:.3e})")]
    UnstableMode { eigenvalue: f64 },

    #[error("uncertainty relation violated: dx*dp = {product:.6e} < 1/2")]
    UncertaintyViolation { product: f64 },

    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("no phase boundary in bracket [{lo}, {hi}]")]
    NoBoundaryInBracket { lo: f64, hi: f64 },

    #[error("bracket [{lo}, {hi}] contains {count} phase boundaries, expected exactly one")]
    MultipleBoundaries { lo: f64, hi: f64, count: usize },

    #[error("need at least {required} points inside the fit window, got {found}")]
    InsufficientPoints { found: usize, required: usize },

    #[error("non-positive value in log-log fit: ({distance}, {value})")]
    NonPositiveValue { distance: f64, value: f64 },

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),
}

impl Error {
    /// Stable machine-readable name, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::InvalidExpansionPoint { .. } => "InvalidExpansionPoint",
            Error::UnstableMode { .. } => "UnstableMode",
            Error::UncertaintyViolation { .. } => "UncertaintyViolation",
            Error::DimensionCap { .. } => "DimensionCap",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NoBoundaryInBracket { .. } => "NoBoundaryInBracket",
            Error::MultipleBoundaries { .. } => "MultipleBoundaries",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::NonPositiveValue { .. } => "NonPositiveValue",
            Error::InvalidSpec(_) => "InvalidSpec",
        }
    }
}
