use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curvature eigenvalue {index} is zero or not finite")]
    DegenerateSpectrum { index: usize },

    #[error("spectrum must list negative eigenvalues first")]
    NotNegativesFirst,

    #[error("form degree {q} outside [0, {n}]")]
    DegreeOutOfRange { q: usize, n: usize },

    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weight is not real: coefficient {key} has no conjugate partner")]
    NotReal { key: String },

    #[error("epsilon {epsilon} outside (0, {max})")]
    EpsilonOutOfRange { epsilon: f64, max: f64 },

    #[error("Gram matrix ill-conditioned at D={degree}: eigenvalue ratio {ratio:e} below {threshold:e}")]
    GramConditioning { degree: usize, ratio: f64, threshold: f64 },

    #[error("Laplacian not positive semi-definite: eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("flat bundle (k*d = 0) is excluded")]
    FlatBundle,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
