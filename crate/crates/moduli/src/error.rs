use thiserror::Error;

/// Errors raised by the library. Variants mirror the failure modes of the
/// individual constructions; numerical residuals are carried along so that
/// callers can report how far from success a computation ended.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuliError {
    #[error("invalid rank n = {0}: need n >= 2")]
    InvalidRank(usize),
    #[error("twist matrix is not antisymmetric (residual {0:.3e})")]
    InvalidTwist(f64),
    #[error("spectrum does not sum to zero (trace {0:.3e})")]
    InvalidSpectrum(f64),
    #[error("repeated spectral entries: orbit is not of maximal dimension")]
    BoundaryOrbit,
    #[error("matrix is not Hermitian positive definite")]
    InvalidSK,
    #[error("function evaluation returned a non-finite value")]
    EvaluationError,
    #[error("no solution found (best residual {best_residual:.3e})")]
    NoSolution { best_residual: f64 },
    #[error("solution is not regular (smallest stabilizer singular value {0:.3e})")]
    NonRegular(f64),
    #[error("rank decision is ill-conditioned (singular value {0:.3e} near threshold)")]
    IllConditioned(f64),
    #[error("residues violate X1 + X2 + X3 = 0 (residual {0:.3e})")]
    ConstraintViolated(f64),
    #[error("contour passes within {0:.3e} of a pole")]
    PoleTooClose(f64),
    #[error("integrator could not reach tolerance {0:.1e}")]
    ToleranceNotMet(f64),
    #[error("holonomy spectrum mismatch (residual {0:.3e})")]
    SpectralMismatch(f64),
    #[error("no intersection data between `{0}` and `{1}`")]
    MissingIntersectionData(String, String),
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("geometry error: {0}")]
    GeometryError(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, ModuliError>;
