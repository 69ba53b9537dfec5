use thiserror::Error;

/// Crate-wide error type.
///
/// Validation variants carry the measured deviation so diagnostics can
/// report how far an input was from satisfying its invariant.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("not Hermitian: max |H[i][j] - conj(H[j][i])| = {deviation:.3e} at ({row},{col}) exceeds {tolerance:.1e}")]
    NonHermitian {
        deviation: f64,
        row: usize,
        col: usize,
        tolerance: f64,
    },

    #[error("eigensolver did not converge within the iteration budget")]
    NumericalFailure,

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("not positive semi-definite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPSD { min_eigenvalue: f64 },

    #[error("spectral function domain error: {f} applied to eigenvalue {eigenvalue:.3e}")]
    DomainError { f: &'static str, eigenvalue: f64 },

    #[error("subsystem shape {shape:?} (product {product}) does not match operator dimension {dim}")]
    ShapeMismatch {
        shape: Vec<usize>,
        product: usize,
        dim: usize,
    },

    #[error("partial trace keep set is empty")]
    EmptyKeepSet,

    #[error("factor index {index} out of range for {factors} factors")]
    FactorOutOfRange { index: usize, factors: usize },

    #[error("model parse error: {0}")]
    ParseError(String),

    #[error("model validation error at {path}: {check} (deviation {deviation:.3e})")]
    ValidationError {
        path: String,
        check: String,
        deviation: f64,
    },

    #[error("Kraus family is not trace preserving: ||sum K'K - I||_F = {deviation:.3e}")]
    CompletenessViolation { deviation: f64 },

    #[error("measurement input states sum to an operator with zero trace")]
    AllZero,

    #[error("weighted states are not normalized: sum of traces = {total:.12}")]
    NotNormalized { total: f64 },

    #[error("epsilon must lie in (0,1), got {0}")]
    EpsOutOfRange(f64),

    #[error("no feasible test reaches the required passing probability (numerical support failure)")]
    SupportFailure,

    #[error("Renyi order must lie in (0,1) or (1,2], got {0}")]
    AlphaOutOfRange(f64),

    #[error("relative-entropy variance undefined: supp(rho) is not contained in supp(sigma)")]
    SupportViolation,

    #[error("quantile argument must lie in (0,1), got {0}")]
    POutOfRange(f64),

    #[error("Hoeffding order must lie in (0,1), got {0}")]
    OrderOutOfRange(f64),

    #[error("test operator spectrum [{min:.3e}, {max:.3e}] escapes [0,1]")]
    SpectrumOutOfRange { min: f64, max: f64 },

    #[error("Tr[A+B] must be positive")]
    ZeroTrace,

    #[error("message count must be at least 1, got {0}")]
    BadM(u64),

    #[error("exponent grid is empty")]
    GridEmpty,

    #[error("delta must satisfy 0 < delta < epsilon, got delta {delta}, epsilon {eps}")]
    DeltaOutOfRange { delta: f64, eps: f64 },

    #[error("prior does not factorize as a product: max deviation {deviation:.3e}")]
    NonProductPrior { deviation: f64 },

    #[error("precoder is not total: {0}")]
    PartialPrecoder(String),

    #[error("input-state marginal constraint violated: Frobenius deviation {deviation:.3e}")]
    MarginalConstraintViolated { deviation: f64 },

    #[error("exact enumeration of {count} codebooks exceeds the cap {cap}; use Monte-Carlo mode")]
    EnumerationTooLarge { count: u128, cap: u64 },

    #[error("simulation dimension {dim} exceeds the cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("probability vector invalid: {0}")]
    BadProbability(String),
}

pub type Result<T> = std::result::Result<T, Error>;
