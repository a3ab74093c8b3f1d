use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("need at least {needed} moment matrices, got {got}")]
    InsufficientMoments { needed: usize, got: usize },

    #[error("moment S_{index} is not Hermitian (max |S - S*| = {deviation:e})")]
    NotHermitian { index: usize, deviation: f64 },

    #[error("moment S_{index} has shape {rows}x{cols}, expected {n}x{n}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },

    #[error("invalid moment data: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("x_0..x_{{dN-1}} are numerically dependent (smallest singular value {sigma_min:e}); Γ_(d-1) is not positive definite")]
    DependentDomain { sigma_min: f64 },

    #[error("projections of the domain complement onto N_i are numerically dependent (smallest singular value {sigma_min:e})")]
    IllConditionedProjection { sigma_min: f64 },

    #[error("parameter has operator norm {norm} > 1")]
    NormViolation { norm: f64 },

    #[error("parameter is {rows}x{cols}, deficiency subspaces have dimension {q}")]
    ParameterShape { rows: usize, cols: usize, q: usize },

    #[error("parameter is not admissible (margin {margin:e})")]
    NotAdmissible { margin: f64 },

    #[error("parameter is not an isometry (singular values deviate from 1 by {deviation:e})")]
    NotIsometric { deviation: f64 },

    #[error("dimension mismatch: dim D(A) + q = {got}, ambient dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("resolvent system is singular at λ = {re} + {im}i")]
    SingularSystem { re: f64, im: f64 },

    #[error("λ = {re} + {im}i must not be real")]
    RealSpectralParameter { re: f64, im: f64 },

    #[error("contour results changed by {change:e} when the radius was doubled")]
    RadiusTooSmall { change: f64 },

    #[error("transform has no rational structure (λ-dependent parameter); use Perron inversion")]
    NotRational,

    #[error("Perron inversion did not converge: {0}")]
    NotConverged(String),

    #[error("numerical kernel of Γ_(r+1) has dimension {dim}, expected 1")]
    NullSpaceNotOneDim { dim: usize },

    #[error("kernel vector of Γ_(r+1) has vanishing last entry ({last:e})")]
    NormalizationFail { last: f64 },
}
