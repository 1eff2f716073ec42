use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NonHermitianInput { residual: f64, tolerance: f64 },

    #[error("assembled operator is not Hermitian: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NonHermitianAssembly { residual: f64, tolerance: f64 },

    #[error("eigensolver did not converge")]
    ConvergenceFailure,

    #[error("invalid mode truncation M = {m_max}: need M >= 1")]
    InvalidTruncation { m_max: usize },

    #[error("mode truncation M = {m_max} too tight for gauge degree {degree}: need M >= degree + 2")]
    TruncationTooTight { m_max: usize, degree: usize },

    #[error("boundary endomorphism is nearly singular: min |eigenvalue| = {min_abs:.3e}")]
    NearSingularF { min_abs: f64 },

    #[error("gauge is not unitary at sample theta = {theta:.6}: residual {residual:.3e}")]
    NotUnitary { theta: f64, residual: f64 },

    #[error("gauge determinant vanishes at theta = {theta:.6}")]
    SingularGauge { theta: f64 },

    #[error("boundary constraint elimination is rank deficient ({detail})")]
    ConstraintRankFailure { detail: String },

    #[error("path refinement exhausted after {samples} samples")]
    RefinementExhausted { samples: usize },

    #[error("crossing census ({census}) disagrees with counted flow ({counted})")]
    InconsistentCensus { census: i64, counted: i64 },

    #[error("cutoff {cutoff} lies within {tolerance:.1e} of eigenvalue {eigenvalue}")]
    CutoffOnEigenvalue { cutoff: f64, eigenvalue: f64, tolerance: f64 },

    #[error("projection window not calibrated: eigenvalue {eigenvalue} within {buffer:.1e} of window edge {edge}")]
    WindowNotCalibrated { eigenvalue: f64, edge: f64, buffer: f64 },

    #[error("phase jump {jump:.3} rad between adjacent samples; increase the sample count")]
    PhaseJumpTooLarge { jump: f64 },

    #[error("total phase {turns:.9} turns is not an integer")]
    NonIntegerWinding { turns: f64 },

    #[error("Toeplitz index mismatch: symbol winding gives {classical}, relative index gives {relative}")]
    ToeplitzMismatch { classical: i64, relative: i64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
