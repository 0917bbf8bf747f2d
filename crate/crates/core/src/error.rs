//! Error taxonomy shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone)]
pub enum Error {
    // ---- jets ----
    #[error("jet expansion points differ")]
    BaseMismatch,
    #[error("jet orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("division by a jet with zero constant term")]
    DivisionByZeroConstantTerm,
    #[error("cannot differentiate a jet of order 0")]
    OrderUnderflow,
    #[error("constant term lies on the branch cut of {0}")]
    BranchCutViolation(&'static str),

    // ---- moebius ----
    #[error("matrix is singular (det = 0)")]
    SingularMatrix,
    #[error("automorphy factor cz + d vanishes at the evaluation point")]
    AutomorphyFactorZero,
    #[error("repeated source or target point in Moebius fit")]
    DegeneratePoints,
    #[error("unknown generator symbol `{0}`")]
    UnknownGenerator(String),
    #[error("matrix is not in Gamma(2) modulo sign: {0}")]
    NotInGamma2(String),

    // ---- q-series ----
    #[error("evaluation point is not in the upper half-plane")]
    NotInUpperHalfPlane,
    #[error("no valid tail bound at this point (Im z too small for the majorant)")]
    TailBoundUnavailable,

    // ---- schwarz ----
    #[error("critical point: f' vanishes, the Schwarzian has a pole here")]
    CriticalPoint,
    #[error("sampler returned a jet of order {got}, need at least {need}")]
    InsufficientJetOrder { need: usize, got: usize },
    #[error("sampler failure: {0}")]
    SamplerFailure(String),

    // ---- ode ----
    #[error("expansion point coincides with a declared singular point")]
    SingularPoint,
    #[error("path passes within {margin:.3e} of a singular point (threshold {threshold:.3e})")]
    PathTooCloseToSingularity { margin: f64, threshold: f64 },
    #[error("required step length underflows the working precision")]
    StepUnderflow,
    #[error("path is not closed")]
    NotClosed,
    #[error("series basepoint outside the convergence/continuation reach")]
    SeriesDivergence,

    // ---- equivariant ----
    #[error("second component of the candidate vanishes at all probe points")]
    DegenerateVmf,
    #[error("scalar form vanishes at all probe points")]
    DegenerateScalar,
    #[error("Moebius fit failed to verify on held-out probes (residual {residual:.3e})")]
    FitFailure { residual: f64 },
    #[error("recovered representation does not conjugate onto the target: {detail}")]
    ConjugationMismatch { detail: String },

    // ---- examples_monodromy ----
    #[error("deck/loop correspondence could not be resolved: {0}")]
    CorrespondenceUnresolved(String),

    // ---- plumbing ----
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Wrap any displayable error as a sampler failure.
    pub fn sampler<E: std::fmt::Display>(e: E) -> Self {
        Error::SamplerFailure(e.to_string())
    }
}
