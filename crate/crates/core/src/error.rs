use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operation requires the gapped phase (gamma > gamma_c)")]
    GaplessPhase,
    #[error("operation requires the gapless phase (0 < gamma < gamma_c, h < J)")]
    GappedPhase,
    #[error("exceptional point at k = {0}")]
    ExceptionalPoint(f64),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("elliptic integral iteration did not converge")]
    NonConvergence,
    #[error("complete elliptic integral K has a pole at m = 1")]
    PoleAtOne,
    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("finite-difference step too small: {0}")]
    StepTooSmall(String),
    #[error("undefined asymptotic regime: {0}")]
    UndefinedRegime(String),
    #[error("eigendecomposition failed: {0}")]
    EigendecompositionFailure(String),
    #[error("Krylov basis breakdown at dimension {0}")]
    BasisBreakdown(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
