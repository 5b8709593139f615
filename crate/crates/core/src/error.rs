use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("set expanded to horizon {horizon} but the window reaches {needed}")]
    HorizonTooSmall { horizon: f64, needed: f64 },

    #[error("thickness probe inconclusive within horizon {horizon}")]
    Inconclusive { horizon: f64 },

    #[error("eigenvalues did not converge after {levels} grid refinements (last change {change:e})")]
    NoConvergence { levels: usize, change: f64 },

    #[error("truncation too small: boundary mass {mass:e} exceeds tolerance at X = {half_width}")]
    TruncationTooSmall { mass: f64, half_width: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("adaptive quadrature exceeded depth {depth} on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64, depth: usize },

    #[error("ill-conditioned fit: only {points} samples in the {window} window")]
    IllConditionedFit { window: &'static str, points: usize },

    #[error("set horizon {horizon} does not cover the grid half-width {half_width}")]
    GridSetMismatch { horizon: f64, half_width: f64 },

    #[error("inverse iteration did not converge after {iterations} steps")]
    EigenIterationFailure { iterations: usize },

    #[error("only {captured:.3e} of the squared norm is captured by {modes} modes (defect {defect:e})")]
    InsufficientModes { modes: usize, captured: f64, defect: f64 },

    #[error("t = {t} lies within the resonant guard band of {multiple}·π/2")]
    ResonantTime { t: f64, multiple: u64 },
}

impl Error {
    /// Precondition failures map to exit code 2, numeric failures to 3.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::TruncationTooSmall { .. }
                | Error::QuadratureFailure { .. }
                | Error::EigenIterationFailure { .. }
                | Error::InsufficientModes { .. }
                | Error::Inconclusive { .. }
                | Error::IllConditionedFit { .. }
        )
    }
}
