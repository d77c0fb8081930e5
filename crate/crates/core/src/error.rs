use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate pulse width: pulse.width = {0} must be positive")]
    DegeneratePulseWidth(f64),

    #[error("invalid {key}: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    /// The k-grid does not cover enough of the pulse spectrum.
    #[error("spectral truncation: grid.extent = {extent} is below the minimum {minimum} (units of the pulse width)")]
    SpectralTruncation { extent: f64, minimum: f64 },

    /// The pulse spectrum is narrower than the k-grid can resolve.
    #[error("spectral support unresolved: linewidth {linewidth:e} is below {min_samples} grid steps of {step:e}")]
    UnresolvedSpectrum {
        linewidth: f64,
        step: f64,
        min_samples: usize,
    },

    #[error("drive quadrature did not converge: boundary spectral density is {boundary_ratio:e} of the peak")]
    QuadratureNonConvergence { boundary_ratio: f64 },

    #[error("time step {step} exceeds the smallest retardation delay {delay}")]
    StepTooLarge { step: f64, delay: f64 },

    #[error("integration unstable: |alpha_{atom}| = {magnitude} at t = {time}")]
    Instability {
        atom: usize,
        time: f64,
        magnitude: f64,
    },

    #[error("singular system at dk = {delta_k:e} (condition number {condition:e})")]
    SingularSystem { delta_k: f64, condition: f64 },

    #[error("linear solve residual {residual:e} exceeds tolerance at dk = {delta_k:e}")]
    ResidualTooLarge { delta_k: f64, residual: f64 },

    #[error("operation requires {expected} atom(s), scenario has {actual}")]
    AtomCount { expected: usize, actual: usize },

    #[error("operation requires a {expected} input pulse")]
    PulseShapeMismatch { expected: &'static str },

    #[error("closed form `{variant}` does not apply: {reason}")]
    VariantMismatch {
        variant: &'static str,
        reason: String,
    },

    #[error("time {time} lies outside the trajectory window [0, {end}]")]
    TimeOutOfRange { time: f64, end: f64 },
}

impl Error {
    /// Errors caused by the inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DegeneratePulseWidth(_)
                | Error::InvalidParameter { .. }
                | Error::SpectralTruncation { .. }
                | Error::UnresolvedSpectrum { .. }
                | Error::StepTooLarge { .. }
                | Error::AtomCount { .. }
                | Error::PulseShapeMismatch { .. }
                | Error::VariantMismatch { .. }
                | Error::TimeOutOfRange { .. }
        )
    }
}
