use thiserror::Error;

/// Every failure the library can report.
///
/// The variant names double as the diagnostic names printed by the CLI, so
/// they are part of its contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel width must be positive, got eps = {0}")]
    NonpositiveEps(f64),

    #[error("spectral weight requested at negative frequency {0}")]
    NegativeFrequency(f64),

    #[error("frequency integral diverges without a cutoff")]
    DivergentIntegral,

    #[error("memory kernel is undefined without a cutoff")]
    DivergentKernel,

    #[error("{operation} does not support the {cutoff} cutoff")]
    UnsupportedCutoff {
        operation: &'static str,
        cutoff: &'static str,
    },

    #[error("adaptive quadrature stalled: error estimate {estimate:.3e} above target {target:.3e}")]
    ToleranceNotMet { estimate: f64, target: f64 },

    #[error("time step {dt} exceeds the resolution limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("memory window {t_mem} too short: {reason}")]
    MemoryTooShort { t_mem: f64, reason: String },

    #[error("run needs {steps} steps, above the budget of {budget}")]
    StepBudgetExceeded { steps: usize, budget: usize },

    #[error("frequency span misses {tail_fraction:.3e} of the spectral weight (limit {limit:.1e})")]
    SpanTooSmall { tail_fraction: f64, limit: f64 },

    #[error("fit window holds {samples} samples, need at least {required}")]
    WindowTooSmall { samples: usize, required: usize },

    #[error("fit window starts at {start}, before the kernel transient ends at {earliest}")]
    WindowTooEarly { start: f64, earliest: f64 },

    #[error("excited population {0:.3e} underflows inside the fit window")]
    AmplitudeUnderflow(f64),

    #[error("bracket [{lo}, {hi}] does not straddle a root")]
    NoBracket { lo: f64, hi: f64 },
}

impl Error {
    /// Short variant name, e.g. `DivergentKernel`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::NonpositiveEps(_) => "NonpositiveEps",
            Error::NegativeFrequency(_) => "NegativeFrequency",
            Error::DivergentIntegral => "DivergentIntegral",
            Error::DivergentKernel => "DivergentKernel",
            Error::UnsupportedCutoff { .. } => "UnsupportedCutoff",
            Error::ToleranceNotMet { .. } => "ToleranceNotMet",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::MemoryTooShort { .. } => "MemoryTooShort",
            Error::StepBudgetExceeded { .. } => "StepBudgetExceeded",
            Error::SpanTooSmall { .. } => "SpanTooSmall",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::WindowTooEarly { .. } => "WindowTooEarly",
            Error::AmplitudeUnderflow(_) => "AmplitudeUnderflow",
            Error::NoBracket { .. } => "NoBracket",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
