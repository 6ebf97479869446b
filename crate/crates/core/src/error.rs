use alloc::string::String;

/// Errors raised by the beamforming core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The scenario admits no beamformer, even at zero covert rate.
    #[error("infeasible scenario: {constraint}")]
    InfeasibleScenario { constraint: String },

    #[error("degenerate channel geometry: {0}")]
    DegenerateGeometry(String),

    /// No randomized candidate satisfied the constraints.
    #[error("rank-one recovery failed: best candidate violates constraints by {violation:e}")]
    RecoveryFailed { violation: f64 },

    #[error("solver failure: {0}")]
    Solver(String),
}

impl Error {
    /// Stable, machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::InfeasibleScenario { .. } => "infeasible-scenario",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::RecoveryFailed { .. } => "recovery-failed",
            Error::Solver(_) => "solver-failure",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
