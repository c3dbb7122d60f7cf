use thiserror::Error;

/// Errors surfaced by constructors and operations across the toolkit.
#[derive(Debug, Error)]
pub enum RadarError {
    /// A parameter or combination of parameters is outside its valid domain.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// A STAR-RIS response violates the per-atom energy split.
    #[error("energy conservation violated: {0}")]
    EnergyConservation(String),

    /// An inspected cell produced a steering vector with no energy.
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),

    /// A Monte Carlo sample is too small to resolve the requested rate.
    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),
}

pub type Result<T> = std::result::Result<T, RadarError>;
