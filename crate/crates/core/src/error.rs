use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("sizing error: {0}")]
    Sizing(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Resonant regime: the dispersive expansion has a zero denominator.
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("null space multiplicity: {0}")]
    Multiplicity(String),

    /// The phonon-number peaks are not resolved (dispersive shift too small
    /// compared to the line widths).
    #[error("unresolved regime: {0}")]
    Regime(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("input data error: {0}")]
    InputData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
