use thiserror::Error;

/// Errors raised by the simulation and auditing routines.
///
/// Irregular points (nodes, singularities) met during integration are not
/// errors: they are reported as trajectory statuses.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (grid layout, missing potential cap, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid input value (NaN, empty coefficient list, wrong dimension, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A point lies outside the domain covered by a grid.
    #[error("position {position:?} lies outside the domain {extent:?}")]
    OutOfDomain {
        position: Vec<f64>,
        extent: Vec<(f64, f64)>,
    },

    /// A documented precondition does not hold (unnormalized density, irregular start point, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Too little data to compute a statistic.
    #[error("statistics error: {0}")]
    Statistics(String),

    /// A numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 1,
            Error::Input(_)
            | Error::OutOfDomain { .. }
            | Error::Precondition(_)
            | Error::Statistics(_)
            | Error::Io(_)
            | Error::Csv(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
