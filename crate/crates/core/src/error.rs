use thiserror::Error;

/// Errors raised by the simulation and design routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A pulse is too short to be represented on the grid.
    #[error("unresolvable pulse: duration {duration:e} s needs more than 3 samples of {dt:e} s")]
    Resolution { duration: f64, dt: f64 },

    /// A field leaks out of the simulation window; `edge_fraction` is the
    /// fraction of the total energy found in the guard band at the edges.
    #[error("field does not fit the time window: edge energy fraction {edge_fraction:e} exceeds {limit:e}")]
    Window { edge_fraction: f64, limit: f64 },

    #[error("integration step too coarse: {0}")]
    Step(String),

    #[error("pixel measurement failed: {0}")]
    Measurement(String),

    #[error("wavelength {wavelength:e} m outside coefficient validity range [{min:e}, {max:e}] m")]
    Validity { wavelength: f64, min: f64, max: f64 },

    /// A design budget cannot be met.
    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
