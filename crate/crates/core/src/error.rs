use thiserror::Error;

/// Errors raised by the filtering, metrics and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no recommendations")]
    EmptyInput,

    #[error("{what} {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("class frequency must be at least 1")]
    ZeroFrequency,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{labels} labels for {recommendations} recommendations")]
    LabelMismatch {
        labels: usize,
        recommendations: usize,
    },

    #[error("unknown cluster head {0}")]
    UnknownClusterHead(u32),

    #[error("scenario field `{field}`: {message}")]
    Scenario {
        field: &'static str,
        message: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(what: &'static str, value: f64, min: f64, max: f64) -> Result<f64> {
    if value.is_finite() && (min..=max).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            what,
            value,
            min,
            max,
        })
    }
}
