use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range. `key` names the parameter.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// Arguments are individually valid but inconsistent with each other.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A numerical routine failed to reach its tolerance or produced an
    /// unusable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for failures that happen after validation, during computation.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub(crate) fn ensure_positive(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            key,
            format!("must be non-negative and finite, got {value}"),
        ))
    }
}
