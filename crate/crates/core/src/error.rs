use thiserror::Error;

use crate::exprlang::{EvalError, ParseError};
use crate::jets::JetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model document error: {0}")]
    Schema(String),
    #[error("parse error in {context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("unbound symbol `{name}` in {context}")]
    Unbound { context: String, name: String },
    #[error("point {point:?} is outside the chart (guard value {guard})")]
    ChartViolation { point: [f64; 4], guard: f64 },
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("integration failed: {0}")]
    Integration(String),
}

impl Error {
    /// True for failures caused by evaluating at a bad point rather than by
    /// bad input.
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            Error::Singular(_) | Error::ChartViolation { .. } | Error::Integration(_)
        )
    }
}

impl From<JetError> for Error {
    fn from(e: JetError) -> Self {
        match e {
            JetError::Singular { .. } => Error::Singular(e.to_string()),
            other => Error::Config(other.to_string()),
        }
    }
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Jet(j) => j.into(),
            EvalError::Unbound(name) => Error::Unbound {
                context: "expression".into(),
                name,
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
