use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lexical error at byte {offset}: {message}")]
    Lex { offset: usize, message: String },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("nondifferentiable tie at a kink: {0}")]
    Kink(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unknown catalog entry '{0}'")]
    UnknownPair(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty sampling plan")]
    EmptyPlan,
    #[error("improper restriction: every value on the grid is +inf")]
    Improper,
    #[error("not prox-bounded on grid")]
    NotProxBounded,
    #[error("gradient evaluation failed at {0:?}")]
    Gradient(Vec<f64>),
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
