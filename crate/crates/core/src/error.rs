use thiserror::Error;

/// Errors produced by the rating, identification and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("argument out of supported range: {0}")]
    OutOfRange(String),

    #[error("outcome index {index} outside 0..{levels}")]
    OutcomeIndex { index: usize, levels: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model parameters are not symmetric: {0}")]
    Asymmetric(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },

    #[error("rank-deficient data: {0}")]
    RankDeficient(String),

    #[error("sequence index {t} is not after the previous index {previous}")]
    OutOfOrder { t: usize, previous: usize },

    #[error("match {index}: {source}")]
    AtMatch {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("window error: {0}")]
    Window(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::RankDeficient(_) | Error::Degenerate(_) => true,
            Error::AtMatch { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
