use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{file}:{line}:{column}: {message}")]
    Syntax {
        file: &'static str,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid model: {0}")]
    Validation(String),
    #[error("only 1-unbounded models are supported (model checking is undecidable for k>=2)")]
    MultipleResources,
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("symbol `{symbol}` is not in the alphabet of {context}")]
    Alphabet { symbol: char, context: String },
    #[error("malformed pushdown system: {0}")]
    Pushdown(String),
    #[error("saturation did not converge within {cap} outer iterations")]
    IterationCap { cap: usize },
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn syntax(file: &'static str, line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            file,
            line,
            column,
            message: message.into(),
        }
    }
}
