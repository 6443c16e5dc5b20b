use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} for `{name}` is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("weights do not lie on the simplex: {0}")]
    NotSimplex(String),

    #[error("unknown score name `{0}`")]
    UnknownName(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("singular design matrix: {0}")]
    Singular(String),

    #[error("win rate undefined: all {ties} judgments are ties")]
    AllTies { ties: usize },

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::ModelFormat(msg.into())
    }
}
