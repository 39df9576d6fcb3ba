use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is not valid UTF-8 at line {line}")]
    InputEncoding { line: usize },

    #[error("vocabulary is empty (no word reached the frequency floor)")]
    EmptyVocabulary,

    #[error("co-occurrence matrix is empty")]
    EmptyMatrix,

    #[error("noise distribution needs a non-empty vocabulary")]
    EmptyNoiseSupport,

    #[error("numeric divergence in {context}")]
    Divergence { context: String },

    #[error("cosine is undefined for a zero vector")]
    ZeroVector,

    #[error("zero centroid for definitional set {set}")]
    ZeroCentroid { set: String },

    #[error("directional axis is degenerate: all difference vectors are zero")]
    DegenerateAxis,

    #[error("definitional set {set} is empty")]
    EmptySet { set: String },

    #[error("cell ({word}, {context}) is unobserved; log p(w|c) is undefined there")]
    UnobservedCell { word: String, context: String },

    #[error("operation requires a {expected} model, got {actual}")]
    WrongModelKind { expected: String, actual: String },

    #[error("correlation is undefined: {reason}")]
    UndefinedCorrelation { reason: String },

    #[error("insufficient data: {reason}")]
    InsufficientData { reason: String },

    #[error("min-max normalization is degenerate: all association values are equal")]
    DegenerateNormalization,

    #[error("empty report")]
    EmptyReport,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
