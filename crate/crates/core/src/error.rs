use thiserror::Error;

/// Errors raised by the algebra, dimension and approximation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("elements belong to different models")]
    ModelMismatch,

    #[error("invalid basis index {index:?}: {reason}")]
    InvalidIndex { index: Vec<i64>, reason: String },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("window is zero-dimensional")]
    EmptyWindow,

    #[error("operator is not equivariant for the right action of generator {generator}")]
    NotEquivariant { generator: usize },

    #[error("operator is not self-adjoint")]
    NotSelfAdjoint,

    #[error("the {backend} backend cannot represent {what}")]
    Unrepresentable { backend: &'static str, what: String },

    #[error("numerical backend failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
