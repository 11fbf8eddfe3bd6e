use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A requested object would exceed the configured entry cap.
    #[error("size cap exceeded: {requested} entries requested, cap is {cap}")]
    SizeCap { requested: u128, cap: usize },

    /// Malformed or inconsistent input. `field` names the offending item.
    #[error("invalid input in `{field}`: {message}")]
    Input { field: String, message: String },

    /// An operation was called outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input {
            field: field.into(),
            message: message.into(),
        }
    }
}
