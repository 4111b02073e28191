use thiserror::Error;

pub type Result<T> = std::result::Result<T, DisparityError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisparityError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("degenerate reference: {0}")]
    DegenerateReference(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("group {group} has zero weighted count")]
    EmptyGroup { group: usize },

    #[error("design error: {0}")]
    DesignError(String),

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("parse error at row {row}: {message}")]
    ParseError { row: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl DisparityError {
    /// True for failures of the numerics (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DisparityError::DomainError(_)
                | DisparityError::DegenerateReference(_)
                | DisparityError::DegenerateRegression(_)
                | DisparityError::DegenerateTest(_)
        )
    }

    pub(crate) fn parse(row: usize, message: impl Into<String>) -> Self {
        DisparityError::ParseError {
            row,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for DisparityError {
    fn from(err: std::io::Error) -> Self {
        DisparityError::Io(err.to_string())
    }
}
