use thiserror::Error;

#[derive(Debug, Error)]
pub enum RcnError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("index ({i}, {j}) outside the ghost-extended grid")]
    IndexOutOfRange { i: isize, j: isize },
    #[error("non-finite value at node ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("nonpositive value {value} encountered where a logarithm is taken ({what})")]
    Nonpositive { what: &'static str, value: f64 },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("field file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("lower bound violated: {0}")]
    BoundViolation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RcnError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(RcnError::InvalidInput(msg.into()))
}
