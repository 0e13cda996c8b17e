use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid derivative: {0}")]
    InvalidDerivative(String),
    #[error("cyclic substitution: `{0}` occurs in a binding value")]
    CyclicSubstitution(String),
    #[error("missing binding for `{0}`")]
    MissingBinding(String),
    #[error("division by zero while evaluating")]
    DivisionByZero,
    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("jet order overflow: {0}")]
    JetOrder(String),
    #[error("ansatz violation: coefficient of `{target}` depends on `{atom}`")]
    Ansatz { target: String, atom: String },
    #[error("invalid generator target `{0}`")]
    InvalidTarget(String),
    #[error("no closed-form flow: {0}")]
    NoClosedForm(String),
    #[error("singular transformation: {0}")]
    SingularTransformation(String),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown coordinate `{name}` at {line}:{column}")]
    UnknownCoordinate {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("nonlinear ansatz: {0}")]
    NonlinearAnsatz(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("{0}")]
    Io(String),
}
