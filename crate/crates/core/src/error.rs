use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("domain must be non-empty")]
    EmptyDomain,

    #[error("cost function `{0}` is identically infinite")]
    InfiniteFunction(String),

    #[error("language has no cost functions")]
    EmptyLanguage,

    #[error("feasibility relation of the combined cost function is empty")]
    EmptyFeas,

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("instance does not belong to the expected language: {0}")]
    WrongLanguage(String),

    #[error("table of `{name}` has {found} entries, expected {expected}")]
    TableSize {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid value `{0}`")]
    InvalidValue(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("operation `{0}` is not a polymorphism")]
    NotAPolymorphism(String),

    #[error("restriction to the base vertices leaves the base set")]
    NotClosed,

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Semantic(String),

    #[error("verification mismatch at stage `{stage}`: {detail}")]
    Mismatch { stage: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
