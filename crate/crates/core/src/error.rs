use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("every input polynomial is identically zero")]
    AllZero,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("wrong number of hyperplanes: expected {expected}, found {found}")]
    WrongCount { expected: String, found: usize },
    #[error("hyperplane {index} is not fixed (coefficient degree >= 1)")]
    NotFixed { index: usize },
    #[error("hyperplanes are not in general position")]
    NotGeneralPosition,
    #[error("first component f0 is identically zero")]
    FirstComponentZero,
    #[error("pairing is identically zero: the curve lies in {}", match hyperplane { Some(j) => format!("hyperplane {j}"), None => "the hyperplane".to_string() })]
    IdenticallyZero { hyperplane: Option<usize> },
    #[error("hyperplane coefficients have a common zero near {re} + {im}i")]
    CommonZero { re: f64, im: f64 },
    #[error("family is not blowing up (verdict: {verdict})")]
    NotBlowingUp { verdict: String },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("bad template parameters: {0}")]
    BadParams(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Errors that signal a degenerate scene rather than a failed hypothesis.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::IdenticallyZero { .. }
                | Error::FirstComponentZero
                | Error::ZeroPolynomial
                | Error::AllZero
        )
    }

    /// Prefix a validation path, leaving other variants untouched.
    pub fn at(self, prefix: &str) -> Error {
        match self {
            Error::Validation { path, message } => Error::Validation {
                path: if path.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{prefix}.{path}")
                },
                message,
            },
            other => Error::Validation {
                path: prefix.to_string(),
                message: other.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
