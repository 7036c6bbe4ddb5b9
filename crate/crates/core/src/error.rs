use thiserror::Error;

/// Errors raised by the numerical kernels and the orchestration layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The fractional integral degenerates when the order is zero.
    #[error("singular order: fractional integral requires alpha(t_n) > 0, got {0}")]
    SingularOrder(f64),

    /// A variable order that violates `0 ≤ α(t) ≤ α_* < 1`.
    #[error("inadmissible order: {0} (requires 0 ≤ α(t) ≤ α_* < 1)")]
    InadmissibleOrder(String),

    /// Input data that violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Mode extraction design matrix too ill-conditioned to trust.
    #[error(
        "ill-posed mode extraction: condition number {condition:.3e} exceeds {limit:.0e}; \
         use fewer modes or a wider observation window"
    )]
    IllPosedExtraction { condition: f64, limit: f64 },

    /// A numerical breakdown such as a vanishing step coefficient.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed or incomplete run configuration.
    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    /// File system or CSV failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status: 1 for numerical failures, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical(_) | Self::SingularOrder(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
