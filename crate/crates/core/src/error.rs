use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical domain error: {0}")]
    NumericalDomain(String),
    #[error("empty section space: {0}")]
    EmptySpace(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("ill-conditioned Gram matrix (condition number {cond:.3e}): {context}")]
    IllConditioned { cond: f64, context: String },
    #[error("point lies in the base locus")]
    BaseLocus,
    #[error("degenerate section space: only constants (d_p = 0)")]
    DegenerateSpace,
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("general position failure: {0}")]
    GeneralPosition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag used in report status columns.
    pub fn status(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Precondition(_) => "precondition",
            Error::NumericalDomain(_) => "numerical-domain",
            Error::EmptySpace(_) => "empty-space",
            Error::QuadratureFailure(_) => "quadrature-failure",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::BaseLocus => "base-locus",
            Error::DegenerateSpace => "degenerate-space",
            Error::RootFinding(_) => "root-finding",
            Error::GeneralPosition(_) => "general-position",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io",
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Precondition(_) | Error::Unsupported(_))
    }
}
