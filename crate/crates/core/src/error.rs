use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("division by zero while evaluating expression")]
    DivisionByZero,

    #[error("expression evaluated to a non-finite value")]
    NonFinite,

    #[error("covariance matrix factorization failed (internal error)")]
    Factorization,

    #[error("circulant embedding eigenvalue {0} below tolerance -1e-9")]
    NegativeEigenvalue(f64),

    #[error("linear solve failed (internal error)")]
    LinearSolve,

    #[error("diffusion coefficient not strictly positive near x = {0}")]
    SigmaNotPositive(f64),

    #[error("theta_inverse iteration cap exceeded for target {0}")]
    InverseIteration(f64),

    #[error("subsample factor {factor} does not divide fine step count {fine}")]
    Divisibility { factor: usize, fine: usize },

    #[error("scheme produced a non-finite state at step {step}")]
    BlowUp { step: usize },

    #[error("{0}")]
    InvalidConfig(String),

    #[error("scheme `{0}` not admissible for this problem")]
    SchemeNotAdmissible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
