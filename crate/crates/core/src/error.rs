use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("set is not an element of the boundary arc algebra: {0}")]
    NotArcAlgebra(String),

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("analytic disc is not feasible (margin {margin:.3e})")]
    InfeasibleDisc { margin: f64 },

    #[error("grid would need {nodes} nodes, cap is {cap}")]
    NodeCap { nodes: usize, cap: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
