use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular kernel evaluation: {0}")]
    Singular(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("degenerate wall kernel: {0}")]
    DegenerateKernel(String),
    #[error("geometry bug trap: {0}")]
    Geometry(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error("accounting error: {0}")]
    Accounting(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("eigen solver did not converge at lambda = {0}")]
    NoConvergence(String),
    #[error("memory guard: {nodes} nodes exceeds cap {cap}")]
    TooLarge { nodes: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("{what} is not finite")))
    }
}
