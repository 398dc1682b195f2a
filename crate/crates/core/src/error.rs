use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("order error: {0}")]
    Order(String),
    #[error("unsupported orientation: {0}")]
    UnsupportedOrientation(String),
    #[error("unsupported refinement flag {0} (only 111 is implemented)")]
    UnsupportedRefinement(u32),
    #[error("inverted or degenerate element (det J = {0:e})")]
    InvertedElement(f64),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("state error: {0}")]
    State(String),
    #[error("mesh is not 1-irregular: {0}")]
    Irregularity(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("matrix not positive definite (pivot {pivot})")]
    NotSpd { pivot: usize },
    #[error("static condensation failed: {0}")]
    Condensation(String),
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solve { iterations: usize, residual: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error in {file} line {line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
