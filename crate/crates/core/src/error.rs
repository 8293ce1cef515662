use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty structure: {0} contains no CA atoms")]
    EmptyStructure(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("solver did not converge after {iterations} iterations (primal {primal:.3e}, dual {dual:.3e}, complementarity {complementarity:.3e})")]
    Convergence {
        iterations: usize,
        primal: f64,
        dual: f64,
        complementarity: f64,
    },

    #[error("quadratic program is infeasible: {0}")]
    Infeasible(String),

    #[error("split error: {0}")]
    Split(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
