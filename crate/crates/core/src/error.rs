use std::fmt;

/// Errors raised by the solvers, graph tools and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("model evaluation is not finite at {0}")]
    ModelEvaluation(Point),

    #[error("velocity search radius {radius} too small: maximizer lies on the search boundary")]
    RadiusTooSmall { radius: f64 },

    #[error("maximizer lies on the boundary of the slope grid; enlarge the grid")]
    EnlargeGrid,

    #[error("model does not support {0}")]
    UnsupportedModel(&'static str),

    #[error("grid too coarse ({reason}); need n >= {required_n}")]
    Resolution { required_n: usize, reason: String },

    #[error("window error: {0}")]
    Window(String),

    #[error("large-time estimate not converged: spread/T = {spread:.3e} > 0.1; increase T")]
    NotConverged { spread: f64 },

    #[error("step size error: {0}")]
    StepSize(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A phase-space sample used in error messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={:?}, v={:?}", self.x, self.v)
    }
}
