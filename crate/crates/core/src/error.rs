use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric overflow: exponent {exponent:.3} exceeds cap {cap}")]
    NumericOverflow { exponent: f64, cap: f64 },

    #[error("current solve did not converge at V = {voltage} V (last residual {residual:e} A after {iterations} iterations)")]
    NoConvergence {
        voltage: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("degenerate P-V curve at T = {t_c} degC, G = {g} W/m^2: maximum power {p_max} W is not positive")]
    DegenerateCurve { t_c: f64, g: f64, p_max: f64 },

    #[error("at grid point T = {t_c} degC, G = {g} W/m^2: {source}")]
    AtGridPoint {
        t_c: f64,
        g: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("training made no progress for {epochs} consecutive epochs")]
    NoProgress { epochs: usize },

    #[error("Levenberg-Marquardt normal equations are singular at mu = {mu:e}")]
    SingularHessian { mu: f64 },

    #[error("targets have zero variance; regression coefficient is undefined")]
    DegenerateVariance,

    #[error("controller `{0}` requires a trained model")]
    InvalidController(String),

    #[error("simulation step {step} (t = {time_s} s): {source}")]
    AtStep {
        step: usize,
        time_s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
