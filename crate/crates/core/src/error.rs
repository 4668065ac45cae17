use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid limits: {0}")]
    InvalidLimits(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate density: {0}")]
    DegenerateDensity(String),

    #[error("duplicate points at indices {first} and {second}")]
    DuplicatePoints { first: usize, second: usize },

    #[error("time step {dt} s is too coarse for duration {duration} s")]
    TooCoarse { dt: f64, duration: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("empty mask: acceleration factor undefined")]
    EmptyMask,

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("parse error in {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("missing bundle files: {}", .0.join(", "))]
    MissingFiles(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn parse(what: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            msg: msg.into(),
        }
    }
}
