use thiserror::Error;

/// Errors surfaced by any stage of the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("signature error: {0}")]
    Signature(String),

    #[error("sort error: {0}")]
    Sort(String),

    #[error("fragment violation at level {level}: {msg}")]
    FragmentViolation { level: u8, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn fragment(level: u8, msg: impl Into<String>) -> Self {
        Error::FragmentViolation { level, msg: msg.into() }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
