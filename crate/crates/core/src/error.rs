use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter space: {}", .0.join("; "))]
    InvalidSpace(Vec<String>),

    #[error("parameter `{param}`: unknown category `{label}`")]
    UnknownCategory { param: String, label: String },

    #[error("parameter `{param}`: {msg}")]
    InvalidValue { param: String, msg: String },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("expected vector of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expression error: {0}")]
    Expr(String),

    #[error("infeasible context for `{target}`: lower bound {lower} exceeds upper bound {upper}")]
    InfeasibleContext { target: String, lower: f64, upper: f64 },

    #[error("kernel executable not found: {}", .0.display())]
    KernelMissing(PathBuf),

    #[error("space fingerprint mismatch: store has {found}, space is {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("{}:{line}: {msg}", .path.display())]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("unsupported document version `{found}` (expected `{expected}`)")]
    Version { expected: String, found: String },

    #[error("config {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not enough samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("code generation: {0}")]
    Codegen(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}
