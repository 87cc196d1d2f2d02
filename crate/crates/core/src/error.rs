use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage an error was raised in, used to attribute failures in end-to-end runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingestion,
    Background,
    Segmentation,
    GaitCycle,
    Features,
    Training,
    Evaluation,
    Output,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Ingestion => "ingestion",
            Stage::Background => "background",
            Stage::Segmentation => "segmentation",
            Stage::GaitCycle => "gait-cycle",
            Stage::Features => "features",
            Stage::Training => "training",
            Stage::Evaluation => "evaluation",
            Stage::Output => "output",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("no frame files found in {0}")]
    EmptyDirectory(PathBuf),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("cannot decode {path}: {reason}")]
    DecodeError { path: PathBuf, reason: String },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("sequence needs at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("no periodicity found in width signal")]
    NoPeriodicity,
    #[error("sequence too short: need {needed} frames, got {got}")]
    SequenceTooShort { needed: usize, got: usize },
    #[error("need at least {needed} gait cycles, got {got}")]
    InsufficientCycles { needed: usize, got: usize },
    #[error("feature window has no usable frames")]
    EmptyWindow,
    #[error("bad dimensions for wavelet transform: {0}")]
    BadDimensions(String),
    #[error("bad feature component length: {0}")]
    BadComponentLength(String),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model format error at line {line}: {reason}")]
    FormatError { line: usize, reason: String },
    #[error("unsupported model version {0:?}")]
    VersionMismatch(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("walker spec out of bounds: {0}")]
    SpecOutOfBounds(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("csv error in {path}: {reason}")]
    Csv { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage} stage failed for {context}: {source}")]
    Stage {
        stage: Stage,
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch { expected: expected.to_string(), found: found.to_string() }
    }

    /// Wraps the error with the stage and item it came from.
    pub fn at(self, stage: Stage, context: impl Into<String>) -> Self {
        Error::Stage { stage, context: context.into(), source: Box::new(self) }
    }

    /// The innermost error, skipping stage attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stage of the outermost attribution, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn at_stage(self, stage: Stage, context: impl Into<String>) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn at_stage(self, stage: Stage, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| e.at(stage, context))
    }
}
