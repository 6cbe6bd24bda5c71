use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: unsupported mask format: {reason}", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{}: malformed mask: {reason}", path.display())]
    MalformedMask { path: PathBuf, reason: String },

    #[error("class index {value} out of range at ({x},{y})")]
    ClassOutOfRange { value: u8, x: usize, y: usize },

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("image {image_id}: missing ground truth")]
    MissingGroundTruth { image_id: String },

    #[error("unknown component `{0}`")]
    UnknownComponent(String),

    #[error("class {class_id}: no defined score for any component")]
    NoDefinedScore { class_id: usize },

    #[error("no defined class scores to average")]
    NoDefinedScores,

    #[error("image {image_id}: no image-level labels")]
    EmptyImageLabels { image_id: String },

    #[error("selection does not cover class {0}")]
    IncompleteSelection(usize),

    #[error("csv: {0}")]
    Csv(String),

    #[error("rectangle placement infeasible for image {image_index}: placed {placed} of {requested}")]
    PlacementInfeasible {
        image_index: usize,
        placed: usize,
        requested: usize,
    },

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if !e.is_io_error() {
            return Error::Csv(e.to_string());
        }
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: PathBuf::new(),
                source,
            },
            _ => unreachable!(),
        }
    }
}
