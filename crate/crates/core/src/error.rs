use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index:?} out of range for size {size:?}")]
    Index { index: Vec<i64>, size: Vec<usize> },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("no voxel exceeds threshold {0}")]
    EmptyBounds(f64),

    #[error("crop bounds do not intersect the image extent")]
    EmptyCrop,

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("parse error in {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error("truncated data: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },

    #[error("unsupported pixel type: {0}")]
    UnsupportedType(String),

    #[error("not a GIPL file (magic {0:#010x})")]
    NotGipl(u32),

    #[error("not a NIfTI-1 single file: {0}")]
    NotNifti(String),

    #[error("unsupported cell: {0}")]
    UnsupportedCell(String),

    #[error("cannot decode picture: {0}")]
    Decode(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("matrix is not rigid: {0}")]
    NotRigid(String),

    #[error("degenerate control grid: {0}")]
    DegenerateGrid(String),

    #[error("objective is not finite at the starting point")]
    InvalidStart,

    #[error("no consensus: best model has {found} inliers, {required} required")]
    NoConsensus { found: usize, required: usize },
}

impl Error {
    pub(crate) fn parse(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
