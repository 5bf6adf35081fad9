//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {path}")]
    FileNotFound { path: PathBuf },

    #[error("unsupported image format: {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("corrupt image: {path}: {detail}")]
    CorruptImage { path: PathBuf, detail: String },

    #[error("empty image: width and height must be at least 1")]
    EmptyImage,

    #[error("invalid image data: {0}")]
    InvalidImage(String),

    #[error("{path}:{line}: manifest parse error: {detail}")]
    ManifestParse {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    /// An image referenced by a manifest failed to load or normalize; the
    /// line number points back at the offending entry.
    #[error("{path}:{line}: {source}")]
    ManifestEntry {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid synthetic dataset spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("image size mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    ImageSizeMismatch {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("eigensolver did not converge within {0} sweeps")]
    ConvergenceFailure(usize),

    #[error("degenerate data: no variance above the rank tolerance")]
    DegenerateData,

    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),

    #[error("coefficient count {n} out of range [1, {max}]")]
    CoefficientCountOutOfRange { n: usize, max: usize },

    #[error("k={k} out of range [1, {max}]")]
    KOutOfRange { k: usize, max: usize },

    #[error("model has no training points")]
    EmptyModel,

    #[error("class {class} has no training points")]
    EmptyClass { class: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown label: {label}")]
    UnknownLabel { label: String },

    #[error("empty confusion matrix")]
    EmptyMatrix,

    #[error("component index {index} out of range ({count} retained)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("sample {index}: {source}")]
    SampleError {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sweep cell (n_coeffs={n_coeffs}, rule={rule}): {source}")]
    SweepCell {
        n_coeffs: usize,
        rule: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wraps an I/O error with the path it concerns, mapping `NotFound`
    /// onto the dedicated variant.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound { path }
        } else {
            Error::Io { path, source }
        }
    }
}
