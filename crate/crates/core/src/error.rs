//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by the detection pipeline.
#[derive(Debug, Error)]
pub enum MopedError {
    /// Input data contain non-finite values, too few columns, or otherwise
    /// violate a documented precondition on the data themselves.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// The series is too short for the requested operation.
    #[error("series of length {n} is too short (need at least {min})")]
    TooShort { n: usize, min: usize },

    /// The exceedance count k exceeds the number of observations available.
    #[error("rank k = {k} exceeds the window length {window}")]
    RankTooLarge { k: usize, window: usize },

    /// A window or segment selection is empty.
    #[error("selected window is empty")]
    EmptyWindow,

    /// A segment between change points has fewer than two observations.
    #[error("segment [{start}, {end}) is too short for TPDM estimation")]
    SegmentTooShort { start: usize, end: usize },

    /// The series is shorter than twice the detector bandwidth.
    #[error("series of length {n} is too short for bandwidth G = {bandwidth}: need n >= 2G")]
    SeriesTooShort { n: usize, bandwidth: usize },

    /// A configuration parameter is outside its admissible range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A correlation matrix has no Cholesky factor.
    #[error("correlation matrix is not positive definite")]
    NotPositiveDefinite,

    /// A simulation scenario specification is inconsistent.
    #[error("invalid scenario specification: {0}")]
    InvalidSpec(String),

    /// Two segmentations being compared cover different numbers of points.
    #[error("segmentations cover different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// An aggregate was requested over an empty collection of results.
    #[error("no results to aggregate")]
    EmptyResults,
}
