//! Change point detection for the extremal dependence structure of
//! multivariate heavy-tailed time series.
//!
//! The central object is the tail pairwise dependence matrix (TPDM) of a
//! regularly varying random vector: a d x d summary of pairwise dependence
//! among the largest observations. This crate detects changes in that matrix
//! over time with a moving-sum (MOSUM) statistic computed from the most
//! extreme observations in each pair of adjacent windows, calibrates the
//! detection threshold by permutation, and optionally pools detections
//! across several window bandwidths and exceedance counts.
//!
//! Pipeline overview:
//!
//! 1. [`margins`] — put raw data on a common heavy-tailed scale (unit Pareto
//!    with tail index two) via a marginal rank transform.
//! 2. [`tpdm`] — estimate the TPDM on a window or on the segments between
//!    estimated change points.
//! 3. [`detector`] — compute the MOSUM detector trace and select local
//!    maxima above a threshold as change point estimates.
//! 4. [`calibrate`] — choose the threshold as a quantile of the permutation
//!    null distribution of the trace maximum, and attach p-values.
//! 5. [`merge`] — pool estimates across exceedance ranks and bandwidths.
//! 6. [`simulate`] — copula-based scenario generator for power studies.
//! 7. [`metrics`] — segmentation accuracy metrics (covering metric,
//!    V-measure, segment count error histogram).

pub mod calibrate;
pub mod detector;
pub mod error;
pub mod margins;
pub mod merge;
pub mod metrics;
pub mod simulate;
pub mod tpdm;
mod util;

pub use calibrate::{
    moped, moped_run, p_value, permutation_null, MopedRun, NullStatistics, PermutationConfig,
};
pub use detector::{
    detector_trace, select_changes, ChangePoint, ChangePointSet, DetectorConfig, DetectorTrace,
    SlidingTopK,
};
pub use error::MopedError;
pub use margins::{rank_transform_pareto2, MultivariateSeries, RawSeries};
pub use merge::{merge_over_bandwidths, merge_over_ranks, BandwidthLadder, RankLadder, RankSpec};
pub use metrics::{covering_metric, v_measure, QhatHistogram, Segmentation};
pub use simulate::{
    generate_scenario, sample_gaussian_copula, sample_t_copula, CopulaFamily, Margin, Scenario,
    ScenarioSpec, SegmentLaw,
};
pub use tpdm::{estimate_segment_tpdms, estimate_tpdm, TpdmEstimate};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, MopedError>;
