//! Permutation calibration of the detector threshold, plus the end-to-end
//! single-scale detection procedure.
//!
//! Under the no-change null hypothesis the rows of the series are
//! exchangeable, so each of M random row permutations yields a draw of the
//! trace maximum from the null distribution. The detection threshold is the
//! empirical (1 - alpha) quantile of those maxima, and each detected change
//! receives the finite-sample-corrected p-value
//!
//! ```text
//! p = (1 + #{m : T^[m] >= height}) / (M + 1).
//! ```

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{
    detector_trace, select_changes, ChangePointSet, DetectorConfig, DetectorTrace, ProductPanel,
};
use crate::margins::MultivariateSeries;
use crate::util::tolerant_ceil;
use crate::{MopedError, Result};

/// Number of permutations, significance level, and RNG seed for calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationConfig {
    #[serde(rename = "M")]
    m: usize,
    alpha: f64,
    seed: u64,
}

impl PermutationConfig {
    /// Validates and builds a calibration configuration.
    ///
    /// Requires `M >= 1` and `alpha` in (0, 1).
    pub fn new(m: usize, alpha: f64, seed: u64) -> Result<Self> {
        if m < 1 {
            return Err(MopedError::InvalidConfig(
                "number of permutations M must be at least 1".into(),
            ));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(MopedError::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self { m, alpha, seed })
    }

    /// Number of permutations M.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Significance level.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Base RNG seed; permutation m uses substream (seed, m).
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Null distribution summary: the M permuted trace maxima and the threshold
/// derived from them.
#[derive(Debug, Clone)]
pub struct NullStatistics {
    t_max: Vec<f64>,
    threshold: f64,
}

impl NullStatistics {
    /// Builds the summary from raw permuted maxima, deriving the threshold
    /// as the ceil((1 - alpha) * (M + 1))-th smallest of `t_max` (clamped to
    /// the largest).
    pub fn from_maxima(t_max: Vec<f64>, alpha: f64) -> Result<Self> {
        if t_max.is_empty() {
            return Err(MopedError::EmptyResults);
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(MopedError::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !t_max.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(MopedError::InvalidData(
                "null maxima must be finite and nonnegative".into(),
            ));
        }
        let m = t_max.len();
        let mut sorted = t_max.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = tolerant_ceil((1.0 - alpha) * (m + 1) as f64).clamp(1, m);
        let threshold = sorted[rank - 1];
        Ok(Self { t_max, threshold })
    }

    /// The permuted trace maxima, in permutation order.
    pub fn t_max(&self) -> &[f64] {
        &self.t_max
    }

    /// The calibrated detection threshold C.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of permutations M.
    pub fn m(&self) -> usize {
        self.t_max.len()
    }
}

/// Estimates the null distribution of the trace maximum by row permutation.
///
/// Each permutation m shuffles whole rows of the series with an independent
/// RNG substream derived from `(seed, m)` — coordinates are never permuted
/// separately, preserving cross-sectional dependence — and records the
/// maximum of the resulting detector trace. Results are identical for any
/// evaluation order or degree of parallelism.
pub fn permutation_null(
    series: &MultivariateSeries,
    config: &DetectorConfig,
    pconfig: &PermutationConfig,
) -> Result<NullStatistics> {
    let n = series.n();
    let g = config.g();
    if n < 2 * g {
        return Err(MopedError::SeriesTooShort { n, bandwidth: g });
    }
    let panel = ProductPanel::from_series(series);
    let radii = series.radii();
    let k = config.k();

    let t_max: Vec<f64> = (0..pconfig.m())
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(pconfig.seed());
            rng.set_stream(m as u64 + 1);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            crate::detector::trace_values(radii, &panel, Some(&order), g, k)
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect();

    NullStatistics::from_maxima(t_max, pconfig.alpha())
}

/// Finite-sample-corrected permutation p-value for a detector height.
pub fn p_value(height: f64, null: &NullStatistics) -> f64 {
    let exceed = null.t_max.iter().filter(|&&t| t >= height).count();
    (1 + exceed) as f64 / (null.m() + 1) as f64
}

/// Everything produced by one single-scale detection run.
#[derive(Debug, Clone)]
pub struct MopedRun {
    /// The observed detector trace.
    pub trace: DetectorTrace,
    /// The permutation null and threshold.
    pub null: NullStatistics,
    /// Selected change points with p-values attached.
    pub changes: ChangePointSet,
}

/// Runs the full single-scale procedure and returns all intermediate
/// artifacts: observed trace, permutation null, and the selected change
/// points with p-values.
pub fn moped_run(
    series: &MultivariateSeries,
    config: &DetectorConfig,
    pconfig: &PermutationConfig,
) -> Result<MopedRun> {
    let trace = detector_trace(series, config)?;
    let null = permutation_null(series, config, pconfig)?;
    let mut changes = select_changes(&trace, null.threshold());
    for point in changes.points_mut() {
        point.p_value = Some(p_value(point.height, &null));
    }
    Ok(MopedRun {
        trace,
        null,
        changes,
    })
}

/// Single-scale change point detection: trace, permutation threshold,
/// eta-criterion selection, p-values.
pub fn moped(
    series: &MultivariateSeries,
    config: &DetectorConfig,
    pconfig: &PermutationConfig,
) -> Result<ChangePointSet> {
    Ok(moped_run(series, config, pconfig)?.changes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_series(n: usize, d: usize, seed: u64) -> MultivariateSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = Array2::from_shape_fn((n, d), |_| {
            let u: f64 = rng.random();
            (1.0 - 0.9999 * u).recip().sqrt()
        });
        MultivariateSeries::from_pareto2(values).unwrap()
    }

    #[test]
    fn threshold_follows_order_statistic_rule() {
        // M = 200, alpha = 0.05: ceil(0.95 * 201) = 191st smallest
        let maxima: Vec<f64> = (1..=200).map(|i| i as f64).collect();
        let null = NullStatistics::from_maxima(maxima, 0.05).unwrap();
        assert_eq!(null.threshold(), 191.0);

        // alpha = 1/(M+1): rank M+1 clamps to the maximum
        let maxima: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let null = NullStatistics::from_maxima(maxima, 1.0 / 11.0).unwrap();
        assert_eq!(null.threshold(), 10.0);

        // M = 4, alpha = 0.5: ceil(0.5 * 5) = 3rd smallest
        let null = NullStatistics::from_maxima(vec![4.0, 2.0, 1.0, 3.0], 0.5).unwrap();
        assert_eq!(null.threshold(), 3.0);
    }

    #[test]
    fn p_values_match_hand_counts() {
        let null = NullStatistics::from_maxima(vec![1.0, 2.0, 3.0, 4.0], 0.5).unwrap();
        assert_eq!(p_value(2.5, &null), 0.6);
        assert_eq!(p_value(0.0, &null), 1.0);
        assert_eq!(p_value(5.0, &null), 0.2);
        // ties count as exceedances
        assert_eq!(p_value(4.0, &null), 0.4);
    }

    #[test]
    fn p_value_bounds_and_monotonicity() {
        let maxima: Vec<f64> = (0..200).map(|i| (i as f64).sin().abs() * 3.0).collect();
        let null = NullStatistics::from_maxima(maxima, 0.05).unwrap();
        let floor = 1.0 / 201.0;
        let mut last = 1.0;
        for step in 0..=60 {
            let height = step as f64 * 0.1;
            let p = p_value(height, &null);
            assert!((floor..=1.0).contains(&p));
            assert!(p <= last + 1e-15);
            last = p;
        }
    }

    #[test]
    fn permutation_null_is_deterministic_and_stream_separated() {
        let series = random_series(200, 2, 31);
        let config = DetectorConfig::new(40, 8, 0.4).unwrap();
        let pconfig = PermutationConfig::new(16, 0.1, 12345).unwrap();

        let a = permutation_null(&series, &config, &pconfig).unwrap();
        let b = permutation_null(&series, &config, &pconfig).unwrap();
        assert_eq!(a.t_max(), b.t_max());
        assert_eq!(a.threshold(), b.threshold());
        assert!(a.t_max().iter().all(|v| *v >= 0.0));

        // a different seed must give a different null (overwhelmingly)
        let other = PermutationConfig::new(16, 0.1, 54321).unwrap();
        let c = permutation_null(&series, &config, &other).unwrap();
        assert_ne!(a.t_max(), c.t_max());
    }

    #[test]
    fn moped_results_are_consistent_and_deterministic() {
        let series = random_series(300, 3, 77);
        let config = DetectorConfig::new(50, 10, 0.4).unwrap();
        let pconfig = PermutationConfig::new(40, 0.1, 7).unwrap();

        let run = moped_run(&series, &config, &pconfig).unwrap();
        for point in run.changes.iter() {
            assert!(point.height > run.null.threshold());
            let p = point.p_value.unwrap();
            assert!((1.0 / 41.0..=1.0).contains(&p));
            assert_eq!(p, p_value(point.height, &run.null));
            assert_eq!(point.bandwidth, 50);
            assert_eq!(point.rank, 10);
        }

        let again = moped(&series, &config, &pconfig).unwrap();
        assert_eq!(run.changes, again);
    }

    #[test]
    fn short_series_is_rejected_up_front() {
        let series = random_series(50, 2, 1);
        let config = DetectorConfig::new(30, 5, 0.4).unwrap();
        let pconfig = PermutationConfig::new(10, 0.1, 1).unwrap();
        assert!(matches!(
            moped(&series, &config, &pconfig).unwrap_err(),
            MopedError::SeriesTooShort { n: 50, bandwidth: 30 }
        ));
    }

    #[test]
    fn config_validation() {
        assert!(PermutationConfig::new(0, 0.05, 1).is_err());
        assert!(PermutationConfig::new(10, 0.0, 1).is_err());
        assert!(PermutationConfig::new(10, 1.0, 1).is_err());
        assert!(PermutationConfig::new(1, 0.5, 1).is_ok());
        assert!(NullStatistics::from_maxima(vec![], 0.05).is_err());
        assert!(NullStatistics::from_maxima(vec![f64::NAN], 0.05).is_err());
    }
}
