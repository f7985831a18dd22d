//! Empirical estimation of the tail pairwise dependence matrix (TPDM).
//!
//! For a window of a Pareto(2)-standardised series, the estimator keeps the
//! k observations with the largest radii and averages the outer products of
//! their angular components:
//!
//! ```text
//! sigma[i,j] = (d / k) * sum over retained t of X[t,i] * X[t,j] / R[t]^2
//! ```
//!
//! Because the angular components have unit norm, the estimate has trace
//! exactly d, and complete pairwise dependence drives sigma[i,j] to 1.

use std::ops::Range;

use ndarray::Array2;

use crate::margins::MultivariateSeries;
use crate::{MopedError, Result};

/// A TPDM estimate together with the threshold bookkeeping that produced it.
#[derive(Debug, Clone)]
pub struct TpdmEstimate {
    sigma: Array2<f64>,
    k: usize,
    r0: f64,
    window: Range<usize>,
}

impl TpdmEstimate {
    /// The estimated d x d matrix (symmetric, nonnegative entries).
    pub fn sigma(&self) -> &Array2<f64> {
        &self.sigma
    }

    /// Number of retained exceedances.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Radial threshold: the smallest retained radius.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// The index window the estimate was computed on.
    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }

    /// Matrix dimension d.
    pub fn d(&self) -> usize {
        self.sigma.nrows()
    }
}

/// Indices of the k largest radii within `window`, ties broken in favour of
/// earlier time points, returned in increasing time order.
fn exceedance_indices(radii: &[f64], window: &Range<usize>, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = window.clone().collect();
    order.sort_unstable_by(|&a, &b| radii[b].total_cmp(&radii[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Estimates the TPDM of `series` over `window` from the k most extreme
/// observations.
///
/// The exceedance set consists of exactly the k largest radii in the window
/// (ties broken towards earlier time points), so the retained count is k
/// deterministically. The recorded threshold `r0` is the smallest retained
/// radius.
pub fn estimate_tpdm(
    series: &MultivariateSeries,
    window: Range<usize>,
    k: usize,
) -> Result<TpdmEstimate> {
    if window.end > series.n() || window.start >= window.end {
        return Err(MopedError::EmptyWindow);
    }
    let len = window.end - window.start;
    if k == 0 {
        return Err(MopedError::InvalidConfig("k must be at least 1".into()));
    }
    if k > len {
        return Err(MopedError::RankTooLarge { k, window: len });
    }

    let d = series.d();
    let retained = exceedance_indices(series.radii(), &window, k);
    let r0 = retained
        .iter()
        .map(|&t| series.radii()[t])
        .fold(f64::INFINITY, f64::min);

    let mut sums = Array2::<f64>::zeros((d, d));
    for &t in &retained {
        let row = series.row(t);
        let r2 = row.dot(&row);
        for i in 0..d {
            for j in i..d {
                sums[(i, j)] += row[i] * row[j] / r2;
            }
        }
    }
    let mut sigma = Array2::<f64>::zeros((d, d));
    for i in 0..d {
        for j in i..d {
            let value = d as f64 * sums[(i, j)] / k as f64;
            sigma[(i, j)] = value;
            sigma[(j, i)] = value;
        }
    }

    Ok(TpdmEstimate {
        sigma,
        k,
        r0,
        window,
    })
}

/// Estimates one TPDM per segment of the partition induced by `changes`.
///
/// `changes` are sorted change locations in (0, n); segment boundaries are
/// `[0, c_1), [c_1, c_2), ..., [c_q, n)`. Each segment uses
/// `k = ceil((1 - quantile) * segment length)`, clamped to at least 1, so a
/// quantile of 0.95 retains the top 5% of radii per segment.
pub fn estimate_segment_tpdms(
    series: &MultivariateSeries,
    changes: &[usize],
    quantile: f64,
) -> Result<Vec<TpdmEstimate>> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(MopedError::InvalidConfig(format!(
            "quantile must lie in (0, 1), got {quantile}"
        )));
    }
    let n = series.n();
    for (idx, &c) in changes.iter().enumerate() {
        let ordered = idx == 0 || changes[idx - 1] < c;
        if !(ordered && c > 0 && c < n) {
            return Err(MopedError::InvalidConfig(
                "change points must be strictly increasing within (0, n)".into(),
            ));
        }
    }

    let mut boundaries = Vec::with_capacity(changes.len() + 2);
    boundaries.push(0);
    boundaries.extend_from_slice(changes);
    boundaries.push(n);

    boundaries
        .windows(2)
        .map(|pair| {
            let (start, end) = (pair[0], pair[1]);
            let len = end - start;
            if len < 2 {
                return Err(MopedError::SegmentTooShort { start, end });
            }
            let k = crate::util::tolerant_ceil((1.0 - quantile) * len as f64).max(1);
            estimate_tpdm(series, start..end, k.min(len))
        })
        .collect()
}
