//! The MOSUM detector over local TPDM differences and change point selection.
//!
//! For every admissible time t, the detector compares the TPDM window sums
//! computed from the k most extreme observations of the G points to the left
//! of t with those of the G points to the right:
//!
//! ```text
//! D(G,t)[i,j] = (d/k) * ( left top-k sum of X_i X_j / R^2
//!             -          right top-k sum of X_i X_j / R^2 ),   i != j,
//! D(G,t)[i,i] = 0,
//! T(G,t)      = Frobenius norm of D(G,t).
//! ```
//!
//! The full trace is computed in O(n (d^2 + log G)) by sliding two
//! [`SlidingTopK`] windows across the series. Change points are the local
//! maximisers of the trace above a threshold, subject to the eta-criterion:
//! a candidate must dominate the trace on a +/- eta*G neighbourhood.

mod topk;

pub use topk::SlidingTopK;

use serde::Serialize;

use crate::margins::MultivariateSeries;
use crate::util::tolerant_floor;
use crate::{MopedError, Result};

/// Bandwidth, exceedance rank, and localisation parameters of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorConfig {
    #[serde(rename = "G")]
    g: usize,
    k: usize,
    eta: f64,
}

impl DetectorConfig {
    /// Validates and builds a configuration.
    ///
    /// Requires `1 <= k <= G` and `eta` in (0, 1).
    pub fn new(g: usize, k: usize, eta: f64) -> Result<Self> {
        if g < 1 {
            return Err(MopedError::InvalidConfig("bandwidth G must be positive".into()));
        }
        if k < 1 {
            return Err(MopedError::InvalidConfig("rank k must be positive".into()));
        }
        if k > g {
            return Err(MopedError::RankTooLarge { k, window: g });
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(MopedError::InvalidConfig(format!(
                "eta must lie in (0, 1), got {eta}"
            )));
        }
        Ok(Self { g, k, eta })
    }

    /// Window bandwidth G.
    pub fn g(&self) -> usize {
        self.g
    }

    /// Exceedance rank k (observations retained per window).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Localisation parameter of the selection criterion.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Radius of the selection neighbourhood, floor(eta * G).
    pub(crate) fn eta_window(&self) -> usize {
        tolerant_floor(self.eta * self.g as f64)
    }
}

/// The detector statistic T(G,t) for t = G, ..., n-G.
#[derive(Debug, Clone)]
pub struct DetectorTrace {
    values: Vec<f64>,
    config: DetectorConfig,
    n: usize,
}

impl DetectorTrace {
    /// Reassembles a trace from stored values.
    ///
    /// `values[i]` is T(G, G+i); the length must equal n - 2G + 1 and all
    /// values must be finite and nonnegative.
    pub fn from_values(values: Vec<f64>, config: DetectorConfig, n: usize) -> Result<Self> {
        let g = config.g();
        if n < 2 * g {
            return Err(MopedError::SeriesTooShort { n, bandwidth: g });
        }
        if values.len() != n - 2 * g + 1 {
            return Err(MopedError::InvalidConfig(format!(
                "trace length {} does not match n - 2G + 1 = {}",
                values.len(),
                n - 2 * g + 1
            )));
        }
        if !values.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(MopedError::InvalidData(
                "trace values must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { values, config, n })
    }

    /// The statistic values, indexed so that `values()[i]` is T(G, G+i).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The configuration the trace was computed under.
    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    /// Length of the underlying series.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of trace points (n - 2G + 1).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True if the trace has no points (cannot occur for valid inputs).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The time index of trace position i.
    pub fn time_of(&self, i: usize) -> usize {
        self.config.g() + i
    }

    /// Largest statistic value over the whole trace.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// One estimated change point with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangePoint {
    /// Estimated change location (last index of the left segment).
    pub tau: usize,
    /// Detector height T(G, tau).
    pub height: f64,
    /// Permutation p-value, when calibration was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    /// Bandwidth the estimate came from.
    #[serde(rename = "G")]
    pub bandwidth: usize,
    /// Exceedance rank the estimate came from.
    #[serde(rename = "k")]
    pub rank: usize,
}

/// A sorted collection of change point estimates.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ChangePointSet {
    points: Vec<ChangePoint>,
}

impl ChangePointSet {
    /// Builds a set, validating that locations are strictly increasing.
    pub fn new(points: Vec<ChangePoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].tau >= w[1].tau) {
            return Err(MopedError::InvalidConfig(
                "change points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// The empty set.
    pub fn empty() -> Self {
        Self::default()
    }

    /// The estimates in increasing location order.
    pub fn points(&self) -> &[ChangePoint] {
        &self.points
    }

    /// Mutable access for attaching p-values; locations stay untouched.
    pub(crate) fn points_mut(&mut self) -> &mut [ChangePoint] {
        &mut self.points
    }

    /// Just the locations.
    pub fn taus(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.tau).collect()
    }

    /// Number of estimated change points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True if no change was detected.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Iterates over the estimates.
    pub fn iter(&self) -> std::slice::Iter<'_, ChangePoint> {
        self.points.iter()
    }
}

impl IntoIterator for ChangePointSet {
    type Item = ChangePoint;
    type IntoIter = std::vec::IntoIter<ChangePoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.into_iter()
    }
}

/// Flat panel of the d(d+1)/2 pairwise product terms X_i X_j / R^2 per row,
/// shared by the observed trace and all permutation replicates.
#[derive(Debug)]
pub(crate) struct ProductPanel {
    data: Vec<f64>,
    stride: usize,
    /// Linear indices of the strictly-upper-triangle (i < j) terms.
    off_diagonal: Vec<usize>,
    d: usize,
}

impl ProductPanel {
    pub(crate) fn from_series(series: &MultivariateSeries) -> Self {
        let (n, d) = (series.n(), series.d());
        let stride = d * (d + 1) / 2;
        let mut data = vec![0.0; n * stride];
        for t in 0..n {
            let row = series.row(t);
            let r2 = row.dot(&row);
            let out = &mut data[t * stride..(t + 1) * stride];
            let mut m = 0;
            for i in 0..d {
                for j in i..d {
                    out[m] = row[i] * row[j] / r2;
                    m += 1;
                }
            }
        }
        let mut off_diagonal = Vec::with_capacity(d * (d - 1) / 2);
        let mut m = 0;
        for i in 0..d {
            for j in i..d {
                if i != j {
                    off_diagonal.push(m);
                }
                m += 1;
            }
        }
        Self {
            data,
            stride,
            off_diagonal,
            d,
        }
    }
}

/// Computes the trace values over `radii`/`panel`, visiting rows in the
/// order given by `order` (identity when absent). Shared by the observed
/// statistic and the permutation null, which differ only in row order.
pub(crate) fn trace_values(
    radii: &[f64],
    panel: &ProductPanel,
    order: Option<&[usize]>,
    g: usize,
    k: usize,
) -> Vec<f64> {
    let n = radii.len();
    debug_assert!(n >= 2 * g && k <= g);
    let row_at = |pos: usize| order.map_or(pos, |o| o[pos]);

    let mut left = SlidingTopK::new(radii, &panel.data, panel.stride, k);
    let mut right = SlidingTopK::new(radii, &panel.data, panel.stride, k);
    for pos in 0..g {
        left.insert(row_at(pos));
    }
    for pos in g..2 * g {
        right.insert(row_at(pos));
    }

    let scale = panel.d as f64 / k as f64;
    let mut values = Vec::with_capacity(n - 2 * g + 1);
    let frobenius = |l: &SlidingTopK, r: &SlidingTopK| {
        let (ls, rs) = (l.top_sum(), r.top_sum());
        let mut acc = 0.0;
        for &m in &panel.off_diagonal {
            let diff = ls[m] - rs[m];
            acc += diff * diff;
        }
        scale * (2.0 * acc).sqrt()
    };

    values.push(frobenius(&left, &right));
    for t in g + 1..=n - g {
        // windows advance from [t-1-G, t-1), [t-1, t-1+G) to [t-G, t), [t, t+G)
        right.remove(row_at(t - 1));
        right.insert(row_at(t - 1 + g));
        left.insert(row_at(t - 1));
        left.remove(row_at(t - 1 - g));
        values.push(frobenius(&left, &right));
    }
    values
}

/// Computes the MOSUM detector trace of `series` under `config`.
///
/// For each t in [G, n-G], the statistic contrasts the top-k extremal
/// observations of the left window (t-G, t] with those of the right window
/// (t, t+G]; see the module documentation for the exact formula.
pub fn detector_trace(series: &MultivariateSeries, config: &DetectorConfig) -> Result<DetectorTrace> {
    let n = series.n();
    let g = config.g();
    if n < 2 * g {
        return Err(MopedError::SeriesTooShort { n, bandwidth: g });
    }
    let panel = ProductPanel::from_series(series);
    let values = trace_values(series.radii(), &panel, None, g, config.k());
    Ok(DetectorTrace {
        values,
        config: *config,
        n,
    })
}

/// Maximum of `values` over the window [i - w, i + w] (clamped to the valid
/// range) for every i, via a monotonic deque in O(len).
fn sliding_window_max(values: &[f64], w: usize) -> Vec<f64> {
    let len = values.len();
    let mut out = vec![0.0; len];
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut admitted = 0;
    for i in 0..len {
        let hi = (i + w).min(len - 1);
        while admitted <= hi {
            while deque
                .back()
                .is_some_and(|&b| values[b] <= values[admitted])
            {
                deque.pop_back();
            }
            deque.push_back(admitted);
            admitted += 1;
        }
        while deque.front().is_some_and(|&f| f + w < i) {
            deque.pop_front();
        }
        out[i] = values[*deque.front().expect("window is non-empty")];
    }
    out
}

/// Selects change points from a trace: every t whose statistic exceeds
/// `threshold` and attains the maximum of the trace over [t - eta*G,
/// t + eta*G]. Runs of consecutive tied maximisers collapse to their
/// mid-point (rounded down).
pub fn select_changes(trace: &DetectorTrace, threshold: f64) -> ChangePointSet {
    let values = trace.values();
    let config = trace.config();
    let w = config.eta_window();
    let window_max = sliding_window_max(values, w);

    let mut points = Vec::new();
    let mut run: Option<(usize, usize)> = None; // [first, last] of a tied candidate run
    let flush = |run: &mut Option<(usize, usize)>, points: &mut Vec<ChangePoint>| {
        if let Some((first, last)) = run.take() {
            let mid = (first + last) / 2;
            points.push(ChangePoint {
                tau: trace.time_of(mid),
                height: values[mid],
                p_value: None,
                bandwidth: config.g(),
                rank: config.k(),
            });
        }
    };

    for i in 0..values.len() {
        let is_candidate = values[i] > threshold && values[i] == window_max[i];
        match (&mut run, is_candidate) {
            (Some((_, last)), true) if *last + 1 == i && values[*last] == values[i] => {
                *last = i;
            }
            (_, true) => {
                flush(&mut run, &mut points);
                run = Some((i, i));
            }
            (_, false) => flush(&mut run, &mut points),
        }
    }
    flush(&mut run, &mut points);

    ChangePointSet { points }
}
