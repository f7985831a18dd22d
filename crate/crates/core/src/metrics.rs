//! Segmentation-quality metrics.
//!
//! A [`Segmentation`] partitions `{0, .., n-1}` into consecutive intervals
//! split at its boundaries. [`covering_metric`] scores how well an estimated
//! partition covers the true one (size-weighted best Jaccard overlap per true
//! segment); [`v_measure`] is the entropy-based harmonic mean of homogeneity
//! and completeness of the induced per-time-point labels; and
//! [`QhatHistogram`] summarises segment-count errors across replications.

use std::ops::Range;

use serde::Serialize;

use crate::{MopedError, Result};

/// A partition of `{0, .., n-1}` into consecutive intervals.
///
/// Boundaries are strictly increasing and lie in `(0, n)`; segment `l` is the
/// half-open index range between consecutive boundaries (with implicit outer
/// boundaries 0 and n). `q` boundaries induce `q + 1` non-empty segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segmentation {
    n: usize,
    boundaries: Vec<usize>,
}

impl Segmentation {
    /// Builds a segmentation, validating that boundaries are strictly
    /// increasing and interior to `(0, n)`.
    pub fn new(n: usize, boundaries: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(MopedError::InvalidConfig(
                "segmentation length must be positive".into(),
            ));
        }
        let mut previous = 0usize;
        for &b in &boundaries {
            if b == 0 || b >= n {
                return Err(MopedError::InvalidConfig(format!(
                    "boundary {b} outside the open interval (0, {n})"
                )));
            }
            if b <= previous && previous > 0 {
                return Err(MopedError::InvalidConfig(
                    "boundaries must be strictly increasing".into(),
                ));
            }
            previous = b;
        }
        Ok(Self { n, boundaries })
    }

    /// The single-segment partition of length `n`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Series length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The interior boundaries.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Number of segments (boundaries + 1).
    pub fn num_segments(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// The segments as half-open index ranges.
    pub fn spans(&self) -> Vec<Range<usize>> {
        let mut cuts = Vec::with_capacity(self.boundaries.len() + 2);
        cuts.push(0);
        cuts.extend_from_slice(&self.boundaries);
        cuts.push(self.n);
        cuts.windows(2).map(|w| w[0]..w[1]).collect()
    }

    /// Segment label of each time point.
    pub fn labels(&self) -> Vec<usize> {
        (0..self.n)
            .map(|t| self.boundaries.partition_point(|&b| b <= t))
            .collect()
    }
}

fn check_same_length(truth: &Segmentation, estimate: &Segmentation) -> Result<()> {
    if truth.n != estimate.n {
        return Err(MopedError::LengthMismatch {
            left: truth.n,
            right: estimate.n,
        });
    }
    Ok(())
}

/// Covering metric: the size-weighted average, over true segments, of the
/// best Jaccard overlap achieved by any estimated segment.
///
/// CM = (1/n) * sum over true segments A of |A| * max over estimated
/// segments B of |A intersect B| / |A union B|. Equals 1 iff the partitions
/// coincide; it is not symmetric in its arguments in general.
pub fn covering_metric(truth: &Segmentation, estimate: &Segmentation) -> Result<f64> {
    check_same_length(truth, estimate)?;
    let n = truth.n as f64;
    let mut total = 0.0;
    for a in truth.spans() {
        let len_a = (a.end - a.start) as f64;
        let mut best = 0.0f64;
        for b in estimate.spans() {
            let overlap = a.end.min(b.end).saturating_sub(a.start.max(b.start)) as f64;
            if overlap > 0.0 {
                let union = len_a + (b.end - b.start) as f64 - overlap;
                best = best.max(overlap / union);
            }
        }
        total += len_a * best;
    }
    Ok(total / n)
}

/// Joint interval-overlap table of two partitions of the same length:
/// entries (truth label, estimate label, shared point count).
fn contingency(truth: &Segmentation, estimate: &Segmentation) -> Vec<(usize, usize, f64)> {
    let mut cuts: Vec<usize> = Vec::with_capacity(truth.boundaries.len() + estimate.boundaries.len() + 2);
    cuts.push(0);
    cuts.extend_from_slice(&truth.boundaries);
    cuts.extend_from_slice(&estimate.boundaries);
    cuts.push(truth.n);
    cuts.sort_unstable();
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let (start, end) = (w[0], w[1]);
            let i = truth.boundaries.partition_point(|&b| b <= start);
            let j = estimate.boundaries.partition_point(|&b| b <= start);
            (i, j, (end - start) as f64)
        })
        .collect()
}

fn entropy(sizes: &[f64], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| {
            let p = s / n;
            -p * p.ln()
        })
        .sum()
}

/// Homogeneity and completeness of `estimate` against `truth`, with the
/// zero-entropy conventions (h = 1 when the truth is a single segment,
/// c = 1 when the estimate is).
fn homogeneity_completeness(truth: &Segmentation, estimate: &Segmentation) -> (f64, f64) {
    let n = truth.n as f64;
    let joint = contingency(truth, estimate);
    let mut truth_sizes = vec![0.0; truth.num_segments()];
    let mut estimate_sizes = vec![0.0; estimate.num_segments()];
    for &(i, j, count) in &joint {
        truth_sizes[i] += count;
        estimate_sizes[j] += count;
    }
    let h_truth = entropy(&truth_sizes, n);
    let h_estimate = entropy(&estimate_sizes, n);
    // H(truth | estimate) and H(estimate | truth) in nats
    let mut h_t_given_e = 0.0;
    let mut h_e_given_t = 0.0;
    for &(i, j, count) in &joint {
        let p = count / n;
        h_t_given_e -= p * (count / estimate_sizes[j]).ln();
        h_e_given_t -= p * (count / truth_sizes[i]).ln();
    }
    let h = if h_truth == 0.0 {
        1.0
    } else {
        (1.0 - h_t_given_e / h_truth).clamp(0.0, 1.0)
    };
    let c = if h_estimate == 0.0 {
        1.0
    } else {
        (1.0 - h_e_given_t / h_estimate).clamp(0.0, 1.0)
    };
    (h, c)
}

/// V-measure: the harmonic mean of homogeneity and completeness of the
/// per-time-point segment labels, with entropies in nats.
///
/// Homogeneity h = 1 - H(truth | estimate) / H(truth) (h = 1 when
/// H(truth) = 0); completeness c mirrors it with the roles swapped; the
/// result is 2hc / (h + c), or 0 when h + c = 0. Symmetric in its arguments.
pub fn v_measure(truth: &Segmentation, estimate: &Segmentation) -> Result<f64> {
    check_same_length(truth, estimate)?;
    let (h, c) = homogeneity_completeness(truth, estimate);
    if h + c == 0.0 {
        Ok(0.0)
    } else {
        Ok(2.0 * h * c / (h + c))
    }
}

/// Distribution of the segment-count error `estimated q - true q` across
/// replications, binned as { <= -2, -1, 0, 1, >= 2 }.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QhatHistogram {
    fractions: [f64; 5],
}

impl QhatHistogram {
    /// Bin labels, aligned with [`Self::fractions`].
    pub const BIN_LABELS: [&'static str; 5] = ["<=-2", "-1", "0", "1", ">=2"];

    /// Bins the differences `estimated q - true q`; fractions sum to one.
    pub fn from_differences(differences: &[i64]) -> Result<Self> {
        if differences.is_empty() {
            return Err(MopedError::EmptyResults);
        }
        let mut counts = [0usize; 5];
        for &diff in differences {
            let bin = match diff {
                d if d <= -2 => 0,
                -1 => 1,
                0 => 2,
                1 => 3,
                _ => 4,
            };
            counts[bin] += 1;
        }
        let total = differences.len() as f64;
        let mut fractions = [0.0; 5];
        for (f, c) in fractions.iter_mut().zip(counts) {
            *f = c as f64 / total;
        }
        Ok(Self { fractions })
    }

    /// Fractions per bin, in [`Self::BIN_LABELS`] order.
    pub fn fractions(&self) -> &[f64; 5] {
        &self.fractions
    }

    /// Fraction of replications with the exactly correct segment count.
    pub fn fraction_exact(&self) -> f64 {
        self.fractions[2]
    }
}
