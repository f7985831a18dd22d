//! Marginal standardisation to the Pareto(2) scale and radii computation.
//!
//! Tail dependence summaries compare coordinates of a multivariate series on
//! a common heavy-tailed scale. Each column is mapped through its empirical
//! ranks to the Pareto distribution with survival function x^{-2} on x >= 1,
//! after which the per-observation Euclidean norms ("radii") identify the
//! most extreme time points.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::{MopedError, Result};

/// An observed n x d panel before marginal standardisation.
///
/// Rows index time, columns index coordinates (channels). Construction
/// validates that all entries are finite and that the panel is large enough
/// to carry pairwise dependence information (n >= 2, d >= 2).
#[derive(Debug, Clone)]
pub struct RawSeries {
    values: Array2<f64>,
}

impl RawSeries {
    /// Wraps a panel of observations, validating finiteness and shape.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n < 2 {
            return Err(MopedError::TooShort { n, min: 2 });
        }
        if d < 2 {
            return Err(MopedError::InvalidData(format!(
                "need at least 2 columns, got {d}"
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(MopedError::InvalidData(
                "non-finite entry in input panel".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Number of time points.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of coordinates.
    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    /// The underlying panel.
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }
}

/// An n x d panel on the Pareto(2) scale together with per-time radii.
///
/// Every entry lies strictly above 1 (the lower endpoint of the Pareto(2)
/// support) and `radii[t]` caches the Euclidean norm of row t, the quantity
/// whose largest order statistics define the exceedance sets used by the
/// TPDM estimator and the detector.
#[derive(Debug, Clone)]
pub struct MultivariateSeries {
    values: Array2<f64>,
    radii: Vec<f64>,
}

impl MultivariateSeries {
    /// Wraps a panel already on the Pareto(2) scale.
    ///
    /// Validates shape and that every entry exceeds 1, then computes radii.
    pub fn from_pareto2(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n < 2 {
            return Err(MopedError::TooShort { n, min: 2 });
        }
        if d < 2 {
            return Err(MopedError::InvalidData(format!(
                "need at least 2 columns, got {d}"
            )));
        }
        if !values.iter().all(|v| v.is_finite() && *v > 1.0) {
            return Err(MopedError::InvalidData(
                "entries must be finite and exceed 1 on the Pareto(2) scale".into(),
            ));
        }
        let radii = compute_radii(&values.view());
        Ok(Self { values, radii })
    }

    /// Number of time points.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of coordinates.
    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    /// The standardised panel.
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    /// Row t of the panel.
    pub fn row(&self, t: usize) -> ArrayView1<'_, f64> {
        self.values.row(t)
    }

    /// Euclidean norm of each row.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Standardises every column of `raw` to the Pareto(2) scale through its
/// empirical ranks.
///
/// A value with (average) rank r among n maps to u = r/(n+1) and then to
/// x = (1 - u)^{-1/2}, the Pareto(2) quantile at u. Ties share their average
/// rank, so a constant column maps to sqrt(2) everywhere. The transform is
/// monotone within each column and permutation-equivariant across rows.
pub fn rank_transform_pareto2(raw: &RawSeries) -> MultivariateSeries {
    let (n, d) = (raw.n(), raw.d());
    let mut out = Array2::<f64>::zeros((n, d));
    let denom = (n + 1) as f64;
    let mut column = vec![0.0; n];
    for j in 0..d {
        for (t, v) in raw.values.column(j).iter().enumerate() {
            column[t] = *v;
        }
        let ranks = average_ranks(&column);
        for (t, r) in ranks.iter().enumerate() {
            let u = r / denom;
            out[(t, j)] = (1.0 - u).recip().sqrt();
        }
    }
    let radii = compute_radii(&out.view());
    MultivariateSeries { values: out, radii }
}

/// Euclidean norm of every row of a panel.
pub fn compute_radii(values: &ArrayView2<'_, f64>) -> Vec<f64> {
    values
        .rows()
        .into_iter()
        .map(|row| row.dot(&row).sqrt())
        .collect()
}

/// Ascending ranks of `column`, ties replaced by their average rank.
///
/// Ranks are 1-based: the smallest value gets rank 1 (or the average of the
/// tied block containing it).
fn average_ranks(column: &[f64]) -> Vec<f64> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && column[order[end + 1]] == column[order[start]] {
            end += 1;
        }
        // average of the 1-based ranks start+1 ..= end+1
        let avg = (start + end + 2) as f64 / 2.0;
        for &t in &order[start..=end] {
            ranks[t] = avg;
        }
        start = end + 1;
    }
    ranks
}
