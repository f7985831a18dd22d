//! Bottom-up pooling of change point estimates across exceedance ranks and
//! window bandwidths.
//!
//! Small ranks look furthest into the tail and react to the sharpest
//! extremal changes; larger ranks and wider windows pick up weaker or more
//! gradual ones. Pooling starts from the finest level (smallest rank,
//! then smallest bandwidth) and accepts a coarser-level candidate only when
//! it is at least eta*G away from everything already accepted, so finer
//! scales always keep priority.

use serde::Serialize;

use crate::calibrate::{moped, PermutationConfig};
use crate::detector::{ChangePoint, ChangePointSet, DetectorConfig};
use crate::margins::MultivariateSeries;
use crate::util::tolerant_ceil;
use crate::{MopedError, Result};

/// A strictly increasing set of exceedance ranks k_1 < ... < k_J, J >= 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RankLadder {
    ranks: Vec<usize>,
}

impl RankLadder {
    /// Validates and builds a rank ladder (at least two strictly increasing
    /// positive ranks).
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        if ranks.len() < 2 {
            return Err(MopedError::InvalidConfig(
                "rank ladder needs at least two ranks".into(),
            ));
        }
        if ranks[0] < 1 || ranks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MopedError::InvalidConfig(
                "ranks must be strictly increasing positive integers".into(),
            ));
        }
        Ok(Self { ranks })
    }

    /// The ranks in increasing order.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }
}

/// An exceedance rank given either directly or as a fraction of the
/// bandwidth it will be used with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankSpec {
    /// A fixed rank, used as-is for every bandwidth.
    Absolute(usize),
    /// A fraction f in (0, 1]; resolves to round(f * G), at least 1.
    FractionOfBandwidth(f64),
}

impl RankSpec {
    /// Resolves the rank specification against a concrete bandwidth.
    pub fn resolve(&self, g: usize) -> Result<usize> {
        match *self {
            RankSpec::Absolute(k) => {
                if k < 1 || k > g {
                    return Err(MopedError::RankTooLarge { k, window: g });
                }
                Ok(k)
            }
            RankSpec::FractionOfBandwidth(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(MopedError::InvalidConfig(format!(
                        "rank fraction must lie in (0, 1], got {f}"
                    )));
                }
                Ok(((f * g as f64).round() as usize).clamp(1, g))
            }
        }
    }
}

/// Strictly increasing bandwidths G_1 < ... < G_H (H >= 2) with the rank
/// specs applied within each bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthLadder {
    bandwidths: Vec<usize>,
    rank_specs: Vec<RankSpec>,
}

impl BandwidthLadder {
    /// Validates and builds a bandwidth ladder.
    pub fn new(bandwidths: Vec<usize>, rank_specs: Vec<RankSpec>) -> Result<Self> {
        if bandwidths.len() < 2 {
            return Err(MopedError::InvalidConfig(
                "bandwidth ladder needs at least two bandwidths".into(),
            ));
        }
        if bandwidths[0] < 1 || bandwidths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MopedError::InvalidConfig(
                "bandwidths must be strictly increasing positive integers".into(),
            ));
        }
        if rank_specs.len() < 2 {
            return Err(MopedError::InvalidConfig(
                "need at least two rank specs per bandwidth".into(),
            ));
        }
        Ok(Self {
            bandwidths,
            rank_specs,
        })
    }

    /// The bandwidths in increasing order.
    pub fn bandwidths(&self) -> &[usize] {
        &self.bandwidths
    }

    /// The rank specs shared by every bandwidth.
    pub fn rank_specs(&self) -> &[RankSpec] {
        &self.rank_specs
    }

    /// The concrete rank ladder for one bandwidth (resolved, sorted,
    /// deduplicated).
    pub fn rank_ladder_for(&self, g: usize) -> Result<RankLadder> {
        let mut ranks = self
            .rank_specs
            .iter()
            .map(|spec| spec.resolve(g))
            .collect::<Result<Vec<usize>>>()?;
        ranks.sort_unstable();
        ranks.dedup();
        if ranks.len() < 2 {
            return Err(MopedError::InvalidConfig(format!(
                "rank ladder collapses to fewer than two distinct ranks at G = {g}"
            )));
        }
        RankLadder::new(ranks)
    }
}

/// Appends each candidate (in increasing location order) to `accepted`
/// unless it lies within `min_separation` of anything already accepted.
fn accept_by_distance(
    accepted: &mut Vec<ChangePoint>,
    candidates: &[ChangePoint],
    min_separation: usize,
) {
    for candidate in candidates {
        let far_enough = accepted
            .iter()
            .all(|kept| kept.tau.abs_diff(candidate.tau) >= min_separation);
        if far_enough {
            accepted.push(candidate.clone());
        }
    }
}

fn sorted_set(mut points: Vec<ChangePoint>) -> Result<ChangePointSet> {
    points.sort_by_key(|p| p.tau);
    ChangePointSet::new(points)
}

/// Multi-threshold detection at one bandwidth: runs the single-scale
/// procedure for every rank in `ladder` and pools bottom-up.
///
/// All estimates from the smallest rank are kept verbatim; a candidate from
/// a larger rank is accepted only if it is at least eta*G away from every
/// estimate accepted so far. Accepted points keep the (G, k) provenance and
/// p-value of their originating run.
pub fn merge_over_ranks(
    series: &MultivariateSeries,
    g: usize,
    ladder: &RankLadder,
    eta: f64,
    pconfig: &PermutationConfig,
) -> Result<ChangePointSet> {
    let min_separation = tolerant_ceil(eta * g as f64);
    let mut accepted: Vec<ChangePoint> = Vec::new();
    for &k in ladder.ranks() {
        let config = DetectorConfig::new(g, k, eta)?;
        let changes = moped(series, &config, pconfig)?;
        if accepted.is_empty() && k == ladder.ranks()[0] {
            accepted.extend(changes.into_iter());
        } else {
            accept_by_distance(&mut accepted, changes.points(), min_separation);
        }
    }
    sorted_set(accepted)
}

/// Multiscale, multi-threshold detection: multi-threshold results per
/// bandwidth, pooled bottom-up from the finest bandwidth.
///
/// The pooled set at the smallest bandwidth is kept verbatim; a candidate
/// from bandwidth G_h is accepted only if it is at least eta*G_h away from
/// every estimate accepted so far.
pub fn merge_over_bandwidths(
    series: &MultivariateSeries,
    ladder: &BandwidthLadder,
    eta: f64,
    pconfig: &PermutationConfig,
) -> Result<ChangePointSet> {
    let mut accepted: Vec<ChangePoint> = Vec::new();
    for (h, &g) in ladder.bandwidths().iter().enumerate() {
        let ranks = ladder.rank_ladder_for(g)?;
        let level = merge_over_ranks(series, g, &ranks, eta, pconfig)?;
        if h == 0 {
            accepted.extend(level.into_iter());
        } else {
            let min_separation = tolerant_ceil(eta * g as f64);
            accept_by_distance(&mut accepted, level.points(), min_separation);
        }
    }
    sorted_set(accepted)
}
