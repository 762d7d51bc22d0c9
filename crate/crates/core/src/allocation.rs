//! Reliability-proportional replica apportionment with a one-replica floor,
//! and the diversity factor of the resulting distribution.

use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::model::{ReplicaPlan, VersionId};

/// Proportional shares and fractional parts closer than this are treated as
/// equal, so float noise never decides a tie.
const SHARE_EPSILON: f64 = 1e-9;

/// Inverse of the population standard deviation of a replica distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiversityFactor {
    /// Every version holds the same number of replicas.
    Uniform,
    Value(f64),
}

impl DiversityFactor {
    pub fn value(self) -> Option<f64> {
        match self {
            DiversityFactor::Uniform => None,
            DiversityFactor::Value(v) => Some(v),
        }
    }
}

impl fmt::Display for DiversityFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiversityFactor::Uniform => f.write_str("uniform"),
            DiversityFactor::Value(v) => write!(f, "{v:.6}"),
        }
    }
}

pub fn diversity_factor(plan: &ReplicaPlan) -> DiversityFactor {
    diversity_of_counts(&plan.counts())
}

pub(crate) fn diversity_of_counts(counts: &[u32]) -> DiversityFactor {
    if counts.is_empty() {
        return DiversityFactor::Uniform;
    }
    // n^2 * variance = n * sum(c^2) - (sum c)^2, exact in integers
    let n = counts.len() as u128;
    let sum: u128 = counts.iter().map(|&c| u128::from(c)).sum();
    let sum_sq: u128 = counts.iter().map(|&c| u128::from(c) * u128::from(c)).sum();
    let scaled = n * sum_sq - sum * sum;
    if scaled == 0 {
        return DiversityFactor::Uniform;
    }
    let sigma = libm::sqrt(scaled as f64) / n as f64;
    DiversityFactor::Value(1.0 / sigma)
}

/// Splits `total` replicas across versions in proportion to `scores`.
///
/// Every version keeps at least one replica. Rounding is repaired by handing
/// spare replicas to the largest fractional remainders first, or by taking
/// excess replicas from the smallest remainders first (never below one),
/// sweeping repeatedly if one sweep is not enough. Versions that were lifted
/// to the floor have no remainder left to claim. Remainder ties go to the
/// lower version index.
pub fn apportion(scores: &[f64], total: u32) -> Result<Vec<u32>, Error> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::NoVersions);
    }
    if (total as usize) < n {
        return Err(Error::InfeasibleBudget { total, versions: n });
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::InvalidScore(bad));
    }
    let score_sum: f64 = scores.iter().sum();
    if score_sum <= 0.0 {
        return Err(Error::AllScoresZero);
    }

    let mut counts = Vec::with_capacity(n);
    // fractional remainder scaled to an integer key; None for floor-lifted versions
    let mut remainders: Vec<Option<i64>> = Vec::with_capacity(n);
    for &score in scores {
        let mut share = f64::from(total) * score / score_sum;
        let nearest = libm::round(share);
        if libm::fabs(share - nearest) < SHARE_EPSILON {
            share = nearest;
        }
        let base = libm::floor(share);
        let key = libm::round((share - base) / SHARE_EPSILON) as i64;
        if base < 1.0 {
            counts.push(1u32);
            remainders.push(None);
        } else {
            counts.push(base as u32);
            remainders.push(Some(key));
        }
    }

    // descending remainder, ties by ascending index, floor-lifted versions last
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match (remainders[a], remainders[b]) {
        (Some(x), Some(y)) => y.cmp(&x).then(a.cmp(&b)),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => a.cmp(&b),
    });

    let assigned: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    let target = u64::from(total);
    if assigned < target {
        let deficit = (target - assigned) as usize;
        for i in 0..deficit {
            counts[order[i % n]] += 1;
        }
    } else if assigned > target {
        let mut surplus = assigned - target;
        // feasible because total >= n leaves room above the floor
        'sweeps: loop {
            for &idx in order.iter().rev() {
                if surplus == 0 {
                    break 'sweeps;
                }
                if counts[idx] > 1 {
                    counts[idx] -= 1;
                    surplus -= 1;
                }
            }
        }
    }
    Ok(counts)
}

/// [`apportion`] keyed by version.
pub fn adjust_replica_distribution(
    versions: &[VersionId],
    scores: &[f64],
    total: u32,
) -> Result<ReplicaPlan, Error> {
    if versions.len() != scores.len() {
        return Err(Error::InvalidScenario(alloc::format!(
            "{} versions but {} scores",
            versions.len(),
            scores.len()
        )));
    }
    let counts = apportion(scores, total)?;
    Ok(ReplicaPlan::from_counts(versions, &counts))
}
