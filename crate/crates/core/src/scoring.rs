//! Weighted linear reliability score.

use alloc::vec::Vec;

use crate::error::Error;
use crate::metrics::{Metric, NormalizationContext};
use crate::model::{MetricWindow, ReliabilityWeights};

fn check_utility(u: f64) -> Result<f64, Error> {
    if (0.0..=1.0).contains(&u) {
        Ok(u)
    } else {
        Err(Error::InvalidUtility(u))
    }
}

/// Weighted sum of the three per-metric utilities.
pub fn reliability_score(
    u_response_time: f64,
    u_restarts: f64,
    u_memory: f64,
    weights: &ReliabilityWeights,
) -> Result<f64, Error> {
    let score = weights.response_time * check_utility(u_response_time)?
        + weights.restart * check_utility(u_restarts)?
        + weights.memory * check_utility(u_memory)?;
    // Weights summing to 1 within 1e-9 can push an all-ones score a hair past 1.
    Ok(score.clamp(0.0, 1.0))
}

/// Scores every version against the others over a common window.
pub fn score_all(
    windows: &[MetricWindow],
    weights: &ReliabilityWeights,
) -> Result<Vec<f64>, Error> {
    let first = windows.first().ok_or(Error::NoVersions)?;
    if windows
        .iter()
        .any(|w| w.window_start != first.window_start || w.window_end != first.window_end)
    {
        return Err(Error::MismatchedWindows);
    }
    let ctx = NormalizationContext::from_windows(windows)?;
    windows
        .iter()
        .map(|w| {
            reliability_score(
                ctx.utility(Metric::ResponseTimeStddev, w.response_time_stddev_ms),
                ctx.utility(Metric::Restarts, f64::from(w.restart_count)),
                ctx.utility(Metric::MemoryStddev, w.memory_stddev_mb),
                weights,
            )
        })
        .collect()
}
