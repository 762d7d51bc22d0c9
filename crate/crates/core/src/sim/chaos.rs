use alloc::format;

use crate::error::Error;
use crate::model::VersionId;

/// What a chaos spec does to its target while a fault window is open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChaosKind {
    /// Kills every pod of the target at the start of each window; the pods
    /// come back (one restart each) when the window closes.
    PodKill,
    /// Adds a fixed delay to every response of the target.
    HttpDelay { delay_ms: f64 },
    /// Pins `workers * mb_per_worker` of extra memory on every target pod.
    MemoryStress { workers: u32, mb_per_worker: f64 },
}

impl ChaosKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChaosKind::PodKill => "pod-kill",
            ChaosKind::HttpDelay { .. } => "http-delay",
            ChaosKind::MemoryStress { .. } => "memory-stress",
        }
    }
}

/// A periodic fault against one version.
///
/// Fault windows open at `start_s + k * period_s` for `k = 1, 2, ...` and
/// last `duration_s`. No window opens at or after `stop_s`; delay and stress
/// windows are also cut short by it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosSpec {
    pub kind: ChaosKind,
    pub target: VersionId,
    pub period_s: u64,
    pub duration_s: u64,
    pub start_s: u64,
    pub stop_s: Option<u64>,
    pub active: bool,
}

impl ChaosSpec {
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: &str| {
            Err(Error::InvalidScenario(format!(
                "chaos on {}: {msg}",
                self.target
            )))
        };
        if self.period_s == 0 || self.duration_s == 0 {
            return fail("period and duration must be positive");
        }
        if self.duration_s > self.period_s {
            return fail("duration exceeds period");
        }
        if let Some(stop) = self.stop_s {
            if stop <= self.start_s {
                return fail("stop must come after start");
            }
        }
        match self.kind {
            ChaosKind::PodKill => {}
            ChaosKind::HttpDelay { delay_ms } => {
                if !(delay_ms.is_finite() && delay_ms > 0.0) {
                    return fail("delay_ms must be positive");
                }
            }
            ChaosKind::MemoryStress {
                workers,
                mb_per_worker,
            } => {
                if workers == 0 || !(mb_per_worker.is_finite() && mb_per_worker > 0.0) {
                    return fail("workers and mb_per_worker must be positive");
                }
            }
        }
        Ok(())
    }

    /// Start of the fault window containing `t`, if one is open.
    pub fn window_at(&self, t: u64) -> Option<u64> {
        if !self.active || t < self.start_s + self.period_s {
            return None;
        }
        let k = (t - self.start_s) / self.period_s;
        let onset = self.start_s + k * self.period_s;
        if self.stop_s.is_some_and(|stop| onset >= stop) {
            return None;
        }
        (t < onset + self.duration_s).then_some(onset)
    }

    /// Whether the fault is in effect at `t`. Pod kills are instantaneous
    /// events, so only delay and stress use this.
    pub fn in_effect(&self, t: u64) -> bool {
        self.window_at(t).is_some() && self.stop_s.is_none_or(|stop| t < stop)
    }

    pub fn opens_at(&self, t: u64) -> bool {
        self.window_at(t) == Some(t)
    }

    pub fn extra_delay_ms(&self) -> f64 {
        match self.kind {
            ChaosKind::HttpDelay { delay_ms } => delay_ms,
            _ => 0.0,
        }
    }

    pub fn extra_memory_mb(&self) -> f64 {
        match self.kind {
            ChaosKind::MemoryStress {
                workers,
                mb_per_worker,
            } => f64::from(workers) * mb_per_worker,
            _ => 0.0,
        }
    }
}
