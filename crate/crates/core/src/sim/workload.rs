use alloc::vec::Vec;

use crate::error::Error;

/// Piecewise-constant user count plus a per-user request rate.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProfile {
    /// `(from_s, users)`, strictly increasing in time. Zero users before the
    /// first step.
    pub steps: Vec<(u64, u32)>,
    pub requests_per_user_per_s: f64,
    /// Relative half-width of the seeded per-second rate jitter; 0 disables it.
    pub jitter: f64,
}

impl WorkloadProfile {
    pub fn constant(users: u32, requests_per_user_per_s: f64) -> Self {
        Self {
            steps: alloc::vec![(0, users)],
            requests_per_user_per_s,
            jitter: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.steps.is_empty() {
            return Err(Error::InvalidScenario(
                "workload needs at least one step".into(),
            ));
        }
        if self.steps.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidScenario(
                "workload step times must strictly increase".into(),
            ));
        }
        if !(self.requests_per_user_per_s.is_finite() && self.requests_per_user_per_s >= 0.0) {
            return Err(Error::InvalidScenario(
                "requests_per_user_per_s must be >= 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::InvalidScenario("jitter must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn users_at(&self, t: u64) -> u32 {
        self.steps
            .iter()
            .take_while(|(from, _)| *from <= t)
            .last()
            .map_or(0, |(_, u)| *u)
    }

    pub fn rate_at(&self, t: u64) -> f64 {
        f64::from(self.users_at(t)) * self.requests_per_user_per_s
    }
}
