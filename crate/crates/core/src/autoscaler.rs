//! The monitor / act control loop: CPU threshold votes on every monitoring
//! tick, a history vote plus rescoring and reallocation on every action tick.

use alloc::vec::Vec;

use crate::allocation::{adjust_replica_distribution, diversity_factor, DiversityFactor};
use crate::error::Error;
use crate::metrics::aggregate_window;
use crate::model::{
    validate_config, ControllerConfig, MetricWindow, ReplicaPlan, SampleBatch, ScaleAction,
    VersionId, VersionState,
};
use crate::scoring::score_all;

/// Threshold vote for a single CPU reading. Both bounds are exclusive.
pub fn scaling_action(cpu_pct: f64, cfg: &ControllerConfig) -> ScaleAction {
    if cpu_pct > cfg.max_cpu_pct {
        ScaleAction::Increase
    } else if cpu_pct < cfg.min_cpu_pct {
        ScaleAction::Decrease
    } else {
        ScaleAction::NoChange
    }
}

/// Scale in needs more than two votes, scale out more than one; scale in is
/// checked first.
pub fn decide_scale_based_on_history(history: &[ScaleAction]) -> ScaleAction {
    let increases = history
        .iter()
        .filter(|a| **a == ScaleAction::Increase)
        .count();
    let decreases = history
        .iter()
        .filter(|a| **a == ScaleAction::Decrease)
        .count();
    if decreases > 2 {
        ScaleAction::Decrease
    } else if increases > 1 {
        ScaleAction::Increase
    } else {
        ScaleAction::NoChange
    }
}

/// Votes collected since the last action tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleHistory {
    actions: Vec<ScaleAction>,
    capacity: usize,
}

impl ScaleHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            actions: Vec::with_capacity(capacity),
            capacity,
        }
    }

    /// Appends a vote. If the caller skipped an action tick the oldest vote
    /// is dropped so the history never outgrows one action period.
    pub fn push(&mut self, action: ScaleAction) {
        if self.actions.len() == self.capacity {
            self.actions.remove(0);
        }
        self.actions.push(action);
    }

    pub fn as_slice(&self) -> &[ScaleAction] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn clear(&mut self) {
        self.actions.clear();
    }

    pub fn decide(&self) -> ScaleAction {
        decide_scale_based_on_history(&self.actions)
    }
}

/// Everything one action tick decided.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionOutcome {
    pub time: u64,
    /// Last CPU reading before the tick, if any monitoring tick happened.
    pub cpu_pct: Option<f64>,
    pub decision: ScaleAction,
    pub previous_total: u32,
    pub total: u32,
    pub windows: Vec<MetricWindow>,
    pub scores: Vec<f64>,
    pub plan: ReplicaPlan,
    pub diversity: DiversityFactor,
}

/// Controller state. Owned by one driver at a time; all mutation goes
/// through the two tick methods.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    total_replicas: u32,
    history: ScaleHistory,
    versions: Vec<VersionState>,
    plan: ReplicaPlan,
    buffer: SampleBatch,
    last_cpu: Option<f64>,
}

impl Controller {
    /// `initial` fixes the version order and the starting distribution; its
    /// sum must equal `config.total_replicas`.
    pub fn new(config: ControllerConfig, initial: ReplicaPlan) -> Result<Self, Error> {
        let config = validate_config(config)?;
        if initial.is_empty() {
            return Err(Error::NoVersions);
        }
        if initial.total() != config.total_replicas {
            return Err(Error::InvalidScenario(alloc::format!(
                "initial replicas sum to {} but total_replicas is {}",
                initial.total(),
                config.total_replicas
            )));
        }
        if initial.iter().any(|(_, c)| c == 0) {
            return Err(Error::InvalidScenario(
                "every version needs at least one replica".into(),
            ));
        }
        let versions = initial
            .iter()
            .map(|(id, replicas)| VersionState {
                id: id.clone(),
                replicas,
                window: None,
                reliability_score: 1.0,
            })
            .collect();
        Ok(Self {
            total_replicas: config.total_replicas,
            history: ScaleHistory::new(config.tick_ratio()),
            buffer: SampleBatch::new(initial.len()),
            versions,
            plan: initial,
            config,
            last_cpu: None,
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn total_replicas(&self) -> u32 {
        self.total_replicas
    }

    pub fn history(&self) -> &ScaleHistory {
        &self.history
    }

    pub fn plan(&self) -> &ReplicaPlan {
        &self.plan
    }

    pub fn versions(&self) -> &[VersionState] {
        &self.versions
    }

    pub fn version_ids(&self) -> Vec<VersionId> {
        self.versions.iter().map(|v| v.id.clone()).collect()
    }

    /// Records a CPU vote and buffers the samples gathered since the last
    /// monitoring tick. `samples` is indexed in the controller's version order.
    pub fn monitoring_tick(&mut self, cpu_pct: f64, samples: &SampleBatch) -> ScaleAction {
        let vote = scaling_action(cpu_pct, &self.config);
        self.history.push(vote);
        self.last_cpu = Some(cpu_pct);
        self.buffer.extend(samples);
        vote
    }

    /// Consolidates the votes, moves the budget by at most one replica,
    /// rescores every version over the metric window ending at `now` and
    /// redistributes the budget.
    pub fn action_tick(&mut self, now: u64) -> Result<ActionOutcome, Error> {
        let decision = self.history.decide();
        let previous_total = self.total_replicas;
        if self.config.scaling_enabled {
            match decision {
                ScaleAction::Increase if self.total_replicas < self.config.max_replicas => {
                    self.total_replicas += 1
                }
                ScaleAction::Decrease if self.total_replicas > self.config.min_replicas => {
                    self.total_replicas -= 1
                }
                _ => {}
            }
        }

        let start = now.saturating_sub(self.config.metric_window_s);
        let mut windows = Vec::with_capacity(self.versions.len());
        for (idx, state) in self.versions.iter().enumerate() {
            let in_window: Vec<_> = self
                .buffer
                .version(idx)
                .iter()
                .filter(|s| s.timestamp >= start && s.timestamp < now)
                .copied()
                .collect();
            windows.push(aggregate_window(&in_window, start, now, state.id.clone())?);
        }
        let scores = score_all(&windows, &self.config.weights)?;
        let ids = self.version_ids();
        let plan = adjust_replica_distribution(&ids, &scores, self.total_replicas)?;
        let diversity = diversity_factor(&plan);

        for ((state, window), (&score, (_, replicas))) in self
            .versions
            .iter_mut()
            .zip(&windows)
            .zip(scores.iter().zip(plan.iter()))
        {
            state.window = Some(window.clone());
            state.reliability_score = score;
            state.replicas = replicas;
        }
        self.plan = plan.clone();
        self.history.clear();
        self.prune(now);

        Ok(ActionOutcome {
            time: now,
            cpu_pct: self.last_cpu,
            decision,
            previous_total,
            total: self.total_replicas,
            windows,
            scores,
            plan,
            diversity,
        })
    }

    /// Drops samples the next action tick can no longer see.
    fn prune(&mut self, now: u64) {
        let keep_from =
            (now + self.config.action_time_s).saturating_sub(self.config.metric_window_s);
        let mut kept = SampleBatch::new(self.versions.len());
        for idx in 0..self.versions.len() {
            for s in self
                .buffer
                .version(idx)
                .iter()
                .filter(|s| s.timestamp >= keep_from)
            {
                kept.push(idx, *s);
            }
        }
        self.buffer = kept;
    }
}
