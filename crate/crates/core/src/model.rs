//! Domain vocabulary shared by the controller, the allocator and the simulator.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;

/// Name of one deployed software version, e.g. `frontend-faulty`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VersionId(String);

impl VersionId {
    pub fn new(name: impl Into<String>) -> Result<Self, Error> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidScenario(
                "version name must not be empty".into(),
            ));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One observation of one pod, taken once per simulated second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub timestamp: u64,
    pub response_time_ms: f64,
    pub memory_mb: f64,
    pub restart_event: bool,
}

/// Samples of every version for some span of time, indexed by the version's
/// position in the cluster.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleBatch {
    per_version: Vec<Vec<MetricSample>>,
}

impl SampleBatch {
    pub fn new(versions: usize) -> Self {
        Self {
            per_version: alloc::vec![Vec::new(); versions],
        }
    }

    pub fn push(&mut self, version: usize, sample: MetricSample) {
        self.per_version[version].push(sample);
    }

    pub fn extend(&mut self, other: &SampleBatch) {
        for (mine, theirs) in self.per_version.iter_mut().zip(&other.per_version) {
            mine.extend_from_slice(theirs);
        }
    }

    pub fn version(&self, version: usize) -> &[MetricSample] {
        &self.per_version[version]
    }

    pub fn versions(&self) -> usize {
        self.per_version.len()
    }

    pub fn clear(&mut self) {
        self.per_version.iter_mut().for_each(Vec::clear);
    }
}

/// Aggregated metrics of one version over `[window_start, window_end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricWindow {
    pub version: VersionId,
    pub window_start: u64,
    pub window_end: u64,
    pub restart_count: u32,
    pub response_time_stddev_ms: f64,
    pub memory_stddev_mb: f64,
}

/// Relative importance of the three reliability metrics. Must sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityWeights {
    pub restart: f64,
    pub memory: f64,
    pub response_time: f64,
}

impl ReliabilityWeights {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(restart: f64, memory: f64, response_time: f64) -> Result<Self, Error> {
        let weights = Self {
            restart,
            memory,
            response_time,
        };
        weights.validate()?;
        Ok(weights)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let all = [self.restart, self.memory, self.response_time];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0 || *w > 1.0) {
            return Err(Error::InvalidConfig("each weight must lie in [0, 1]"));
        }
        if libm::fabs(all.iter().sum::<f64>() - 1.0) > Self::SUM_TOLERANCE {
            return Err(Error::InvalidConfig("weights must sum to 1"));
        }
        Ok(())
    }
}

impl Default for ReliabilityWeights {
    /// Restarts dominate, then memory variability, then response-time variability.
    fn default() -> Self {
        Self {
            restart: 0.5,
            memory: 0.3,
            response_time: 0.2,
        }
    }
}

/// Replica count per version, in cluster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicaPlan {
    entries: Vec<(VersionId, u32)>,
}

impl ReplicaPlan {
    pub fn new(entries: Vec<(VersionId, u32)>) -> Self {
        Self { entries }
    }

    pub fn from_counts(versions: &[VersionId], counts: &[u32]) -> Self {
        debug_assert_eq!(versions.len(), counts.len());
        Self {
            entries: versions
                .iter()
                .cloned()
                .zip(counts.iter().copied())
                .collect(),
        }
    }

    pub fn get(&self, version: &VersionId) -> Option<u32> {
        self.entries
            .iter()
            .find(|(v, _)| v == version)
            .map(|(_, c)| *c)
    }

    pub fn counts(&self) -> Vec<u32> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }

    pub fn versions(&self) -> impl Iterator<Item = &VersionId> {
        self.entries.iter().map(|(v, _)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VersionId, u32)> {
        self.entries.iter().map(|(v, c)| (v, *c))
    }

    pub fn total(&self) -> u32 {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn set(&mut self, version: &VersionId, count: u32) -> Result<(), Error> {
        let slot = self
            .entries
            .iter_mut()
            .find(|(v, _)| v == version)
            .ok_or_else(|| Error::UnknownVersion(version.as_str().into()))?;
        slot.1 = count;
        Ok(())
    }
}

/// Per-monitoring-tick vote and the consolidated decision of an action tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleAction {
    Increase,
    Decrease,
    NoChange,
}

impl ScaleAction {
    pub fn as_str(self) -> &'static str {
        match self {
            ScaleAction::Increase => "Increase",
            ScaleAction::Decrease => "Decrease",
            ScaleAction::NoChange => "NoChange",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Increase" => Some(ScaleAction::Increase),
            "Decrease" => Some(ScaleAction::Decrease),
            "NoChange" => Some(ScaleAction::NoChange),
            _ => None,
        }
    }
}

impl fmt::Display for ScaleAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Controller timers, replica bounds, CPU thresholds and metric weights.
///
/// `metric_window_s` is how far back each action tick looks when it
/// aggregates samples. It defaults to `action_time_s`, i.e. only the samples
/// gathered since the previous action tick count. A longer window behaves
/// like a range query over a metrics store and smooths out faults whose
/// period does not line up with the action interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub monitoring_time_s: u64,
    pub action_time_s: u64,
    pub metric_window_s: u64,
    pub total_replicas: u32,
    pub max_replicas: u32,
    pub min_replicas: u32,
    pub max_cpu_pct: f64,
    pub min_cpu_pct: f64,
    pub scaling_enabled: bool,
    pub weights: ReliabilityWeights,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            monitoring_time_s: 30,
            action_time_s: 120,
            metric_window_s: 120,
            total_replicas: 9,
            max_replicas: 24,
            min_replicas: 3,
            max_cpu_pct: 60.0,
            min_cpu_pct: 20.0,
            scaling_enabled: true,
            weights: ReliabilityWeights::default(),
        }
    }
}

impl ControllerConfig {
    /// Number of monitoring ticks per action tick.
    pub fn tick_ratio(&self) -> usize {
        (self.action_time_s / self.monitoring_time_s) as usize
    }
}

/// Returns `cfg` unchanged when every invariant holds.
pub fn validate_config(cfg: ControllerConfig) -> Result<ControllerConfig, Error> {
    if cfg.min_replicas > cfg.total_replicas {
        return Err(Error::InvalidConfig("min_replicas > total_replicas"));
    }
    if cfg.total_replicas > cfg.max_replicas {
        return Err(Error::InvalidConfig("total_replicas > max_replicas"));
    }
    let cpu_ok = cfg.min_cpu_pct.is_finite()
        && cfg.max_cpu_pct.is_finite()
        && cfg.min_cpu_pct >= 0.0
        && cfg.min_cpu_pct < cfg.max_cpu_pct
        && cfg.max_cpu_pct <= 100.0;
    if !cpu_ok {
        return Err(Error::InvalidConfig(
            "cpu thresholds must satisfy 0 <= min_cpu < max_cpu <= 100",
        ));
    }
    if cfg.monitoring_time_s == 0 {
        return Err(Error::InvalidConfig("monitoring_time must be positive"));
    }
    if cfg.action_time_s == 0 || !cfg.action_time_s.is_multiple_of(cfg.monitoring_time_s) {
        return Err(Error::InvalidConfig(
            "action_time must be a positive multiple of monitoring_time",
        ));
    }
    if cfg.metric_window_s == 0 || !cfg.metric_window_s.is_multiple_of(cfg.monitoring_time_s) {
        return Err(Error::InvalidConfig(
            "metric_window must be a positive multiple of monitoring_time",
        ));
    }
    cfg.weights.validate()?;
    Ok(cfg)
}

/// Controller-side view of one version.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionState {
    pub id: VersionId,
    pub replicas: u32,
    pub window: Option<MetricWindow>,
    pub reliability_score: f64,
}
