//! Closed loop: simulator feeds the controller, the controller's plans and
//! scores are applied back to the simulator, and every tick is recorded.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::allocation::DiversityFactor;
use crate::autoscaler::Controller;
use crate::error::Error;
use crate::model::{validate_config, ControllerConfig, ReplicaPlan, SampleBatch, VersionId};
use crate::sim::{ChaosSpec, Cluster, ClusterModelParams, WorkloadProfile};

/// A complete experiment: controller settings, versions with their starting
/// replicas, fault schedule, workload and pod model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: ControllerConfig,
    pub versions: Vec<(VersionId, u32)>,
    pub chaos: Vec<ChaosSpec>,
    pub workload: WorkloadProfile,
    pub model: ClusterModelParams,
    pub duration_s: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn initial_plan(&self) -> ReplicaPlan {
        ReplicaPlan::new(self.versions.clone())
    }

    pub fn version_ids(&self) -> Vec<VersionId> {
        self.versions.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn validate(&self) -> Result<(), Error> {
        validate_config(self.config)?;
        if self.versions.is_empty() {
            return Err(Error::NoVersions);
        }
        let unique: BTreeSet<_> = self.versions.iter().map(|(v, _)| v).collect();
        if unique.len() != self.versions.len() {
            return Err(Error::InvalidScenario(
                "version names must be unique".into(),
            ));
        }
        if self.versions.iter().any(|(_, c)| *c == 0) {
            return Err(Error::InvalidScenario(
                "every version needs at least one replica".into(),
            ));
        }
        let sum: u32 = self.versions.iter().map(|(_, c)| c).sum();
        if sum != self.config.total_replicas {
            return Err(Error::InvalidScenario(format!(
                "initial replicas sum to {sum} but total_replicas is {}",
                self.config.total_replicas
            )));
        }
        if (self.config.total_replicas as usize) < self.versions.len()
            || (self.config.min_replicas as usize) < self.versions.len()
        {
            return Err(Error::InvalidScenario(
                "min_replicas must leave room for one replica per version".into(),
            ));
        }
        for spec in &self.chaos {
            spec.validate()?;
            if !unique.contains(&spec.target) {
                return Err(Error::UnknownVersion(spec.target.to_string()));
            }
        }
        self.workload.validate()?;
        self.model.validate()?;
        if self.duration_s == 0 {
            return Err(Error::InvalidScenario("duration must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RecordKind {
    Monitor,
    Action,
    Reconfig,
    Chaos,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Monitor => "Monitor",
            RecordKind::Action => "Action",
            RecordKind::Reconfig => "Reconfig",
            RecordKind::Chaos => "Chaos",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Monitor" => Some(RecordKind::Monitor),
            "Action" => Some(RecordKind::Action),
            "Reconfig" => Some(RecordKind::Reconfig),
            "Chaos" => Some(RecordKind::Chaos),
            _ => None,
        }
    }
}

/// Per-version columns of a trace record. Which fields are filled depends on
/// the record kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VersionReport {
    pub score: Option<f64>,
    pub replicas: Option<u32>,
    /// Restarts in the record's window: the monitoring interval for Monitor
    /// rows, the metric window for Action rows.
    pub restarts_window: Option<u32>,
    pub rt_stddev_ms: Option<f64>,
    pub mem_stddev_mb: Option<f64>,
    pub lb_weight: Option<u32>,
    pub rt_mean_ms: Option<f64>,
}

/// One trace row.
///
/// `decision` carries the scale vote (Monitor), the consolidated decision
/// (Action), `generation=N` (Reconfig) or `phase:kind:target` (Chaos).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time_s: u64,
    pub kind: RecordKind,
    pub cpu_pct: Option<f64>,
    pub decision: String,
    pub total_replicas: Option<u32>,
    pub versions: Vec<VersionReport>,
    pub diversity: Option<DiversityFactor>,
}

/// Receives trace records in time order.
pub trait TraceSink {
    fn record(&mut self, record: TraceRecord);
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, record: TraceRecord) {
        self.push(record);
    }
}

/// Request totals over a whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub generated: u64,
    pub served: u64,
    pub rerouted: u64,
    pub dropped: u64,
    pub action_ticks: u64,
}

fn interval_report(replicas: u32, samples: &[crate::model::MetricSample]) -> VersionReport {
    let restarts = samples.iter().filter(|s| s.restart_event).count() as u32;
    let rt_mean_ms = (!samples.is_empty())
        .then(|| samples.iter().map(|s| s.response_time_ms).sum::<f64>() / samples.len() as f64);
    VersionReport {
        replicas: Some(replicas),
        restarts_window: Some(restarts),
        rt_mean_ms,
        ..VersionReport::default()
    }
}

/// Runs `scenario` for its full duration. Records already handed to `sink`
/// stay there if the run fails part-way.
pub fn run_scenario(scenario: &Scenario, sink: &mut impl TraceSink) -> Result<RunStats, Error> {
    scenario.validate()?;
    let initial = scenario.initial_plan();
    let mut cluster = Cluster::new(
        &initial,
        scenario.chaos.clone(),
        scenario.workload.clone(),
        scenario.model,
        scenario.seed,
    )?;
    let mut controller = Controller::new(scenario.config, initial)?;
    let cfg = *controller.config();
    let n = scenario.versions.len();

    sink.record(TraceRecord {
        time_s: 0,
        kind: RecordKind::Reconfig,
        cpu_pct: None,
        decision: format!("generation={}", cluster.weights().generation()),
        total_replicas: Some(controller.total_replicas()),
        versions: cluster
            .weights()
            .weights()
            .into_iter()
            .map(|w| VersionReport {
                lb_weight: Some(w),
                ..VersionReport::default()
            })
            .collect(),
        diversity: None,
    });

    let mut stats = RunStats::default();
    let mut pending = SampleBatch::new(n);
    for t in 0..scenario.duration_s {
        let step = cluster.step();
        stats.generated += step.generated;
        stats.served += step.served;
        stats.rerouted += step.rerouted;
        stats.dropped += step.dropped;
        for event in &step.chaos {
            let spec = &cluster.chaos()[event.spec];
            sink.record(TraceRecord {
                time_s: event.time,
                kind: RecordKind::Chaos,
                cpu_pct: None,
                decision: format!(
                    "{}:{}:{}",
                    event.phase.as_str(),
                    spec.kind.name(),
                    spec.target
                ),
                total_replicas: None,
                versions: alloc::vec![VersionReport::default(); n],
                diversity: None,
            });
        }
        pending.extend(&step.samples);

        let now = t + 1;
        if now % cfg.monitoring_time_s == 0 {
            let cpu = cluster.observed_cpu()?;
            let vote = controller.monitoring_tick(cpu, &pending);
            let counts = cluster.replica_counts();
            sink.record(TraceRecord {
                time_s: now,
                kind: RecordKind::Monitor,
                cpu_pct: Some(cpu),
                decision: vote.as_str().into(),
                total_replicas: Some(controller.total_replicas()),
                versions: (0..n)
                    .map(|v| interval_report(counts[v], pending.version(v)))
                    .collect(),
                diversity: None,
            });
            pending.clear();
        }
        if now % cfg.action_time_s == 0 {
            let outcome = controller.action_tick(now)?;
            cluster.apply_plan(&outcome.plan)?;
            let table = cluster.reconfigure_routing(&outcome.scores).clone();
            let weights = table.weights();
            stats.action_ticks += 1;
            sink.record(TraceRecord {
                time_s: now,
                kind: RecordKind::Action,
                cpu_pct: outcome.cpu_pct,
                decision: outcome.decision.as_str().into(),
                total_replicas: Some(outcome.total),
                versions: outcome
                    .windows
                    .iter()
                    .zip(&outcome.scores)
                    .zip(outcome.plan.counts())
                    .zip(&weights)
                    .map(|(((w, &score), replicas), &weight)| VersionReport {
                        score: Some(score),
                        replicas: Some(replicas),
                        restarts_window: Some(w.restart_count),
                        rt_stddev_ms: Some(w.response_time_stddev_ms),
                        mem_stddev_mb: Some(w.memory_stddev_mb),
                        lb_weight: Some(weight),
                        rt_mean_ms: None,
                    })
                    .collect(),
                diversity: Some(outcome.diversity),
            });
            sink.record(TraceRecord {
                time_s: now,
                kind: RecordKind::Reconfig,
                cpu_pct: None,
                decision: format!("generation={}", table.generation()),
                total_replicas: Some(outcome.total),
                versions: weights
                    .iter()
                    .map(|&w| VersionReport {
                        lb_weight: Some(w),
                        ..VersionReport::default()
                    })
                    .collect(),
                diversity: None,
            });
        }
    }
    Ok(stats)
}
