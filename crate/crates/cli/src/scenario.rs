//! TOML scenario files. The schema is documented in `scenarios/SCHEMA.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use verscale_core::{
    ChaosKind, ChaosSpec, ClusterModelParams, ControllerConfig, ReliabilityWeights, Scenario,
    VersionId, WorkloadProfile,
};

use crate::duration::Seconds;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

impl From<verscale_core::Error> for ScenarioError {
    fn from(e: verscale_core::Error) -> Self {
        ScenarioError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    duration: Seconds,
    seed: u64,
    controller: ControllerSection,
    versions: Vec<VersionEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    chaos: Vec<ChaosEntry>,
    workload: WorkloadSection,
    model: ModelSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerSection {
    total_replicas: u32,
    max_replicas: u32,
    min_replicas: u32,
    monitoring_time: Seconds,
    action_time: Seconds,
    #[serde(default)]
    metric_window: Option<Seconds>,
    max_cpu: f64,
    min_cpu: f64,
    scaling: bool,
    #[serde(default)]
    weights: Option<WeightsSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsSection {
    restart: f64,
    memory: f64,
    response_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VersionEntry {
    name: String,
    replicas: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ChaosKindName {
    PodKill,
    HttpDelay,
    MemoryStress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChaosEntry {
    kind: ChaosKindName,
    target: String,
    period: Seconds,
    duration: Seconds,
    #[serde(default = "zero")]
    start: Seconds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop: Option<Seconds>,
    #[serde(default = "yes")]
    active: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delay_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workers: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mb_per_worker: Option<f64>,
}

fn zero() -> Seconds {
    Seconds(0)
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadSection {
    requests_per_user_per_s: f64,
    #[serde(default)]
    jitter: f64,
    steps: Vec<WorkloadStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadStep {
    at: Seconds,
    users: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    cpu_cost_pct_per_rps: f64,
    base_response_ms: f64,
    base_memory_mb: f64,
    queue_knee_pct: f64,
    inflation_slope: f64,
}

fn version_id(name: &str, field: &str) -> Result<VersionId, ScenarioError> {
    VersionId::new(name)
        .map_err(|_| ScenarioError::Validation(format!("{field}: version name must not be empty")))
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let c = self.controller;
        let weights = c
            .weights
            .map(|w| ReliabilityWeights {
                restart: w.restart,
                memory: w.memory,
                response_time: w.response_time,
            })
            .unwrap_or_default();
        let config = ControllerConfig {
            monitoring_time_s: c.monitoring_time.0,
            action_time_s: c.action_time.0,
            metric_window_s: c.metric_window.unwrap_or(c.action_time).0,
            total_replicas: c.total_replicas,
            max_replicas: c.max_replicas,
            min_replicas: c.min_replicas,
            max_cpu_pct: c.max_cpu,
            min_cpu_pct: c.min_cpu,
            scaling_enabled: c.scaling,
            weights,
        };
        let versions = self
            .versions
            .iter()
            .enumerate()
            .map(|(i, v)| {
                Ok((
                    version_id(&v.name, &format!("versions[{i}].name"))?,
                    v.replicas,
                ))
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let chaos = self
            .chaos
            .iter()
            .enumerate()
            .map(|(i, entry)| chaos_spec(i, entry))
            .collect::<Result<Vec<_>, _>>()?;
        let scenario = Scenario {
            name: self.name,
            config,
            versions,
            chaos,
            workload: WorkloadProfile {
                steps: self
                    .workload
                    .steps
                    .iter()
                    .map(|s| (s.at.0, s.users))
                    .collect(),
                requests_per_user_per_s: self.workload.requests_per_user_per_s,
                jitter: self.workload.jitter,
            },
            model: ClusterModelParams {
                cpu_cost_pct_per_rps: self.model.cpu_cost_pct_per_rps,
                base_response_ms: self.model.base_response_ms,
                base_memory_mb: self.model.base_memory_mb,
                queue_knee_pct: self.model.queue_knee_pct,
                inflation_slope: self.model.inflation_slope,
            },
            duration_s: self.duration.0,
            seed: self.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn from_scenario(s: &Scenario) -> Self {
        let c = &s.config;
        ScenarioFile {
            name: s.name.clone(),
            duration: Seconds(s.duration_s),
            seed: s.seed,
            controller: ControllerSection {
                total_replicas: c.total_replicas,
                max_replicas: c.max_replicas,
                min_replicas: c.min_replicas,
                monitoring_time: Seconds(c.monitoring_time_s),
                action_time: Seconds(c.action_time_s),
                metric_window: Some(Seconds(c.metric_window_s)),
                max_cpu: c.max_cpu_pct,
                min_cpu: c.min_cpu_pct,
                scaling: c.scaling_enabled,
                weights: Some(WeightsSection {
                    restart: c.weights.restart,
                    memory: c.weights.memory,
                    response_time: c.weights.response_time,
                }),
            },
            versions: s
                .versions
                .iter()
                .map(|(v, r)| VersionEntry {
                    name: v.to_string(),
                    replicas: *r,
                })
                .collect(),
            chaos: s.chaos.iter().map(chaos_entry).collect(),
            workload: WorkloadSection {
                requests_per_user_per_s: s.workload.requests_per_user_per_s,
                jitter: s.workload.jitter,
                steps: s
                    .workload
                    .steps
                    .iter()
                    .map(|&(at, users)| WorkloadStep {
                        at: Seconds(at),
                        users,
                    })
                    .collect(),
            },
            model: ModelSection {
                cpu_cost_pct_per_rps: s.model.cpu_cost_pct_per_rps,
                base_response_ms: s.model.base_response_ms,
                base_memory_mb: s.model.base_memory_mb,
                queue_knee_pct: s.model.queue_knee_pct,
                inflation_slope: s.model.inflation_slope,
            },
        }
    }
}

fn chaos_spec(i: usize, e: &ChaosEntry) -> Result<ChaosSpec, ScenarioError> {
    let missing = |field: &str| {
        ScenarioError::Validation(format!("chaos[{i}].{field} is required for this kind"))
    };
    let stray = |field: &str| {
        ScenarioError::Validation(format!("chaos[{i}].{field} does not apply to this kind"))
    };
    let kind = match e.kind {
        ChaosKindName::PodKill => {
            if e.delay_ms.is_some() {
                return Err(stray("delay_ms"));
            }
            if e.workers.is_some() || e.mb_per_worker.is_some() {
                return Err(stray("workers"));
            }
            ChaosKind::PodKill
        }
        ChaosKindName::HttpDelay => {
            if e.workers.is_some() || e.mb_per_worker.is_some() {
                return Err(stray("workers"));
            }
            ChaosKind::HttpDelay {
                delay_ms: e.delay_ms.ok_or_else(|| missing("delay_ms"))?,
            }
        }
        ChaosKindName::MemoryStress => {
            if e.delay_ms.is_some() {
                return Err(stray("delay_ms"));
            }
            ChaosKind::MemoryStress {
                workers: e.workers.ok_or_else(|| missing("workers"))?,
                mb_per_worker: e.mb_per_worker.ok_or_else(|| missing("mb_per_worker"))?,
            }
        }
    };
    let spec = ChaosSpec {
        kind,
        target: version_id(&e.target, &format!("chaos[{i}].target"))?,
        period_s: e.period.0,
        duration_s: e.duration.0,
        start_s: e.start.0,
        stop_s: e.stop.map(|s| s.0),
        active: e.active,
    };
    spec.validate()
        .map_err(|err| ScenarioError::Validation(format!("chaos[{i}]: {err}")))?;
    Ok(spec)
}

fn chaos_entry(spec: &ChaosSpec) -> ChaosEntry {
    let (kind, delay_ms, workers, mb_per_worker) = match spec.kind {
        ChaosKind::PodKill => (ChaosKindName::PodKill, None, None, None),
        ChaosKind::HttpDelay { delay_ms } => (ChaosKindName::HttpDelay, Some(delay_ms), None, None),
        ChaosKind::MemoryStress {
            workers,
            mb_per_worker,
        } => (
            ChaosKindName::MemoryStress,
            None,
            Some(workers),
            Some(mb_per_worker),
        ),
    };
    ChaosEntry {
        kind,
        target: spec.target.to_string(),
        period: Seconds(spec.period_s),
        duration: Seconds(spec.duration_s),
        start: Seconds(spec.start_s),
        stop: spec.stop_s.map(Seconds),
        active: spec.active,
        delay_ms,
        workers,
        mb_per_worker,
    }
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    file.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

/// Serializes a scenario; `parse_scenario` reads it back unchanged.
pub fn write_scenario(scenario: &Scenario) -> String {
    toml::to_string(&ScenarioFile::from_scenario(scenario)).expect("scenario serializes to TOML")
}
