use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{ChaosKind, ChaosSpec, WorkloadProfile};
use crate::error::Error;
use crate::loadbalancer::{derive_weights, SmoothRouter, WeightTable};
use crate::model::{MetricSample, ReplicaPlan, SampleBatch, VersionId};

/// Linear pod performance model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterModelParams {
    /// CPU percent one pod spends per request/s it serves.
    pub cpu_cost_pct_per_rps: f64,
    pub base_response_ms: f64,
    pub base_memory_mb: f64,
    /// Above this CPU level response time grows linearly.
    pub queue_knee_pct: f64,
    /// Extra milliseconds per CPU percent above the knee.
    pub inflation_slope: f64,
}

impl Default for ClusterModelParams {
    fn default() -> Self {
        Self {
            cpu_cost_pct_per_rps: 4.0,
            base_response_ms: 50.0,
            base_memory_mb: 64.0,
            queue_knee_pct: 70.0,
            inflation_slope: 10.0,
        }
    }
}

impl ClusterModelParams {
    pub fn validate(&self) -> Result<(), Error> {
        let all = [
            self.cpu_cost_pct_per_rps,
            self.base_response_ms,
            self.base_memory_mb,
            self.queue_knee_pct,
            self.inflation_slope,
        ];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidScenario(
                "model parameters must be positive".into(),
            ));
        }
        if self.queue_knee_pct >= 100.0 {
            return Err(Error::InvalidScenario(
                "queue_knee_pct must be below 100".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PodStatus {
    Running,
    Killed { until: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pod {
    pub status: PodStatus,
    pub base_memory_mb: f64,
    pub extra_memory_mb: f64,
    pub restart_count: u32,
    /// CPU and latency of the most recent tick.
    pub cpu_pct: f64,
    pub response_time_ms: f64,
}

impl Pod {
    fn new(base_memory_mb: f64) -> Self {
        Self {
            status: PodStatus::Running,
            base_memory_mb,
            extra_memory_mb: 0.0,
            restart_count: 0,
            cpu_pct: 0.0,
            response_time_ms: 0.0,
        }
    }

    pub fn is_running(&self) -> bool {
        self.status == PodStatus::Running
    }

    pub fn memory_mb(&self) -> f64 {
        self.base_memory_mb + self.extra_memory_mb
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChaosPhase {
    Start,
    Inject,
    Stop,
}

impl ChaosPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            ChaosPhase::Start => "start",
            ChaosPhase::Inject => "inject",
            ChaosPhase::Stop => "stop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChaosEvent {
    pub time: u64,
    /// Index into the cluster's chaos list.
    pub spec: usize,
    pub phase: ChaosPhase,
}

/// What one simulated second produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub time: u64,
    pub samples: SampleBatch,
    pub generated: u64,
    /// Served by the first version picked.
    pub served: u64,
    /// First pick had no running pod; served by a later pick.
    pub rerouted: u64,
    /// No version had a running pod.
    pub dropped: u64,
    pub chaos: Vec<ChaosEvent>,
}

/// Pods of every version plus the router, chaos schedule and workload that
/// drive them.
#[derive(Debug, Clone)]
pub struct Cluster {
    versions: Vec<VersionId>,
    pods: Vec<Vec<Pod>>,
    chaos: Vec<ChaosSpec>,
    workload: WorkloadProfile,
    model: ClusterModelParams,
    router: SmoothRouter,
    cursors: Vec<usize>,
    rng: ChaCha8Rng,
    carry: f64,
    now: u64,
}

impl Cluster {
    /// Starts every pod Running with equal routing weights. Chaos targets must
    /// name versions of `initial`.
    pub fn new(
        initial: &ReplicaPlan,
        chaos: Vec<ChaosSpec>,
        workload: WorkloadProfile,
        model: ClusterModelParams,
        seed: u64,
    ) -> Result<Self, Error> {
        if initial.is_empty() {
            return Err(Error::NoVersions);
        }
        model.validate()?;
        workload.validate()?;
        let versions: Vec<VersionId> = initial.versions().cloned().collect();
        for spec in &chaos {
            spec.validate()?;
            if !versions.contains(&spec.target) {
                return Err(Error::UnknownVersion(format!("{}", spec.target)));
            }
        }
        let pods = initial
            .iter()
            .map(|(_, count)| (0..count).map(|_| Pod::new(model.base_memory_mb)).collect())
            .collect();
        let table = derive_weights(
            &versions
                .iter()
                .map(|v| (v.clone(), 1.0))
                .collect::<Vec<_>>(),
        );
        Ok(Self {
            cursors: alloc::vec![0; versions.len()],
            router: SmoothRouter::new(table),
            versions,
            pods,
            chaos,
            workload,
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            carry: 0.0,
            now: 0,
        })
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn versions(&self) -> &[VersionId] {
        &self.versions
    }

    pub fn pods(&self, version: usize) -> &[Pod] {
        &self.pods[version]
    }

    pub fn chaos(&self) -> &[ChaosSpec] {
        &self.chaos
    }

    pub fn weights(&self) -> &WeightTable {
        self.router.table()
    }

    pub fn replica_counts(&self) -> Vec<u32> {
        self.pods.iter().map(|p| p.len() as u32).collect()
    }

    fn index_of(&self, version: &VersionId) -> Option<usize> {
        self.versions.iter().position(|v| v == version)
    }

    /// Resizes every version to its planned count. Killed pods go first,
    /// then the newest Running pods; new pods start Running.
    pub fn apply_plan(&mut self, plan: &ReplicaPlan) -> Result<(), Error> {
        for (id, _) in plan.iter() {
            if self.index_of(id).is_none() {
                return Err(Error::UnknownVersion(format!("{id}")));
            }
        }
        for (idx, id) in self.versions.iter().enumerate() {
            let target = plan
                .get(id)
                .ok_or_else(|| Error::UnknownVersion(format!("{id}")))?
                as usize;
            let pods = &mut self.pods[idx];
            while pods.len() > target {
                let victim = pods
                    .iter()
                    .rposition(|p| !p.is_running())
                    .unwrap_or(pods.len() - 1);
                pods.remove(victim);
            }
            while pods.len() < target {
                pods.push(Pod::new(self.model.base_memory_mb));
            }
        }
        Ok(())
    }

    /// New routing weights from per-version scores (cluster order).
    pub fn reconfigure_routing(&mut self, scores: &[f64]) -> &WeightTable {
        let keyed: Vec<_> = self
            .versions
            .iter()
            .cloned()
            .zip(scores.iter().copied())
            .collect();
        self.router.reconfigure(&keyed)
    }

    /// Mean CPU of the Running pods after the last tick.
    pub fn observed_cpu(&self) -> Result<f64, Error> {
        let (sum, n) = self
            .pods
            .iter()
            .flatten()
            .filter(|p| p.is_running())
            .fold((0.0, 0usize), |(s, n), p| (s + p.cpu_pct, n + 1));
        if n == 0 {
            return Err(Error::NoRunningPods);
        }
        Ok(sum / n as f64)
    }

    fn jitter_factor(&mut self) -> f64 {
        if self.workload.jitter == 0.0 {
            return 1.0;
        }
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        1.0 + self.workload.jitter * (2.0 * unit - 1.0)
    }

    /// Advances one simulated second.
    pub fn step(&mut self) -> StepReport {
        let t = self.now;
        let n = self.versions.len();
        let mut events = Vec::new();

        for (i, spec) in self.chaos.iter().enumerate() {
            if !spec.active {
                continue;
            }
            if spec.start_s == t {
                events.push(ChaosEvent {
                    time: t,
                    spec: i,
                    phase: ChaosPhase::Start,
                });
            }
            if spec.stop_s == Some(t) {
                events.push(ChaosEvent {
                    time: t,
                    spec: i,
                    phase: ChaosPhase::Stop,
                });
            }
            if spec.opens_at(t) {
                events.push(ChaosEvent {
                    time: t,
                    spec: i,
                    phase: ChaosPhase::Inject,
                });
            }
        }

        // recoveries first, so a pod whose window closes now serves this tick
        let mut recovered: Vec<Vec<bool>> = self
            .pods
            .iter()
            .map(|p| alloc::vec![false; p.len()])
            .collect();
        for (v, pods) in self.pods.iter_mut().enumerate() {
            for (p, pod) in pods.iter_mut().enumerate() {
                if let PodStatus::Killed { until } = pod.status {
                    if until <= t {
                        pod.status = PodStatus::Running;
                        pod.restart_count += 1;
                        recovered[v][p] = true;
                    }
                }
            }
        }

        let mut delay = alloc::vec![0.0f64; n];
        let mut extra_memory = alloc::vec![0.0f64; n];
        for spec in self.chaos.iter().filter(|s| s.active) {
            let v = match self.versions.iter().position(|id| *id == spec.target) {
                Some(v) => v,
                None => continue,
            };
            match spec.kind {
                ChaosKind::PodKill => {
                    if spec.opens_at(t) {
                        let until = t + spec.duration_s;
                        for pod in self.pods[v].iter_mut().filter(|p| p.is_running()) {
                            pod.status = PodStatus::Killed { until };
                        }
                    }
                }
                ChaosKind::HttpDelay { .. } => {
                    if spec.in_effect(t) {
                        delay[v] += spec.extra_delay_ms();
                    }
                }
                ChaosKind::MemoryStress { .. } => {
                    if spec.in_effect(t) {
                        extra_memory[v] += spec.extra_memory_mb();
                    }
                }
            }
        }

        // workload
        let rate = self.workload.rate_at(t) * self.jitter_factor() + self.carry;
        let generated = libm::floor(rate.max(0.0)) as u64;
        self.carry = rate.max(0.0) - generated as f64;

        let running: Vec<Vec<usize>> = self
            .pods
            .iter()
            .map(|pods| {
                pods.iter()
                    .enumerate()
                    .filter(|(_, p)| p.is_running())
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let mut per_pod: Vec<Vec<u64>> = self
            .pods
            .iter()
            .map(|p| alloc::vec![0u64; p.len()])
            .collect();
        let (mut served, mut rerouted, mut dropped) = (0u64, 0u64, 0u64);
        if running.iter().all(Vec::is_empty) {
            dropped = generated;
        } else {
            for _ in 0..generated {
                let mut v = self.router.next_index();
                if running[v].is_empty() {
                    while running[v].is_empty() {
                        v = self.router.next_index();
                    }
                    rerouted += 1;
                } else {
                    served += 1;
                }
                let live = &running[v];
                let pod = live[self.cursors[v] % live.len()];
                self.cursors[v] = (self.cursors[v] + 1) % live.len();
                per_pod[v][pod] += 1;
            }
        }

        let mut samples = SampleBatch::new(n);
        let m = self.model;
        for (v, pods) in self.pods.iter_mut().enumerate() {
            for (p, pod) in pods.iter_mut().enumerate() {
                pod.extra_memory_mb = extra_memory[v];
                if !pod.is_running() {
                    pod.cpu_pct = 0.0;
                    continue;
                }
                pod.cpu_pct = (per_pod[v][p] as f64 * m.cpu_cost_pct_per_rps).min(100.0);
                pod.response_time_ms = m.base_response_ms
                    + delay[v]
                    + (pod.cpu_pct - m.queue_knee_pct).max(0.0) * m.inflation_slope;
                samples.push(
                    v,
                    MetricSample {
                        timestamp: t,
                        response_time_ms: pod.response_time_ms,
                        memory_mb: pod.memory_mb(),
                        restart_event: recovered[v][p],
                    },
                );
            }
        }

        self.now += 1;
        StepReport {
            time: t,
            samples,
            generated,
            served,
            rerouted,
            dropped,
            chaos: events,
        }
    }
}
