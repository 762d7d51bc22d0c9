//! Deterministic one-second-tick stand-in for a multi-version deployment.

mod chaos;
mod cluster;
mod workload;

pub use chaos::{ChaosKind, ChaosSpec};
pub use cluster::{
    ChaosEvent, ChaosPhase, Cluster, ClusterModelParams, Pod, PodStatus, StepReport,
};
pub use workload::WorkloadProfile;
