//! Diversity-aware reliability control for multi-version microservices.
//!
//! The crate scores each running software version on restart count,
//! response-time variability and memory variability, apportions a replica
//! budget across versions in proportion to those scores while keeping every
//! version alive, and grows or shrinks the budget from CPU history. A
//! deterministic cluster simulator with chaos injection closes the loop so
//! whole experiments can be replayed without a real orchestrator.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command line
//! live in the `verscale` crate.
#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod allocation;
pub mod autoscaler;
pub mod driver;
pub mod error;
pub mod loadbalancer;
pub mod metrics;
pub mod model;
pub mod scoring;
pub mod sim;

pub use allocation::{adjust_replica_distribution, diversity_factor, DiversityFactor};
pub use autoscaler::{
    decide_scale_based_on_history, scaling_action, ActionOutcome, Controller, ScaleHistory,
};
pub use driver::{
    run_scenario, RecordKind, RunStats, Scenario, TraceRecord, TraceSink, VersionReport,
};
pub use error::Error;
pub use loadbalancer::{derive_weights, SmoothRouter, WeightTable};
pub use metrics::{aggregate_window, normalize_metric, Metric, NormalizationContext};
pub use model::{
    validate_config, ControllerConfig, MetricSample, MetricWindow, ReliabilityWeights, ReplicaPlan,
    SampleBatch, ScaleAction, VersionId, VersionState,
};
pub use scoring::{reliability_score, score_all};
pub use sim::{ChaosKind, ChaosSpec, Cluster, ClusterModelParams, WorkloadProfile};
