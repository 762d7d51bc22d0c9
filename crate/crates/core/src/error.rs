use alloc::string::String;

/// Errors raised by the controller, the allocation routines and the simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("metric window is empty: end {end} <= start {start}")]
    EmptyWindowDuration { start: u64, end: u64 },
    #[error("sample at t={timestamp} falls outside window [{start}, {end})")]
    SampleOutsideWindow {
        timestamp: u64,
        start: u64,
        end: u64,
    },
    #[error("utility {0} is outside [0, 1]")]
    InvalidUtility(f64),
    #[error("metric windows do not cover the same interval")]
    MismatchedWindows,
    #[error("no versions supplied")]
    NoVersions,
    #[error("replica budget {total} is smaller than the {versions} versions it must cover")]
    InfeasibleBudget { total: u32, versions: usize },
    #[error("every reliability score is zero")]
    AllScoresZero,
    #[error("score {0} is negative or not finite")]
    InvalidScore(f64),
    #[error("no running pods to observe")]
    NoRunningPods,
    #[error("unknown version `{0}`")]
    UnknownVersion(String),
}
