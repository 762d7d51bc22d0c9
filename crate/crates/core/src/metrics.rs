//! Window aggregation and min-max utility normalization.

use alloc::vec::Vec;

use crate::error::Error;
use crate::model::{MetricSample, MetricWindow, VersionId};

/// The three reliability metrics, all "lower is better".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Restarts,
    ResponseTimeStddev,
    MemoryStddev,
}

impl Metric {
    pub const ALL: [Metric; 3] = [
        Metric::Restarts,
        Metric::ResponseTimeStddev,
        Metric::MemoryStddev,
    ];

    pub fn of(self, window: &MetricWindow) -> f64 {
        match self {
            Metric::Restarts => f64::from(window.restart_count),
            Metric::ResponseTimeStddev => window.response_time_stddev_ms,
            Metric::MemoryStddev => window.memory_stddev_mb,
        }
    }
}

/// Running mean / variance accumulator (Welford).
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn population_stddev(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        libm::sqrt((self.m2 / self.n as f64).max(0.0))
    }
}

/// Collapses the samples of one version over `[start, end)` into restart
/// count plus population standard deviations of response time and memory.
pub fn aggregate_window(
    samples: &[MetricSample],
    start: u64,
    end: u64,
    version: VersionId,
) -> Result<MetricWindow, Error> {
    if end <= start {
        return Err(Error::EmptyWindowDuration { start, end });
    }
    let mut restarts = 0u32;
    let mut response = Moments::default();
    let mut memory = Moments::default();
    for s in samples {
        if s.timestamp < start || s.timestamp >= end {
            return Err(Error::SampleOutsideWindow {
                timestamp: s.timestamp,
                start,
                end,
            });
        }
        if s.restart_event {
            restarts += 1;
        }
        response.push(s.response_time_ms);
        memory.push(s.memory_mb);
    }
    Ok(MetricWindow {
        version,
        window_start: start,
        window_end: end,
        restart_count: restarts,
        response_time_stddev_ms: response.population_stddev(),
        memory_stddev_mb: memory.population_stddev(),
    })
}

/// Min and max of each metric across all versions of one window. This is the
/// context every per-version utility is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationContext {
    restarts: (f64, f64),
    response_time: (f64, f64),
    memory: (f64, f64),
}

impl NormalizationContext {
    pub fn from_windows(windows: &[MetricWindow]) -> Result<Self, Error> {
        if windows.is_empty() {
            return Err(Error::NoVersions);
        }
        let bounds = |metric: Metric| {
            windows
                .iter()
                .map(|w| metric.of(w))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                })
        };
        Ok(Self {
            restarts: bounds(Metric::Restarts),
            response_time: bounds(Metric::ResponseTimeStddev),
            memory: bounds(Metric::MemoryStddev),
        })
    }

    pub fn bounds(&self, metric: Metric) -> (f64, f64) {
        match metric {
            Metric::Restarts => self.restarts,
            Metric::ResponseTimeStddev => self.response_time,
            Metric::MemoryStddev => self.memory,
        }
    }

    pub fn utility(&self, metric: Metric, value: f64) -> f64 {
        let (min, max) = self.bounds(metric);
        linear_utility(value, min, max)
    }
}

fn linear_utility(value: f64, min: f64, max: f64) -> f64 {
    if max <= min {
        return 1.0;
    }
    (1.0 - (value - min) / (max - min)).clamp(0.0, 1.0)
}

/// Maps raw values onto `[0, 1]`, lowest value to 1 and highest to 0. When
/// every value is equal all utilities are 1.
pub fn normalize_metric(values: &[f64]) -> Vec<f64> {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    values
        .iter()
        .map(|&v| linear_utility(v, min, max))
        .collect()
}
