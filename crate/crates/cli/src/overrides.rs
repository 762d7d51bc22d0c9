//! Command-line overrides of scenario controller settings.

use verscale_core::{Scenario, VersionId};

use crate::duration::Seconds;
use crate::scenario::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    /// `name*replicas,...`; names without a count share the total evenly.
    #[arg(long, value_name = "SPEC")]
    pub deployment_images_replicas: Option<String>,
    #[arg(long, value_name = "N")]
    pub total_replicas: Option<u32>,
    #[arg(long, value_name = "DURATION")]
    pub monitoring_time: Option<Seconds>,
    #[arg(long, value_name = "DURATION")]
    pub action_time: Option<Seconds>,
    /// Lookback of each reliability evaluation.
    #[arg(long, value_name = "DURATION")]
    pub metric_window: Option<Seconds>,
    #[arg(long, value_name = "N")]
    pub max_replicas: Option<u32>,
    #[arg(long, value_name = "N")]
    pub min_replicas: Option<u32>,
    #[arg(long, value_name = "PCT")]
    pub max_cpu: Option<f64>,
    #[arg(long, value_name = "PCT")]
    pub min_cpu: Option<f64>,
    #[arg(long, value_enum)]
    pub scaling: Option<Switch>,
}

/// Splits `total` across `n` slots, earlier slots taking the remainder.
pub fn even_split(total: u32, n: usize) -> Vec<u32> {
    let n32 = n as u32;
    (0..n32)
        .map(|i| total / n32 + u32::from(i < total % n32))
        .collect()
}

fn parse_images(spec: &str, total: u32) -> Result<Vec<(VersionId, u32)>, ScenarioError> {
    let bad = |why: &str| ScenarioError::Validation(format!("--deployment-images-replicas: {why}"));
    let mut names = Vec::new();
    let mut counts = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, count) = match item.rsplit_once('*') {
            Some((name, c)) => (
                name,
                Some(
                    c.trim()
                        .parse::<u32>()
                        .map_err(|_| bad("replica count must be an integer"))?,
                ),
            ),
            None => (item, None),
        };
        names.push(VersionId::new(name.trim()).map_err(|_| bad("empty image name"))?);
        counts.push(count);
    }
    if names.is_empty() {
        return Err(bad("no images given"));
    }
    let counts: Vec<u32> = if counts.iter().all(Option::is_some) {
        counts.into_iter().flatten().collect()
    } else {
        even_split(total, names.len())
    };
    Ok(names.into_iter().zip(counts).collect())
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }

    /// Applies every given flag, then revalidates the scenario.
    pub fn apply(&self, scenario: &mut Scenario) -> Result<(), ScenarioError> {
        let c = &mut scenario.config;
        if let Some(v) = self.total_replicas {
            c.total_replicas = v;
        }
        if let Some(v) = self.monitoring_time {
            c.monitoring_time_s = v.0;
        }
        if let Some(v) = self.action_time {
            let follows = c.metric_window_s == c.action_time_s;
            c.action_time_s = v.0;
            if follows && self.metric_window.is_none() {
                c.metric_window_s = v.0;
            }
        }
        if let Some(v) = self.metric_window {
            c.metric_window_s = v.0;
        }
        if let Some(v) = self.max_replicas {
            c.max_replicas = v;
        }
        if let Some(v) = self.min_replicas {
            c.min_replicas = v;
        }
        if let Some(v) = self.max_cpu {
            c.max_cpu_pct = v;
        }
        if let Some(v) = self.min_cpu {
            c.min_cpu_pct = v;
        }
        if let Some(v) = self.scaling {
            c.scaling_enabled = v == Switch::On;
        }
        let total = c.total_replicas;
        if let Some(spec) = &self.deployment_images_replicas {
            scenario.versions = parse_images(spec, total)?;
        } else if scenario.versions.iter().map(|(_, r)| r).sum::<u32>() != total {
            let split = even_split(total, scenario.versions.len());
            for ((_, r), s) in scenario.versions.iter_mut().zip(split) {
                *r = s;
            }
        }
        scenario.validate()?;
        Ok(())
    }
}
