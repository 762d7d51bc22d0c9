//! Run summary, computed only from trace rows.

use std::fmt::Write as _;

use verscale_core::{RecordKind, TraceRecord};

use crate::trace::{Trace, TraceError};

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub p50: f64,
    pub p95: f64,
    pub p99: f64,
    pub max: f64,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Distribution {
            count: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p50: percentile(&sorted, 50.0),
            p95: percentile(&sorted, 95.0),
            p99: percentile(&sorted, 99.0),
            max: sorted[sorted.len() - 1],
        })
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "mean {:.3}  p50 {:.3}  p95 {:.3}  p99 {:.3}  max {:.3}  (n={})",
            self.mean, self.p50, self.p95, self.p99, self.max, self.count
        )
    }
}

/// One action tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub time_s: u64,
    pub cpu_pct: Option<f64>,
    pub decision: String,
    pub total: Option<u32>,
    pub plan: Vec<Option<u32>>,
    pub scores: Vec<Option<f64>>,
    pub df: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub scenario: String,
    pub versions: Vec<String>,
    pub end_time_s: u64,
    pub monitor_ticks: usize,
    pub final_total: Option<u32>,
    pub final_plan: Vec<Option<u32>>,
    pub restarts: Vec<u64>,
    pub response_time: Vec<Option<Distribution>>,
    pub response_time_all: Option<Distribution>,
    pub cpu: Option<Distribution>,
    pub cycles: Vec<Cycle>,
    pub chaos_events: Vec<(u64, String)>,
}

fn action_cycle(r: &TraceRecord) -> Cycle {
    Cycle {
        time_s: r.time_s,
        cpu_pct: r.cpu_pct,
        decision: r.decision.clone(),
        total: r.total_replicas,
        plan: r.versions.iter().map(|v| v.replicas).collect(),
        scores: r.versions.iter().map(|v| v.score).collect(),
        df: r
            .diversity
            .map(|d| d.to_string())
            .unwrap_or_else(|| "-".into()),
    }
}

pub fn summarize(trace: &Trace) -> Result<Summary, TraceError> {
    if trace.records.is_empty() {
        return Err(TraceError::Malformed {
            line: 3,
            reason: "trace has no records".into(),
        });
    }
    let n = trace.versions.len();
    let monitors: Vec<&TraceRecord> = trace
        .records
        .iter()
        .filter(|r| r.kind == RecordKind::Monitor)
        .collect();
    let cycles: Vec<Cycle> = trace
        .records
        .iter()
        .filter(|r| r.kind == RecordKind::Action)
        .map(action_cycle)
        .collect();

    let restarts = (0..n)
        .map(|v| {
            monitors
                .iter()
                .filter_map(|r| r.versions[v].restarts_window)
                .map(u64::from)
                .sum()
        })
        .collect();
    let rt_per_version: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            monitors
                .iter()
                .filter_map(|r| r.versions[v].rt_mean_ms)
                .collect()
        })
        .collect();
    let rt_all: Vec<f64> = rt_per_version.iter().flatten().copied().collect();
    let cpu: Vec<f64> = monitors.iter().filter_map(|r| r.cpu_pct).collect();

    let last_with_plan = trace
        .records
        .iter()
        .rev()
        .find(|r| matches!(r.kind, RecordKind::Action | RecordKind::Monitor));
    Ok(Summary {
        scenario: trace.scenario.clone(),
        versions: trace.versions.clone(),
        end_time_s: trace.records.last().map(|r| r.time_s).unwrap_or(0),
        monitor_ticks: monitors.len(),
        final_total: last_with_plan.and_then(|r| r.total_replicas),
        final_plan: last_with_plan
            .map(|r| r.versions.iter().map(|v| v.replicas).collect())
            .unwrap_or_else(|| vec![None; n]),
        restarts,
        response_time: rt_per_version.iter().map(|v| Distribution::of(v)).collect(),
        response_time_all: Distribution::of(&rt_all),
        cpu: Distribution::of(&cpu),
        cycles,
        chaos_events: trace
            .records
            .iter()
            .filter(|r| r.kind == RecordKind::Chaos)
            .map(|r| (r.time_s, r.decision.clone()))
            .collect(),
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn plan_str(plan: &[Option<u32>]) -> String {
    plan.iter().map(|c| opt(*c)).collect::<Vec<_>>().join(",")
}

impl Summary {
    pub fn scaling_events(&self) -> impl Iterator<Item = (&Cycle, Option<u32>)> {
        let mut previous = None;
        self.cycles.iter().filter_map(move |c| {
            let before = previous;
            previous = c.total;
            (before.is_some() && c.total != before).then_some((c, before))
        })
    }

    /// Deterministic plain-text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "scenario: {}", self.scenario);
        let _ = writeln!(w, "versions: {}", self.versions.join(", "));
        let _ = writeln!(w, "simulated time: {} s", self.end_time_s);
        let _ = writeln!(w, "action ticks: {}", self.cycles.len());
        let _ = writeln!(w, "monitor ticks: {}", self.monitor_ticks);
        let _ = writeln!(w, "final total replicas: {}", opt(self.final_total));
        let _ = writeln!(w, "final plan: {}", plan_str(&self.final_plan));
        let _ = writeln!(w, "restarts:");
        for (v, r) in self.versions.iter().zip(&self.restarts) {
            let _ = writeln!(w, "  {v}: {r}");
        }
        let _ = writeln!(w, "response time ms (per monitoring interval):");
        for (v, d) in self.versions.iter().zip(&self.response_time) {
            let _ = writeln!(w, "  {v}: {}", opt(*d));
        }
        let _ = writeln!(w, "  all: {}", opt(self.response_time_all));
        let _ = writeln!(w, "cpu %: {}", opt(self.cpu));
        let _ = writeln!(w, "df trajectory:");
        let mut last_df: Option<&str> = None;
        for c in &self.cycles {
            if last_df != Some(c.df.as_str()) {
                let _ = writeln!(w, "  t={} df={}", c.time_s, c.df);
                last_df = Some(c.df.as_str());
            }
        }
        let _ = writeln!(w, "scaling events:");
        for (c, before) in self.scaling_events() {
            let _ = writeln!(
                w,
                "  t={} {} {} -> {}",
                c.time_s,
                c.decision,
                opt(before),
                opt(c.total)
            );
        }
        let _ = writeln!(w, "chaos events: {}", self.chaos_events.len());
        for (t, e) in &self.chaos_events {
            let _ = writeln!(w, "  t={t} {e}");
        }
        let _ = writeln!(w, "cycles:");
        for c in &self.cycles {
            let scores: Vec<String> = c
                .scores
                .iter()
                .map(|s| s.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into()))
                .collect();
            let _ = writeln!(
                w,
                "  t={} cpu={} decision={} total={} plan={} scores={} df={}",
                c.time_s,
                c.cpu_pct
                    .map(|x| format!("{x:.2}"))
                    .unwrap_or_else(|| "-".into()),
                c.decision,
                opt(c.total),
                plan_str(&c.plan),
                scores.join(","),
                c.df
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use verscale_core::{DiversityFactor, VersionReport};

    fn action(t: u64, total: u32, plan: [u32; 2]) -> TraceRecord {
        TraceRecord {
            time_s: t,
            kind: RecordKind::Action,
            cpu_pct: Some(50.0),
            decision: "NoChange".into(),
            total_replicas: Some(total),
            versions: plan
                .iter()
                .map(|&c| VersionReport {
                    replicas: Some(c),
                    score: Some(0.5),
                    ..Default::default()
                })
                .collect(),
            diversity: Some(DiversityFactor::Uniform),
        }
    }

    fn trace(records: Vec<TraceRecord>) -> Trace {
        Trace {
            scenario: "s".into(),
            versions: vec!["a".into(), "b".into()],
            records,
        }
    }

    #[test]
    fn nearest_rank_percentiles() {
        let d = Distribution::of(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((d.p50, d.p95, d.max), (3.0, 5.0, 5.0));
        assert_eq!(d.mean, 3.0);
        assert!(Distribution::of(&[]).is_none());
    }

    #[test]
    fn one_action_gives_one_cycle() {
        let s = summarize(&trace(vec![action(120, 4, [2, 2])])).unwrap();
        assert_eq!(s.cycles.len(), 1);
        assert_eq!(s.render().matches("\n  t=120 cpu=").count(), 1);
        assert_eq!(s.final_plan, vec![Some(2), Some(2)]);
    }

    #[test]
    fn no_records_is_malformed() {
        assert!(summarize(&trace(vec![])).is_err());
    }

    #[test]
    fn scaling_events_track_total_changes() {
        let s = summarize(&trace(vec![
            action(120, 4, [2, 2]),
            action(240, 5, [3, 2]),
            action(360, 5, [3, 2]),
        ]))
        .unwrap();
        let events: Vec<_> = s
            .scaling_events()
            .map(|(c, b)| (c.time_s, b, c.total))
            .collect();
        assert_eq!(events, vec![(240, Some(4), Some(5))]);
    }
}
