//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use verscale::scenario::load_scenario;
use verscale_core::allocation::apportion;
use verscale_core::{
    derive_weights, normalize_metric, reliability_score, run_scenario, score_all, ChaosKind,
    MetricWindow, RecordKind, ReliabilityWeights, Scenario, SmoothRouter, TraceRecord, VersionId,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

fn bundled(name: &str) -> Scenario {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(s: &Scenario) -> Vec<TraceRecord> {
    let mut records = Vec::new();
    run_scenario(s, &mut records).expect("scenario runs");
    records
}

struct Tick {
    time: u64,
    total: u32,
    plan: Vec<u32>,
}

fn ticks(records: &[TraceRecord]) -> Vec<Tick> {
    records
        .iter()
        .filter(|r| r.kind == RecordKind::Action)
        .map(|r| Tick {
            time: r.time_s,
            total: r.total_replicas.unwrap(),
            plan: r.versions.iter().map(|v| v.replicas.unwrap()).collect(),
        })
        .collect()
}

fn fmt_plan(p: &[u32]) -> String {
    p.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn within_one(plan: &[u32], target: &[u32]) -> bool {
    plan.len() == target.len() && plan.iter().zip(target).all(|(&a, &b)| a.abs_diff(b) <= 1)
}

/// (start, stop) of the phase in which every version is under fault at once.
fn combined_phase(s: &Scenario) -> Option<(u64, u64)> {
    let mut starts: Vec<u64> = s.chaos.iter().map(|c| c.start_s).collect();
    starts.sort_unstable();
    starts.dedup();
    starts.into_iter().find_map(|start| {
        let group: Vec<_> = s.chaos.iter().filter(|c| c.start_s == start).collect();
        let mut targets: Vec<_> = group.iter().map(|c| &c.target).collect();
        targets.sort();
        targets.dedup();
        (targets.len() == s.versions.len())
            .then(|| (start, group.iter().filter_map(|c| c.stop_s).max().unwrap()))
    })
}

fn c1_baseline() -> Outcome {
    let full = bundled("experiment1.toml");
    let mut quiet = full.clone();
    quiet.chaos.clear();
    let mut checked = 0;
    for t in ticks(&run(&quiet)) {
        checked += 1;
        if t.plan != [5, 5, 5] || t.total != 15 {
            return fail(format!(
                "no-chaos run: t={} plan {}",
                t.time,
                fmt_plan(&t.plan)
            ));
        }
    }
    let first_fault = full
        .chaos
        .iter()
        .map(|c| c.start_s)
        .min()
        .unwrap_or(full.duration_s);
    let mut baseline = 0;
    for t in ticks(&run(&full))
        .into_iter()
        .filter(|t| t.time <= first_fault)
    {
        baseline += 1;
        if t.plan != [5, 5, 5] {
            return fail(format!(
                "baseline window: t={} plan {}",
                t.time,
                fmt_plan(&t.plan)
            ));
        }
    }
    if first_fault < 1800 {
        return fail(format!("baseline window is only {first_fault} s"));
    }
    pass(format!(
        "5,5,5 at all {checked} ticks without chaos and all {baseline} ticks of the first {} s",
        first_fault
    ))
}

fn c2_pod_chaos() -> Outcome {
    let mut s = bundled("experiment1.toml");
    let first = s
        .chaos
        .iter()
        .position(|c| c.kind == ChaosKind::PodKill)
        .expect("pod-kill phase");
    let spec = s.chaos[first].clone();
    s.chaos = vec![spec.clone()];
    let faulty = s
        .versions
        .iter()
        .position(|(v, _)| *v == spec.target)
        .unwrap();
    let stop = spec.stop_s.unwrap_or(s.duration_s);
    let after: Vec<Tick> = ticks(&run(&s))
        .into_iter()
        .filter(|t| t.time > spec.start_s && t.time <= stop)
        .collect();
    let Some(k) = after
        .iter()
        .take(3)
        .position(|t| t.plan[faulty].abs_diff(3) <= 1 && t.plan[faulty] < 5)
    else {
        return fail("faulty version not demoted within 3 action ticks of onset");
    };
    for t in &after[k..] {
        let others_min = t
            .plan
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != faulty)
            .map(|(_, &c)| c)
            .min()
            .unwrap();
        if t.plan[faulty].abs_diff(3) > 1 || t.plan[faulty] >= others_min {
            return fail(format!(
                "t={} plan {} while chaos persists",
                t.time,
                fmt_plan(&t.plan)
            ));
        }
    }
    pass(format!(
        "demoted {} tick(s) after onset to {}; strict minimum for {} ticks",
        k + 1,
        fmt_plan(&after[k].plan),
        after.len() - k
    ))
}

fn c3_combined() -> Outcome {
    let s = bundled("experiment1.toml");
    let Some((start, stop)) = combined_phase(&s) else {
        return fail("scenario has no phase with every version under fault");
    };
    let phase: Vec<Tick> = ticks(&run(&s))
        .into_iter()
        .filter(|t| t.time > start && t.time <= stop)
        .collect();
    // longest suffix of the phase on one plan within one replica of 3,6,6
    let Some(last) = phase.last() else {
        return fail("no action ticks in the combined phase");
    };
    let settled = phase
        .iter()
        .rev()
        .take_while(|t| t.plan == last.plan)
        .count();
    if !within_one(&last.plan, &[3, 6, 6]) {
        return fail(format!("settled on {}", fmt_plan(&last.plan)));
    }
    if settled < 3 {
        return fail(format!(
            "{} stable for only {settled} ticks",
            fmt_plan(&last.plan)
        ));
    }
    pass(format!(
        "settled on {} for {settled} consecutive ticks",
        fmt_plan(&last.plan)
    ))
}

fn c4_recovery() -> Outcome {
    let mut s = bundled("experiment1.toml");
    let stop = s
        .chaos
        .iter()
        .map(|c| c.stop_s.unwrap_or(u64::MAX))
        .max()
        .unwrap();
    let deadline = stop + 16 * 60 + 2 * s.config.action_time_s;
    // observe well past the deadline
    s.duration_s = s.duration_s.max(deadline + 10 * s.config.action_time_s);
    let after: Vec<Tick> = ticks(&run(&s))
        .into_iter()
        .filter(|t| t.time >= stop)
        .collect();
    let settled = after
        .iter()
        .rev()
        .take_while(|t| t.plan == [5, 5, 5])
        .count();
    if settled == 0 {
        return fail("plan never returned to 5,5,5");
    }
    let back = after[after.len() - settled].time;
    if back > deadline {
        return fail(format!(
            "back to 5,5,5 only {} s after chaos stopped",
            back - stop
        ));
    }
    pass(format!(
        "back to 5,5,5 {} s after chaos stopped (deadline {} s)",
        back - stop,
        deadline - stop
    ))
}

fn c5_threshold_scaling() -> Outcome {
    let s = bundled("experiment2.toml");
    let cfg = s.config;
    let records = run(&s);
    let mut previous = cfg.total_replicas;
    let mut cpus: Vec<f64> = Vec::new();
    let (mut ups, mut downs, mut lo, mut hi) = (0, 0, u32::MAX, 0);
    for r in &records {
        match r.kind {
            RecordKind::Monitor => cpus.push(r.cpu_pct.unwrap()),
            RecordKind::Action => {
                let total = r.total_replicas.unwrap();
                let above = cpus.iter().filter(|&&c| c > cfg.max_cpu_pct).count();
                let below = cpus.iter().filter(|&&c| c < cfg.min_cpu_pct).count();
                let wanted: i64 = if below > 2 {
                    -1
                } else if above > 1 {
                    1
                } else {
                    0
                };
                let expect = (i64::from(previous) + wanted)
                    .clamp(i64::from(cfg.min_replicas), i64::from(cfg.max_replicas));
                let t = r.time_s;
                if i64::from(total) != expect {
                    return fail(format!(
                        "t={t}: votes above={above} below={below}, total {previous} -> {total}"
                    ));
                }
                if !(3..=24).contains(&total) {
                    return fail(format!("t={t}: total {total} outside [3, 24]"));
                }
                let all_high = !cpus.is_empty() && above == cpus.len();
                let all_low = !cpus.is_empty() && below == cpus.len();
                if all_high && total != previous + 1 && previous != 24 {
                    return fail(format!(
                        "t={t}: sustained high CPU but total {previous} -> {total}"
                    ));
                }
                if all_low && total + 1 != previous && previous != 3 {
                    return fail(format!(
                        "t={t}: sustained low CPU but total {previous} -> {total}"
                    ));
                }
                ups += usize::from(total > previous);
                downs += usize::from(total < previous);
                lo = lo.min(total);
                hi = hi.max(total);
                previous = total;
                cpus.clear();
            }
            _ => {}
        }
    }
    if ups == 0 || downs == 0 || lo != 3 || hi != 24 {
        return fail(format!("run did not exercise both bounds: {ups} increases, {downs} decreases, range {lo}..{hi}"));
    }
    pass(format!(
        "{ups} increases, {downs} decreases, range {lo}..{hi}, every step matches the CPU votes"
    ))
}

fn c6_diversity_floor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(3..=8);
        let mut scores: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.15) {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        if scores.iter().all(|&x| x == 0.0) {
            scores[0] = rng.random_range(0.01..1.0);
        }
        let total = rng.random_range(n as u32..=50);
        let counts = apportion(&scores, total).expect("feasible instance");
        if counts.iter().any(|&c| c < 1) || counts.iter().sum::<u32>() != total {
            violations += 1;
        }
    }
    if violations == 0 {
        pass("1000 instances, 0 violations")
    } else {
        fail(format!("{violations} violations in 1000 instances"))
    }
}

/// Compositions of `total` into `n` positive parts, lexicographically descending.
fn compositions(total: u32, n: usize) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (1..=total - (n as u32 - 1)).rev() {
        for mut rest in compositions(total - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exact minimal-deviation apportionment for integer grid scores.
fn oracle(grid: &[u32], total: u32, candidates: &[Vec<u32>]) -> Vec<u32> {
    let k: i64 = grid.iter().map(|&g| i64::from(g)).sum();
    // deviations scaled by k keep everything integral
    let cost = |c: &Vec<u32>| {
        let devs = c
            .iter()
            .zip(grid)
            .map(|(&c, &g)| i64::from(c) * k - i64::from(total) * i64::from(g));
        let l1: i64 = devs.clone().map(i64::abs).sum();
        let l2: i64 = devs.map(|d| d * d).sum();
        (l1, l2)
    };
    // candidates are lexicographically descending, so the first minimum wins ties
    let mut best = &candidates[0];
    let mut best_cost = cost(best);
    for c in &candidates[1..] {
        let cc = cost(c);
        if cc < best_cost {
            best = c;
            best_cost = cc;
        }
    }
    best.clone()
}

fn c7_apportionment_oracle() -> Outcome {
    let mut cases = 0u64;
    let mut mismatches = Vec::new();
    for n in 1..=4usize {
        for total in n as u32..=12 {
            let candidates = compositions(total, n);
            let mut grid = vec![0u32; n];
            loop {
                if grid.iter().any(|&g| g > 0) {
                    let scores: Vec<f64> = grid.iter().map(|&g| f64::from(g) * 0.05).collect();
                    let got = apportion(&scores, total).expect("feasible");
                    let want = oracle(&grid, total, &candidates);
                    cases += 1;
                    if got != want && mismatches.len() < 3 {
                        mismatches.push(format!(
                            "scores {scores:?} total {total}: got {got:?}, oracle {want:?}"
                        ));
                    }
                }
                // odometer over the 0.05 grid
                let mut i = 0;
                while i < n && grid[i] == 20 {
                    grid[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                grid[i] += 1;
            }
        }
    }
    if mismatches.is_empty() {
        pass(format!("{cases} instances, 100% agreement"))
    } else {
        fail(format!("disagreement, e.g. {}", mismatches.join("; ")))
    }
}

fn window(i: usize, restarts: u32, rt: f64, mem: f64) -> MetricWindow {
    MetricWindow {
        version: VersionId::new(format!("v{i}")).unwrap(),
        window_start: 0,
        window_end: 120,
        restart_count: restarts,
        response_time_stddev_ms: rt,
        memory_stddev_mb: mem,
    }
}

fn c8_normalization_and_scores() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let weights = ReliabilityWeights::default();
    let mut violations = Vec::new();
    for case in 0..1000 {
        let n = rng.random_range(1..=8);
        // dyadic values keep the affine rescaling below exact
        let dyadic = |rng: &mut ChaCha8Rng| f64::from(rng.random_range(0u32..1 << 20)) / 1024.0;
        let raw: Vec<f64> = (0..n).map(|_| dyadic(&mut rng)).collect();
        let u = normalize_metric(&raw);
        if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
            violations.push(format!("case {case}: utility outside [0,1]"));
        }

        let windows: Vec<MetricWindow> = (0..n)
            .map(|i| {
                window(
                    i,
                    rng.random_range(0..20),
                    dyadic(&mut rng),
                    dyadic(&mut rng),
                )
            })
            .collect();
        let scores = score_all(&windows, &weights).unwrap();
        if scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
            violations.push(format!("case {case}: score outside [0,1]"));
        }

        let mut us: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let base = reliability_score(us[0], us[1], us[2], &weights).unwrap();
        let which = rng.random_range(0..3);
        us[which] = rng.random_range(us[which]..=1.0);
        if reliability_score(us[0], us[1], us[2], &weights).unwrap() < base {
            violations.push(format!(
                "case {case}: score decreased when utility {which} rose"
            ));
        }

        let total = rng.random_range(n as u32..=4 * n as u32 + 4);
        if scores.iter().any(|&s| s > 0.0) {
            let plan = apportion(&scores, total).unwrap();
            let scale = |rng: &mut ChaCha8Rng| {
                (
                    2f64.powi(rng.random_range(-3..=3)),
                    f64::from(rng.random_range(0u32..1000)),
                )
            };
            let (ar, br) = (1u32 << rng.random_range(0..3), rng.random_range(0u32..50));
            let (at, bt) = scale(&mut rng);
            let (am, bm) = scale(&mut rng);
            let moved: Vec<MetricWindow> = windows
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    window(
                        i,
                        w.restart_count * ar + br,
                        w.response_time_stddev_ms * at + bt,
                        w.memory_stddev_mb * am + bm,
                    )
                })
                .collect();
            let moved_plan = apportion(&score_all(&moved, &weights).unwrap(), total).unwrap();
            if moved_plan != plan {
                violations.push(format!("case {case}: plan changed under rescaling"));
            }
        }
    }
    if violations.is_empty() {
        pass("1000 instances, 0 violations")
    } else {
        fail(format!(
            "{} violations, e.g. {}",
            violations.len(),
            violations[0]
        ))
    }
}

fn c9_wrr_fairness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = Vec::new();
    for case in 0..1000 {
        let n = rng.random_range(1..=6);
        let w: Vec<u32> = (0..n).map(|_| rng.random_range(1..=100)).collect();
        let scores: Vec<(VersionId, f64)> = w
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                (
                    VersionId::new(format!("v{i}")).unwrap(),
                    f64::from(w) / 100.0,
                )
            })
            .collect();
        let table = derive_weights(&scores);
        if table.weights() != w {
            violations.push(format!(
                "case {case}: weights {:?} from {w:?}",
                table.weights()
            ));
            continue;
        }
        let total: u64 = w.iter().map(|&x| u64::from(x)).sum();
        let mut router = SmoothRouter::new(table);
        let mut counts = vec![0u64; n];
        for k in 1..=total {
            counts[router.next_index()] += 1;
            if counts
                .iter()
                .zip(&w)
                .any(|(&c, &wi)| c * total >= k * u64::from(wi) + total)
            {
                violations.push(format!(
                    "case {case}: burst above fair share after {k} requests"
                ));
                break;
            }
        }
        if counts.iter().zip(&w).any(|(&c, &wi)| c != u64::from(wi)) {
            violations.push(format!(
                "case {case}: cycle counts {counts:?} for weights {w:?}"
            ));
        }
    }
    if violations.is_empty() {
        pass("1000 tables, exact cycle counts, no prefix above its fair-share ceiling")
    } else {
        fail(format!(
            "{} violations, e.g. {}",
            violations.len(),
            violations[0]
        ))
    }
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut sizes = Vec::new();
    for name in ["experiment1.toml", "experiment2.toml"] {
        let s = bundled(name);
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        verscale::run_to_file(&s, &a).expect("run");
        verscale::run_to_file(&s, &b).expect("run");
        let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        if a != b {
            return fail(format!("{name}: traces differ"));
        }
        sizes.push(format!("{name} {} bytes", a.len()));
    }
    pass(format!("identical traces: {}", sizes.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("baseline equilibrium", c1_baseline),
        ("pod-chaos demotion", c2_pod_chaos),
        ("combined-chaos distribution", c3_combined),
        ("recovery", c4_recovery),
        ("threshold scaling", c5_threshold_scaling),
        ("diversity floor", c6_diversity_floor),
        ("apportionment oracle", c7_apportionment_oracle),
        (
            "normalization and score bounds",
            c8_normalization_and_scores,
        ),
        ("wrr fairness", c9_wrr_fairness),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let outcome = check();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!(
            "criterion {:>2} {status} {name}: {} ({:.2} s)",
            i + 1,
            outcome.detail,
            started.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
