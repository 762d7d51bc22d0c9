//! File formats and reporting around `verscale-core`: TOML scenarios, CSV
//! traces and run summaries.
#![warn(missing_debug_implementations, rust_2018_idioms)]

pub mod duration;
pub mod overrides;
pub mod report;
pub mod scenario;
pub mod trace;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use verscale_core::{run_scenario, RunStats, Scenario};

use crate::report::{summarize, Summary};
use crate::trace::{parse_trace, TraceWriter};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Trace(#[from] trace::TraceError),
    #[error("simulation failed (partial trace kept): {0}")]
    Simulation(#[from] verscale_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Runs `scenario`, streaming its trace into `out`. On a simulation error the
/// records produced so far are flushed before the error is returned.
pub fn run_into<W: Write>(scenario: &Scenario, out: W) -> Result<(RunStats, W), RunError> {
    let versions: Vec<String> = scenario
        .versions
        .iter()
        .map(|(v, _)| v.to_string())
        .collect();
    let mut writer = TraceWriter::new(out, &scenario.name, &versions)?;
    let result = run_scenario(scenario, &mut writer);
    let out = writer.finish()?;
    Ok((result?, out))
}

/// Renders a scenario's trace in memory.
pub fn run_to_string(scenario: &Scenario) -> Result<(RunStats, String), RunError> {
    let (stats, bytes) = run_into(scenario, Vec::new())?;
    Ok((stats, String::from_utf8(bytes).expect("trace is UTF-8")))
}

/// Runs `scenario` into the file at `path`.
pub fn run_to_file(scenario: &Scenario, path: &Path) -> Result<RunStats, RunError> {
    let file = BufWriter::new(File::create(path)?);
    let (stats, mut file) = run_into(scenario, file)?;
    file.flush()?;
    Ok(stats)
}

/// Summary of the trace stored at `path`.
pub fn report_file(path: &Path) -> Result<Summary, RunError> {
    let trace = parse_trace(File::open(path)?)?;
    Ok(summarize(&trace)?)
}
