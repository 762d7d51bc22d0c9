use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use verscale::overrides::Overrides;
use verscale::scenario::load_scenario;

#[derive(Debug, Parser)]
#[command(
    name = "verscale",
    version,
    about = "Reliability-driven replica control for multi-version services"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write its trace.
    Run {
        scenario: PathBuf,
        #[arg(long, value_name = "TRACE")]
        out: PathBuf,
        /// Also print the summary of the written trace.
        #[arg(long)]
        summary: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the summary of an existing trace.
    Report { trace: PathBuf },
    /// Check a scenario file without running it.
    Validate {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &Path, overrides: &Overrides) -> anyhow::Result<verscale_core::Scenario> {
    let mut scenario = load_scenario(path).with_context(|| format!("{}", path.display()))?;
    overrides
        .apply(&mut scenario)
        .with_context(|| format!("{} with overrides", path.display()))?;
    Ok(scenario)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            summary,
            overrides,
        } => (|| {
            let s = load(&scenario, &overrides)?;
            let stats = verscale::run_to_file(&s, &out)
                .with_context(|| format!("trace {}", out.display()))?;
            eprintln!(
                "{}: {} action ticks, {} requests served, {} dropped -> {}",
                s.name,
                stats.action_ticks,
                stats.served,
                stats.dropped,
                out.display()
            );
            if summary {
                print!("{}", verscale::report_file(&out)?.render());
            }
            anyhow::Ok(())
        })(),
        Command::Report { trace } => (|| {
            let summary =
                verscale::report_file(&trace).with_context(|| format!("{}", trace.display()))?;
            print!("{}", summary.render());
            anyhow::Ok(())
        })(),
        Command::Validate {
            scenario,
            overrides,
        } => load(&scenario, &overrides).map(|s| {
            println!(
                "{}: ok ({} versions, {} replicas, {} s)",
                s.name,
                s.versions.len(),
                s.config.total_replicas,
                s.duration_s
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
