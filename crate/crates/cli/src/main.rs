//! `zonalflow` runs registered experiments and writes their records.
//!
//! Exit status: 0 when every run passes, 1 when any fails, 3 when some are
//! inconclusive and none fails, 2 on usage, configuration or I/O errors.

mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use zonalflow::experiments::{find, registry, Params, ScalingRun, Verdict};

use config::SuiteItem;
use error::{CliError, Result};
use output::{ExperimentRecord, Manifest, RunSummary};

#[derive(Debug, Parser)]
#[command(name = "zonalflow", version, about = "Scaling experiments for Schrodinger flows on spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        /// Experiment id, see `list`.
        id: String,
        /// Parameter overrides: a JSON object or `key = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// RNG seed for randomized experiments.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a list of experiments, by default the whole registry.
    Suite {
        /// `experiments = id, ...` plus per-experiment overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the registry.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let threads = configure_threads()?;
    match cli.command {
        Command::List => {
            for e in registry() {
                let kind = if e.randomized { "randomized" } else { "deterministic" };
                println!("{:<26} {:<14} {}", e.id, kind, e.claim);
            }
            Ok(0)
        }
        Command::Run { id, config, seed, out } => {
            let entry = find(&id)?;
            let mut overrides = match &config {
                Some(path) => config::read_file(path)?,
                None => Params::new(),
            };
            if let Some(seed) = seed {
                if entry.randomized {
                    overrides.insert("seed".into(), json!(seed));
                } else {
                    eprintln!("note: {id} is deterministic; --seed is ignored");
                }
            }
            execute(vec![SuiteItem { id, overrides }], &out, threads, false)
        }
        Command::Suite { config, out } => {
            let items = match &config {
                Some(path) => {
                    let params = config::read_file(path)?;
                    config::suite_items(&params).map_err(|message| CliError::Config { path: path.clone(), message })?
                }
                None => config::suite_items(&Params::new()).map_err(CliError::Usage)?,
            };
            execute(items, &out, threads, true)
        }
    }
}

/// Sizes the global rayon pool from `TOOL_THREADS`.
fn configure_threads() -> Result<usize> {
    if let Ok(raw) = std::env::var("TOOL_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("TOOL_THREADS must be a positive integer, got `{raw}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn execute(items: Vec<SuiteItem>, out: &Path, threads: usize, claims_table: bool) -> Result<u8> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let mut all_runs: Vec<ScalingRun> = Vec::new();
    let mut records = Vec::new();
    for item in items {
        let entry = find(&item.id)?;
        let mut params = entry.default_params();
        params.extend(item.overrides);
        let t0 = Instant::now();
        let runs = entry.run(&params)?;
        let elapsed = t0.elapsed().as_secs_f64();
        for r in &runs {
            let slope = r.slope.map_or("-".to_string(), |s| format!("{s:.4}"));
            println!("{:<40} {:<12} slope {slope}", r.experiment, verdict_name(r.verdict));
        }
        records.push(ExperimentRecord {
            id: entry.id.into(),
            claim: entry.claim.into(),
            params: Value::Object(params),
            verdict: Verdict::combine(runs.iter().map(|r| r.verdict)),
            runs: runs.iter().map(RunSummary::of).collect(),
            elapsed_secs: elapsed,
        });
        all_runs.extend(runs);
    }
    let verdict = Verdict::combine(records.iter().map(|r| r.verdict));
    let code = match verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 3,
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: std::env::args().collect(),
        threads,
        started_unix_secs: started,
        wall_time_secs: clock.elapsed().as_secs_f64(),
        verdict,
        exit_code: code as i32,
        experiments: records,
    };
    output::write_all(out, &all_runs, &manifest)?;
    if claims_table {
        print_claims(&manifest.experiments);
    }
    Ok(code)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Claim-to-experiment table with the verdict of each experiment.
fn print_claims(records: &[ExperimentRecord]) {
    println!();
    println!("| experiment | claim | verdict |");
    println!("|---|---|---|");
    for r in records {
        println!("| {} | {} | {} |", r.id, r.claim, verdict_name(r.verdict));
    }
}
