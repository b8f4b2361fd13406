//! Result files: `results.json`, `rows.csv`, `plotdata/*.tsv` and
//! `manifest.json`. Only the manifest carries wall-clock data.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use zonalflow::experiments::{ScalingRun, Verdict};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct ExperimentRecord {
    pub id: String,
    pub claim: String,
    /// Full configuration, defaults included.
    pub params: Value,
    pub verdict: Verdict,
    pub runs: Vec<RunSummary>,
    pub elapsed_secs: f64,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub experiment: String,
    pub verdict: Verdict,
    pub slope: Option<f64>,
    pub predicted: f64,
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub threads: usize,
    pub started_unix_secs: u64,
    pub wall_time_secs: f64,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub experiments: Vec<ExperimentRecord>,
}

impl RunSummary {
    pub fn of(run: &ScalingRun) -> Self {
        Self {
            experiment: run.experiment.clone(),
            verdict: run.verdict,
            slope: run.slope,
            predicted: run.predicted,
            tolerance: run.tolerance,
        }
    }
}

pub fn write_all(dir: &Path, runs: &[ScalingRun], manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir.join("plotdata")).map_err(|e| CliError::io(dir.join("plotdata"), e))?;
    write_json(&dir.join("results.json"), &runs)?;
    write_rows(&dir.join("rows.csv"), runs)?;
    for run in runs {
        write_plot(&dir.join("plotdata").join(format!("{}.tsv", file_stem(&run.experiment))), run)?;
    }
    write_json(&dir.join("manifest.json"), manifest)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Shortest round-trip formatting, so CSV and JSON hold identical values.
fn number(x: f64) -> String {
    format!("{x:e}")
}

fn write_rows(path: &Path, runs: &[ScalingRun]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["experiment", "index", "param", "value"])?;
    for run in runs {
        for (i, &(x, y)) in run.series.iter().enumerate() {
            w.write_record([run.experiment.as_str(), &i.to_string(), &number(x), &number(y)])?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `log10 param <TAB> log10 value`; points with a nonpositive coordinate
/// have no logarithm and are left out.
fn write_plot(path: &Path, run: &ScalingRun) -> Result<()> {
    let mut text = Vec::new();
    for &(x, y) in &run.series {
        if x > 0.0 && y > 0.0 {
            writeln!(text, "{}\t{}", number(x.log10()), number(y.log10())).expect("writing to memory");
        }
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Run names such as `exp_szego_fit/band_n2` become `exp_szego_fit__band_n2`.
pub fn file_stem(experiment: &str) -> String {
    experiment
        .split('/')
        .map(|part| {
            part.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("__")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(file_stem("exp_szego_fit/band_n2"), "exp_szego_fit__band_n2");
        assert_eq!(file_stem("check_isometry"), "check_isometry");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, 0.0] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
            let json: f64 = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
            assert_eq!(json, number(x).parse::<f64>().unwrap());
        }
    }
}
