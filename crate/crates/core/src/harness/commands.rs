//! Implementations of the CLI subcommands, returning what they print.

use std::fs;
use std::path::{Path, PathBuf};

use crate::lrf::{project_all, LrfSample};
use crate::par::Execution;

use super::config::ScenarioConfig;
use super::format::fmt_num;
use super::log::TrajectoryLog;
use super::metrics::compute_metrics;
use super::montecarlo::monte_carlo;
use super::scenario::run_scenario;
use super::HarnessError;

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutput {
    pub log_path: PathBuf,
    pub summary_path: PathBuf,
    /// Summary CSV, identical to what `metrics` prints for the log file.
    pub summary: String,
}

/// `simulate <config> [--seed N] [--out dir]`
pub fn simulate(
    config: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<SimulateOutput, HarnessError> {
    let cfg = ScenarioConfig::load(config)?;
    let seed = seed.unwrap_or(cfg.seeds[0]);
    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.out_dir.clone());
    let log = run_scenario(&cfg, seed)?;
    let csv = log.to_csv();
    // metrics come from the logged (rounded) values so they can be reproduced from the file
    let summary = compute_metrics(&TrajectoryLog::from_csv(&csv, "trajectory")?)?.to_csv();
    let log_path = out_dir.join(format!("trajectory_seed{seed}.csv"));
    let summary_path = out_dir.join(format!("summary_seed{seed}.csv"));
    write(&log_path, &csv)?;
    write(&summary_path, &summary)?;
    Ok(SimulateOutput {
        log_path,
        summary_path,
        summary,
    })
}

/// `metrics <log.csv>`
pub fn metrics(log: &Path) -> Result<String, HarnessError> {
    let text = read(log)?;
    let log = TrajectoryLog::from_csv(&text, &log.display().to_string())?;
    Ok(compute_metrics(&log)?.to_csv())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloOutput {
    pub runs_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: String,
    pub failures: Vec<(u64, String)>,
}

/// `montecarlo <config>`
pub fn montecarlo(config: &Path, exec: Execution) -> Result<MonteCarloOutput, HarnessError> {
    let cfg = ScenarioConfig::load(config)?;
    let report = monte_carlo(&cfg, exec);
    let runs_path = cfg.out_dir.join("montecarlo_runs.csv");
    let summary_path = cfg.out_dir.join("montecarlo_summary.csv");
    let summary = report.summary_csv();
    write(&runs_path, &report.runs_csv())?;
    write(&summary_path, &summary)?;
    let failures = report
        .per_seed
        .iter()
        .filter_map(|o| o.result.as_ref().err().map(|e| (o.seed, e.clone())))
        .collect();
    if report.aggregate.is_none() {
        return Err(HarnessError::Numeric("every Monte Carlo run failed".into()));
    }
    Ok(MonteCarloOutput {
        runs_path,
        summary_path,
        summary,
        failures,
    })
}

/// Parses `alpha_deg beta_deg range_m` lines. Blank lines and `#` comments
/// are skipped.
pub fn parse_sweep(text: &str, source: &str) -> Result<Vec<LrfSample>, HarnessError> {
    let mut samples = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(HarnessError::parse(
                source,
                index + 1,
                format!(
                    "expected `alpha_deg beta_deg range_m`, got {} fields",
                    fields.len()
                ),
            ));
        }
        let mut vals = [0.0f64; 3];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .parse()
                .map_err(|_| HarnessError::parse(source, index + 1, format!("bad number `{f}`")))?;
        }
        // limits are checked at projection time so bad beams are tallied, not fatal
        samples.push(LrfSample {
            alpha: vals[0].to_radians(),
            beta: vals[1].to_radians(),
            range: vals[2],
        });
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrfOutput {
    pub points: usize,
    pub rejected: usize,
}

/// `lrf-project <sweep.txt> <cloud.txt>`
pub fn lrf_project(sweep: &Path, cloud: &Path, exec: Execution) -> Result<LrfOutput, HarnessError> {
    let samples = parse_sweep(&read(sweep)?, &sweep.display().to_string())?;
    let projected = project_all(&samples, exec);
    let mut out = String::new();
    for p in &projected.points {
        out.push_str(&format!(
            "{} {} {}\n",
            fmt_num(p.x),
            fmt_num(p.y),
            fmt_num(p.z)
        ));
    }
    write(cloud, &out)?;
    Ok(LrfOutput {
        points: projected.points.len(),
        rejected: projected.rejected,
    })
}
