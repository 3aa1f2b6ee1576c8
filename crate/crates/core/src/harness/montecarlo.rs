use crate::par::{self, Execution};

use super::config::ScenarioConfig;
use super::format::fmt_num;
use super::metrics::{aggregate, compute_metrics, Aggregate, RunSummary};
use super::scenario::run_scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub result: Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    /// Sorted by seed.
    pub per_seed: Vec<SeedOutcome>,
    /// Over successful runs only; `None` when every run failed.
    pub aggregate: Option<Aggregate>,
}

impl MonteCarloReport {
    pub fn failures(&self) -> usize {
        self.per_seed.iter().filter(|o| o.result.is_err()).count()
    }

    /// One row per seed and estimator.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(
            "seed,status,estimator,rms_x,rms_y,rms_theta,max_position,max_theta,final_position,final_theta\n",
        );
        for o in &self.per_seed {
            match &o.result {
                Ok(s) => {
                    let mut row = |name: &str, vals: [f64; 7]| {
                        let nums: Vec<String> = vals.iter().map(|v| fmt_num(*v)).collect();
                        out.push_str(&format!("{},ok,{},{}\n", o.seed, name, nums.join(",")));
                    };
                    row("odometry", s.odometry.values());
                    if let Some(e) = &s.ekf {
                        row("ekf", e.values());
                    }
                }
                Err(msg) => {
                    let msg = msg.replace([',', '\n'], ";");
                    out.push_str(&format!("{},error: {},,,,,,,,\n", o.seed, msg));
                }
            }
        }
        out
    }

    /// Median and mean rows per estimator.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "statistic,estimator,runs,rms_x,rms_y,rms_theta,max_position,max_theta,final_position,final_theta\n",
        );
        if let Some(a) = &self.aggregate {
            for (stat, s) in [("median", &a.median), ("mean", &a.mean)] {
                let mut row = |name: &str, vals: [f64; 7]| {
                    let nums: Vec<String> = vals.iter().map(|v| fmt_num(*v)).collect();
                    out.push_str(&format!("{stat},{name},{},{}\n", a.runs, nums.join(",")));
                };
                row("odometry", s.odometry.values());
                if let Some(e) = &s.ekf {
                    row("ekf", e.values());
                }
            }
        }
        out
    }
}

/// Runs every configured seed and reduces the summaries. Output order and
/// aggregates do not depend on the seed order in the config nor on the
/// execution policy.
pub fn monte_carlo(cfg: &ScenarioConfig, exec: Execution) -> MonteCarloReport {
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let per_seed = par::map(exec, &seeds, |&seed| SeedOutcome {
        seed,
        result: run_scenario(cfg, seed)
            .and_then(|log| compute_metrics(&log))
            .map_err(|e| e.to_string()),
    });
    let ok: Vec<RunSummary> = per_seed
        .iter()
        .filter_map(|o| o.result.as_ref().ok().copied())
        .collect();
    MonteCarloReport {
        aggregate: aggregate(&ok),
        per_seed,
    }
}
