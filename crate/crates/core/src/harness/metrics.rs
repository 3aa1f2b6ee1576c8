use super::format::fmt_num;
use super::log::{Deviation, TrajectoryLog};
use super::HarnessError;

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "estimator",
    "rms_x",
    "rms_y",
    "rms_theta",
    "max_position",
    "max_theta",
    "final_position",
    "final_theta",
];

/// Error statistics of one estimator against truth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorMetrics {
    pub rms_x: f64,
    pub rms_y: f64,
    pub rms_theta: f64,
    pub max_position: f64,
    pub max_theta: f64,
    pub final_position: f64,
    pub final_theta: f64,
}

impl EstimatorMetrics {
    fn from_deviations(devs: &[Deviation]) -> Self {
        let n = devs.len() as f64;
        let rms =
            |f: fn(&Deviation) -> f64| (devs.iter().map(|d| f(d).powi(2)).sum::<f64>() / n).sqrt();
        let last = devs.last().expect("non-empty");
        EstimatorMetrics {
            rms_x: rms(|d| d.dx),
            rms_y: rms(|d| d.dy),
            rms_theta: rms(|d| d.dtheta),
            max_position: devs.iter().map(Deviation::position).fold(0.0, f64::max),
            max_theta: devs.iter().map(|d| d.dtheta.abs()).fold(0.0, f64::max),
            final_position: last.position(),
            final_theta: last.dtheta.abs(),
        }
    }

    pub fn values(&self) -> [f64; 7] {
        [
            self.rms_x,
            self.rms_y,
            self.rms_theta,
            self.max_position,
            self.max_theta,
            self.final_position,
            self.final_theta,
        ]
    }

    pub fn from_values(v: [f64; 7]) -> Self {
        EstimatorMetrics {
            rms_x: v[0],
            rms_y: v[1],
            rms_theta: v[2],
            max_position: v[3],
            max_theta: v[4],
            final_position: v[5],
            final_theta: v[6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSummary {
    pub odometry: EstimatorMetrics,
    /// Absent when the filter was disabled.
    pub ekf: Option<EstimatorMetrics>,
}

impl RunSummary {
    pub fn to_csv(&self) -> String {
        let mut out = SUMMARY_COLUMNS.join(",");
        out.push('\n');
        let mut row = |name: &str, m: &EstimatorMetrics| {
            out.push_str(name);
            for v in m.values() {
                out.push(',');
                out.push_str(&fmt_num(v));
            }
            out.push('\n');
        };
        row("odometry", &self.odometry);
        if let Some(e) = &self.ekf {
            row("ekf", e);
        }
        out
    }
}

pub fn compute_metrics(log: &TrajectoryLog) -> Result<RunSummary, HarnessError> {
    if log.is_empty() {
        return Err(HarnessError::EmptyLog);
    }
    let odo: Vec<Deviation> = log.rows.iter().map(|r| r.odometry_deviation()).collect();
    let ekf: Option<Vec<Deviation>> = log.rows.iter().map(|r| r.ekf_deviation()).collect();
    Ok(RunSummary {
        odometry: EstimatorMetrics::from_deviations(&odo),
        ekf: ekf.map(|d| EstimatorMetrics::from_deviations(&d)),
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn reduce(metrics: &[EstimatorMetrics], f: impl Fn(&mut [f64]) -> f64) -> EstimatorMetrics {
    let mut out = [0.0; 7];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut column: Vec<f64> = metrics.iter().map(|m| m.values()[i]).collect();
        *slot = f(&mut column);
    }
    EstimatorMetrics::from_values(out)
}

/// Field-wise median and mean over completed runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub median: RunSummary,
    pub mean: RunSummary,
}

pub fn aggregate(summaries: &[RunSummary]) -> Option<Aggregate> {
    if summaries.is_empty() {
        return None;
    }
    let odo: Vec<EstimatorMetrics> = summaries.iter().map(|s| s.odometry).collect();
    let ekf: Option<Vec<EstimatorMetrics>> = summaries.iter().map(|s| s.ekf).collect();
    let mean = |v: &mut [f64]| v.iter().sum::<f64>() / v.len() as f64;
    Some(Aggregate {
        runs: summaries.len(),
        median: RunSummary {
            odometry: reduce(&odo, median),
            ekf: ekf.as_deref().map(|e| reduce(e, median)),
        },
        mean: RunSummary {
            odometry: reduce(&odo, mean),
            ekf: ekf.as_deref().map(|e| reduce(e, mean)),
        },
    })
}
