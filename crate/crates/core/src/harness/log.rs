use crate::kinematics::{wrap, Pose};

use super::format::{fmt_num, round_trip};
use super::HarnessError;

/// Column order of trajectory CSV files.
pub const CSV_COLUMNS: [&str; 19] = [
    "t", "x_true", "y_true", "th_true", "x_odo", "y_odo", "th_odo", "x_ekf", "y_ekf", "th_ekf",
    "p11", "p22", "p33", "dx_odo", "dy_odo", "dth_odo", "dx_ekf", "dy_ekf", "dth_ekf",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkfColumns {
    pub pose: Pose,
    /// Diagonal of the posterior covariance.
    pub p_diag: [f64; 3],
}

/// Estimator minus truth, heading wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl Deviation {
    pub fn between(estimate: &Pose, truth: &Pose) -> Self {
        Deviation {
            dx: estimate.x - truth.x,
            dy: estimate.y - truth.y,
            dtheta: wrap(estimate.theta - truth.theta),
        }
    }

    pub fn position(&self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub truth: Pose,
    pub odometry: Pose,
    pub ekf: Option<EkfColumns>,
}

impl LogRow {
    pub fn odometry_deviation(&self) -> Deviation {
        Deviation::between(&self.odometry, &self.truth)
    }

    pub fn ekf_deviation(&self) -> Option<Deviation> {
        self.ekf.map(|e| Deviation::between(&e.pose, &self.truth))
    }
}

/// One row per filter tick.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
}

fn pose_round_trip(p: &Pose) -> Pose {
    Pose {
        x: round_trip(p.x),
        y: round_trip(p.y),
        theta: round_trip(p.theta),
    }
}

impl TrajectoryLog {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let mut fields: Vec<String> = Vec::with_capacity(CSV_COLUMNS.len());
            fields.push(fmt_num(r.t));
            for p in [&r.truth, &r.odometry] {
                fields.extend([p.x, p.y, p.theta].map(fmt_num));
            }
            match &r.ekf {
                Some(e) => {
                    fields.extend([e.pose.x, e.pose.y, e.pose.theta].map(fmt_num));
                    fields.extend(e.p_diag.map(fmt_num));
                }
                None => fields.extend(std::iter::repeat_n(String::new(), 6)),
            }
            let d = r.odometry_deviation();
            fields.extend([d.dx, d.dy, d.dtheta].map(fmt_num));
            match r.ekf_deviation() {
                Some(d) => fields.extend([d.dx, d.dy, d.dtheta].map(fmt_num)),
                None => fields.extend(std::iter::repeat_n(String::new(), 3)),
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses a trajectory CSV. Deviation columns are ignored and recomputed
    /// from the pose columns on demand.
    pub fn from_csv(text: &str, source: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines().enumerate();
        let header_ok = lines
            .next()
            .map(|(_, h)| h.trim() == CSV_COLUMNS.join(","))
            .unwrap_or(false);
        if !header_ok {
            return Err(HarnessError::parse(
                source,
                1,
                "missing or unexpected header",
            ));
        }
        let mut rows = Vec::new();
        for (index, line) in lines {
            let line_no = index + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != CSV_COLUMNS.len() {
                return Err(HarnessError::parse(
                    source,
                    line_no,
                    format!(
                        "expected {} fields, found {}",
                        CSV_COLUMNS.len(),
                        fields.len()
                    ),
                ));
            }
            let num = |i: usize| -> Result<f64, HarnessError> {
                fields[i].parse().map_err(|_| {
                    HarnessError::parse(
                        source,
                        line_no,
                        format!("bad number `{}` in {}", fields[i], CSV_COLUMNS[i]),
                    )
                })
            };
            let pose = |i: usize| -> Result<Pose, HarnessError> {
                Ok(Pose {
                    x: num(i)?,
                    y: num(i + 1)?,
                    theta: num(i + 2)?,
                })
            };
            let ekf = if fields[7..13].iter().all(|f| f.is_empty()) {
                None
            } else {
                Some(EkfColumns {
                    pose: pose(7)?,
                    p_diag: [num(10)?, num(11)?, num(12)?],
                })
            };
            rows.push(LogRow {
                t: num(0)?,
                truth: pose(1)?,
                odometry: pose(4)?,
                ekf,
            });
        }
        Ok(TrajectoryLog { rows })
    }

    /// Every value rounded through its CSV representation.
    pub fn quantized(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| LogRow {
                t: round_trip(r.t),
                truth: pose_round_trip(&r.truth),
                odometry: pose_round_trip(&r.odometry),
                ekf: r.ekf.map(|e| EkfColumns {
                    pose: pose_round_trip(&e.pose),
                    p_diag: e.p_diag.map(round_trip),
                }),
            })
            .collect();
        TrajectoryLog { rows }
    }
}
