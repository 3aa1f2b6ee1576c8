//! Noise covariances for the filter: the speed-proportional input noise `Q`,
//! the windowed mean-square estimates of the measurement noise `R`, and the
//! offline fit of the proportionality constant δ.

use std::collections::VecDeque;

use nalgebra::Matrix2;
use thiserror::Error;

use crate::ekf::MeasurementNoise;
use crate::kinematics::{wrap, Pose, RobotGeometry, WheelAngularSpeeds};

/// Window length used when none is configured: 5 s of 100 ms ticks.
pub const DEFAULT_WINDOW: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("insufficient samples")]
    InsufficientSamples,
    #[error("window capacity must be at least 1")]
    ZeroCapacity,
    #[error("delta must be finite and non-negative, got {0}")]
    InvalidDelta(f64),
    #[error("calibration needs at least one {0} run")]
    MissingRun(&'static str),
    #[error("run {index}: truth and model series differ in length ({truth} vs {model})")]
    LengthMismatch {
        index: usize,
        truth: usize,
        model: usize,
    },
    #[error("calibration runs carry no wheel motion")]
    Degenerate,
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
}

/// Proportionality between wheel-rate noise variance and squared wheel rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoiseParams {
    pub delta: f64,
}

impl ProcessNoiseParams {
    pub fn new(delta: f64) -> Result<Self, NoiseError> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(NoiseError::InvalidDelta(delta));
        }
        Ok(ProcessNoiseParams { delta })
    }
}

impl Default for ProcessNoiseParams {
    fn default() -> Self {
        ProcessNoiseParams { delta: 0.01 }
    }
}

/// `Q = diag(δ·ω_R², δ·ω_L²)`.
///
/// The printed form "δω²" is read as δ times the squared rate, not (δω)².
pub fn build_q(w: WheelAngularSpeeds, params: &ProcessNoiseParams) -> Matrix2<f64> {
    Matrix2::new(
        params.delta * w.omega_r * w.omega_r,
        0.0,
        0.0,
        params.delta * w.omega_l * w.omega_l,
    )
}

/// Fixed-capacity ring of the most recent samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualWindow<T> {
    capacity: usize,
    samples: VecDeque<T>,
}

impl<T> ResidualWindow<T> {
    pub fn new(capacity: usize) -> Result<Self, NoiseError> {
        if capacity == 0 {
            return Err(NoiseError::ZeroCapacity);
        }
        Ok(ResidualWindow {
            capacity,
            samples: VecDeque::with_capacity(capacity),
        })
    }

    pub fn push(&mut self, sample: T) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(sample);
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.samples.iter()
    }
}

/// Heading from the compass and the encoder-propagated heading at the same tick.
///
/// The scenario uses the filter prior for `encoder`: the previous estimate
/// advanced by the decoded wheel travel. Pure odometry heading drifts without
/// bound and would inflate r33 until the compass is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingPair {
    pub compass: f64,
    pub encoder: f64,
}

/// Odometry position minus the filter prior, per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionResidual {
    pub dx: f64,
    pub dy: f64,
}

/// Mean squared wrapped compass/encoder heading disagreement.
pub fn estimate_r33(win: &ResidualWindow<HeadingPair>) -> Result<f64, NoiseError> {
    if win.is_empty() {
        return Err(NoiseError::InsufficientSamples);
    }
    let sum: f64 = win
        .iter()
        .map(|p| {
            let d = wrap(p.compass - p.encoder);
            d * d
        })
        .sum();
    Ok(sum / win.len() as f64)
}

/// Per-axis mean squared position residual, returned as `(r11, r22)`.
pub fn estimate_r_position(
    win: &ResidualWindow<PositionResidual>,
) -> Result<(f64, f64), NoiseError> {
    if win.is_empty() {
        return Err(NoiseError::InsufficientSamples);
    }
    let (sx, sy) = win.iter().fold((0.0, 0.0), |(sx, sy), r| {
        (sx + r.dx * r.dx, sy + r.dy * r.dy)
    });
    let n = win.len() as f64;
    Ok((sx / n, sy / n))
}

/// Floor values used until the windows fill, and as lower bounds afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFloors {
    pub r11: f64,
    pub r22: f64,
    pub r33: f64,
}

impl Default for NoiseFloors {
    fn default() -> Self {
        let heading = 0.1f64.to_radians();
        NoiseFloors {
            r11: 1e-4,
            r22: 1e-4,
            r33: heading * heading,
        }
    }
}

/// Online measurement-noise estimator built from the two residual windows.
#[derive(Debug, Clone)]
pub struct AdaptiveMeasurementNoise {
    heading: ResidualWindow<HeadingPair>,
    position: ResidualWindow<PositionResidual>,
    floors: NoiseFloors,
}

impl AdaptiveMeasurementNoise {
    pub fn new(window: usize, floors: NoiseFloors) -> Result<Self, NoiseError> {
        Ok(AdaptiveMeasurementNoise {
            heading: ResidualWindow::new(window)?,
            position: ResidualWindow::new(window)?,
            floors,
        })
    }

    pub fn push(&mut self, heading: HeadingPair, position: PositionResidual) {
        self.heading.push(heading);
        self.position.push(position);
    }

    pub fn current(&self) -> MeasurementNoise {
        let f = &self.floors;
        let (r11, r22) = if self.position.is_full() {
            let (r11, r22) = estimate_r_position(&self.position).unwrap_or((f.r11, f.r22));
            (r11.max(f.r11), r22.max(f.r22))
        } else {
            (f.r11, f.r22)
        };
        let r33 = if self.heading.is_full() {
            estimate_r33(&self.heading).unwrap_or(f.r33).max(f.r33)
        } else {
            f.r33
        };
        MeasurementNoise { r11, r22, r33 }
    }
}

/// Kind of constant-command calibration drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationMotion {
    /// Both wheels at the same rate.
    Straight,
    /// Wheels at opposite rates, turning on the spot.
    Spin,
}

/// Ground-truth poses and kinematic-model poses sampled at the same ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRun {
    pub motion: CalibrationMotion,
    pub truth: Vec<Pose>,
    pub model: Vec<Pose>,
}

fn along_track(a: &Pose, b: &Pose) -> f64 {
    let mid = a.theta + 0.5 * wrap(b.theta - a.theta);
    let (s, c) = mid.sin_cos();
    (b.x - a.x) * c + (b.y - a.y) * s
}

/// Least-squares fit of δ to per-step increment errors.
///
/// Straight runs compare the distance travelled per tick, spin runs the
/// heading change per tick. Under `Q = diag(δω_R², δω_L²)` each squared
/// error has expectation `δ·g` where `g` follows from the wheel-increment
/// chain and the model's wheel rate; the fit is `δ = Σ e²g / Σ g²`.
pub fn calibrate_delta(
    runs: &[CalibrationRun],
    geom: &RobotGeometry,
    dt: f64,
) -> Result<ProcessNoiseParams, NoiseError> {
    if !(dt > 0.0) {
        return Err(NoiseError::NonPositiveDt(dt));
    }
    if !runs.iter().any(|r| r.motion == CalibrationMotion::Straight) {
        return Err(NoiseError::MissingRun("straight"));
    }
    if !runs.iter().any(|r| r.motion == CalibrationMotion::Spin) {
        return Err(NoiseError::MissingRun("spin"));
    }
    let k = dt * geom.wheel_radius;
    let (mut num, mut den) = (0.0, 0.0);
    for (index, run) in runs.iter().enumerate() {
        if run.truth.len() != run.model.len() {
            return Err(NoiseError::LengthMismatch {
                index,
                truth: run.truth.len(),
                model: run.model.len(),
            });
        }
        for (t, m) in run.truth.windows(2).zip(run.model.windows(2)) {
            let (err, g) = match run.motion {
                CalibrationMotion::Straight => {
                    let ds_model = along_track(&m[0], &m[1]);
                    let omega = ds_model / k;
                    // var(ds) = (k/2)²·δ(ω_R² + ω_L²)
                    (
                        along_track(&t[0], &t[1]) - ds_model,
                        0.5 * k * k * omega * omega,
                    )
                }
                CalibrationMotion::Spin => {
                    let dth_model = wrap(m[1].theta - m[0].theta);
                    let omega = dth_model * geom.track_width / (2.0 * k);
                    let c = k / geom.track_width;
                    // var(dθ) = (k/L)²·δ(ω_R² + ω_L²)
                    (
                        wrap(wrap(t[1].theta - t[0].theta) - dth_model),
                        2.0 * c * c * omega * omega,
                    )
                }
            };
            num += err * err * g;
            den += g * g;
        }
    }
    if !(den > 0.0) {
        return Err(NoiseError::Degenerate);
    }
    ProcessNoiseParams::new((num / den).max(0.0))
}
