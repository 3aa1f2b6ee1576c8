//! Seeded ground-truth world and sensor emulation.
//!
//! Truth is integrated with exact constant-curvature arcs on a fine clock,
//! independent of the midpoint model under test. Commands are held for one
//! sensor period. Each period the actuation model draws a speed ripple,
//! which the wheel and its encoder really perform, and a slip term, which
//! only the chassis feels.

mod controller;
mod sensors;

pub use controller::{
    path_controller, ControllerParams, PathController, PathPlan, RoundedRectangle,
};
pub use sensors::{
    decode_encoders, quantize_heading, sample_compass, sample_encoders, CompassSample,
    EncoderSample,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::kinematics::{
    dead_reckon_step, increments_to_displacement, wheels_to_body, wrap, KinematicsError, Pose,
    RimSpeeds, RobotGeometry,
};
use crate::noise::{CalibrationMotion, CalibrationRun};

/// Below this rotational rate an arc is treated as a straight line.
const STRAIGHT_EPSILON: f64 = 1e-12;

/// RNG used by every simulation component.
pub type SimRng = ChaCha8Rng;

pub fn sim_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("invalid simulation parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("encoder timestamps must increase ({prev} then {curr})")]
    NonMonotoneTimestamps { prev: f64, curr: f64 },
    #[error("path plan has no waypoints")]
    EmptyPlan,
}

/// Sensor and actuation constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// Encoder/compass/filter period, seconds.
    pub dt_sensor: f64,
    /// Truth integration step, seconds.
    pub dt_fine: f64,
    /// Optical lines per wheel revolution.
    pub encoder_cpr: u32,
    pub quad_decode_factor: u32,
    /// Compass noise standard deviation, radians.
    pub compass_sigma: f64,
    /// Compass output resolution, radians.
    pub compass_quantum: f64,
    /// Half-width of the uniform multiplicative speed ripple.
    pub speed_ripple_frac: f64,
    /// Slip variance is `slip_delta · ω²` in (rad/s)².
    pub slip_delta: f64,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        let tenth_degree = 0.1f64.to_radians();
        SimParams {
            dt_sensor: 0.1,
            dt_fine: 0.001,
            encoder_cpr: 500,
            quad_decode_factor: 4,
            compass_sigma: tenth_degree,
            compass_quantum: tenth_degree,
            speed_ripple_frac: 0.05,
            slip_delta: 0.01,
            seed: 0,
        }
    }
}

impl SimParams {
    /// All noise sources off, including compass quantization. Encoder ticks
    /// stay quantized.
    pub fn noise_free(self) -> Self {
        SimParams {
            compass_sigma: 0.0,
            compass_quantum: 0.0,
            speed_ripple_frac: 0.0,
            slip_delta: 0.0,
            ..self
        }
    }

    pub fn counts_per_rev(&self) -> u32 {
        self.encoder_cpr * self.quad_decode_factor
    }

    /// Fine steps per sensor period.
    pub fn substeps(&self) -> usize {
        (self.dt_sensor / self.dt_fine).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field, reason: &str| {
            Err(SimError::InvalidParam {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.dt_sensor.is_finite() && self.dt_sensor > 0.0) {
            return bad("dt_sensor", "must be > 0");
        }
        if !(self.dt_fine.is_finite() && self.dt_fine > 0.0 && self.dt_fine <= self.dt_sensor) {
            return bad("dt_fine", "must be in (0, dt_sensor]");
        }
        let n = self.substeps() as f64;
        if (n * self.dt_fine - self.dt_sensor).abs() > 1e-9 * self.dt_sensor {
            return bad("dt_fine", "must divide dt_sensor");
        }
        if self.encoder_cpr == 0 {
            return bad("encoder_cpr", "must be > 0");
        }
        if self.quad_decode_factor == 0 {
            return bad("quad_decode_factor", "must be > 0");
        }
        if !(self.compass_sigma >= 0.0 && self.compass_sigma.is_finite()) {
            return bad("compass_sigma", "must be >= 0");
        }
        if !(self.compass_quantum >= 0.0 && self.compass_quantum.is_finite()) {
            return bad("compass_quantum", "must be >= 0");
        }
        if !(self.speed_ripple_frac >= 0.0 && self.speed_ripple_frac < 1.0) {
            return bad("speed_ripple_frac", "must be in [0, 1)");
        }
        if !(self.slip_delta >= 0.0 && self.slip_delta.is_finite()) {
            return bad("slip_delta", "must be >= 0");
        }
        Ok(())
    }
}

/// Exact constant-curvature arc for rim speeds held over `dt`.
pub fn integrate_truth(
    p: &Pose,
    rim: RimSpeeds,
    dt: f64,
    geom: &RobotGeometry,
) -> Result<Pose, KinematicsError> {
    if !(dt > 0.0) {
        return Err(KinematicsError::NonPositiveDt(dt));
    }
    let b = wheels_to_body(rim, geom);
    if b.omega.abs() < STRAIGHT_EPSILON {
        let (s, c) = p.theta.sin_cos();
        return Ok(Pose {
            x: p.x + b.v * dt * c,
            y: p.y + b.v * dt * s,
            theta: p.theta,
        });
    }
    let radius = b.v / b.omega;
    let end = p.theta + b.omega * dt;
    Ok(Pose {
        x: p.x + radius * (end.sin() - p.theta.sin()),
        y: p.y - radius * (end.cos() - p.theta.cos()),
        theta: wrap(end),
    })
}

/// Wheel motion actually realised for one command period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Actuation {
    /// Rim speeds of the wheel rotation, as seen by the encoders.
    pub rotation: RimSpeeds,
    /// Effective contact speeds that move the chassis.
    pub ground: RimSpeeds,
}

/// Multiplicative uniform ripple on each wheel plus Gaussian slip with
/// variance `slip_delta · ω²` scaled by the commanded wheel rate.
pub fn apply_actuation_noise(
    commanded: RimSpeeds,
    params: &SimParams,
    rng: &mut SimRng,
) -> Actuation {
    let mut wheel = |v: f64| {
        let ripple = if params.speed_ripple_frac > 0.0 {
            rng.random_range(-params.speed_ripple_frac..=params.speed_ripple_frac)
        } else {
            0.0
        };
        let rotation = v * (1.0 + ripple);
        // slip std in m/s: sqrt(δ)·|ω|·R = sqrt(δ)·|v|
        let sd = params.slip_delta.sqrt() * v.abs();
        let slip = if sd > 0.0 {
            Normal::new(0.0, sd).expect("finite sd").sample(rng)
        } else {
            0.0
        };
        (rotation, rotation + slip)
    };
    let (rot_r, ground_r) = wheel(commanded.v_r);
    let (rot_l, ground_l) = wheel(commanded.v_l);
    Actuation {
        rotation: RimSpeeds::new(rot_r, rot_l),
        ground: RimSpeeds::new(ground_r, ground_l),
    }
}

/// Ground truth plus sensor state for one simulated robot.
#[derive(Debug, Clone)]
pub struct World {
    geom: RobotGeometry,
    params: SimParams,
    rng: SimRng,
    truth: Pose,
    wheel_angle_l: f64,
    wheel_angle_r: f64,
    tick: u64,
}

/// Sensor readings taken at the end of one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub encoders: EncoderSample,
    pub compass: CompassSample,
}

impl World {
    pub fn new(start: Pose, geom: RobotGeometry, params: SimParams) -> Result<Self, SimError> {
        geom.validate()?;
        params.validate()?;
        Ok(World {
            geom,
            params,
            rng: sim_rng(params.seed),
            truth: start,
            wheel_angle_l: 0.0,
            wheel_angle_r: 0.0,
            tick: 0,
        })
    }

    pub fn truth(&self) -> Pose {
        self.truth
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.params.dt_sensor
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Encoder reading at the current time, without advancing.
    pub fn encoders_now(&self) -> EncoderSample {
        sample_encoders(
            self.wheel_angle_l,
            self.wheel_angle_r,
            self.time(),
            &self.params,
        )
    }

    /// Holds `command` for one sensor period and samples the sensors.
    pub fn advance(&mut self, command: RimSpeeds) -> Result<SensorFrame, SimError> {
        let act = apply_actuation_noise(command, &self.params, &mut self.rng);
        let n = self.params.substeps();
        let h = self.params.dt_fine;
        let r = self.geom.wheel_radius;
        for _ in 0..n {
            self.truth = integrate_truth(&self.truth, act.ground, h, &self.geom)?;
            self.wheel_angle_l += act.rotation.v_l / r * h;
            self.wheel_angle_r += act.rotation.v_r / r * h;
        }
        self.tick += 1;
        let t = self.time();
        let encoders = sample_encoders(self.wheel_angle_l, self.wheel_angle_r, t, &self.params);
        let compass = sample_compass(self.truth.theta, t, &self.params, &mut self.rng);
        Ok(SensorFrame { encoders, compass })
    }
}

/// Constant-command drive used for δ calibration: returns the true poses and
/// the encoder dead-reckoned poses at every sensor tick.
pub fn calibration_drive(
    motion: CalibrationMotion,
    wheel_rate: f64,
    ticks: usize,
    geom: RobotGeometry,
    params: SimParams,
) -> Result<CalibrationRun, SimError> {
    let v = wheel_rate * geom.wheel_radius;
    let command = match motion {
        CalibrationMotion::Straight => RimSpeeds::new(v, v),
        CalibrationMotion::Spin => RimSpeeds::new(v, -v),
    };
    let mut world = World::new(Pose::default(), geom, params)?;
    let mut prev = world.encoders_now();
    let mut model = Pose::default();
    let mut truth_series = Vec::with_capacity(ticks + 1);
    let mut model_series = Vec::with_capacity(ticks + 1);
    truth_series.push(world.truth());
    model_series.push(model);
    for _ in 0..ticks {
        let frame = world.advance(command)?;
        let (ds_l, ds_r) = decode_encoders(&prev, &frame.encoders, &geom, &params)?;
        model = dead_reckon_step(&model, &increments_to_displacement(ds_l, ds_r, &geom));
        prev = frame.encoders;
        truth_series.push(world.truth());
        model_series.push(model);
    }
    Ok(CalibrationRun {
        motion,
        truth: truth_series,
        model: model_series,
    })
}
