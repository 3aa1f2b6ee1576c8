//! Differential-drive kinematics and midpoint dead reckoning.
//!
//! Conventions: meters, seconds and radians everywhere; headings are
//! measured counterclockwise from the global X axis and stored wrapped to
//! (−π, π]. A positive rotational velocity turns the robot to the left,
//! i.e. the right wheel runs faster.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("invalid robot geometry: {0}")]
    Geometry(&'static str),
}

/// Wraps an angle into (−π, π] without validation. NaN propagates.
#[inline]
pub fn wrap(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut r = theta.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    if r <= -PI {
        r += TAU;
    }
    r
}

/// Wraps an angle into (−π, π], rejecting NaN and infinities.
pub fn wrap_angle(theta: f64) -> Result<f64, KinematicsError> {
    if !theta.is_finite() {
        return Err(KinematicsError::NonFinite("theta"));
    }
    Ok(wrap(theta))
}

/// Robot configuration in the global frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    /// Builds a pose, wrapping the heading.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: wrap(theta),
        }
    }

    pub fn try_new(x: f64, y: f64, theta: f64) -> Result<Self, KinematicsError> {
        if !x.is_finite() {
            return Err(KinematicsError::NonFinite("x"));
        }
        if !y.is_finite() {
            return Err(KinematicsError::NonFinite("y"));
        }
        Ok(Pose {
            x,
            y,
            theta: wrap_angle(theta)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Euclidean distance between the positions of two poses.
    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wheel radius and track width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry {
    pub wheel_radius: f64,
    pub track_width: f64,
}

impl RobotGeometry {
    pub fn new(wheel_radius: f64, track_width: f64) -> Result<Self, KinematicsError> {
        let g = RobotGeometry {
            wheel_radius,
            track_width,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.wheel_radius.is_finite() && self.wheel_radius > 0.0) {
            return Err(KinematicsError::Geometry("wheel_radius must be > 0"));
        }
        if !(self.track_width.is_finite() && self.track_width > 0.0) {
            return Err(KinematicsError::Geometry("track_width must be > 0"));
        }
        Ok(())
    }
}

impl Default for RobotGeometry {
    /// 10 cm wheels on a 60 cm axle.
    fn default() -> Self {
        RobotGeometry {
            wheel_radius: 0.05,
            track_width: 0.60,
        }
    }
}

/// Wheel rotation rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelAngularSpeeds {
    pub omega_r: f64,
    pub omega_l: f64,
}

impl WheelAngularSpeeds {
    pub fn new(omega_r: f64, omega_l: f64) -> Self {
        WheelAngularSpeeds { omega_r, omega_l }
    }

    pub fn to_rim(self, geom: &RobotGeometry) -> RimSpeeds {
        RimSpeeds {
            v_r: self.omega_r * geom.wheel_radius,
            v_l: self.omega_l * geom.wheel_radius,
        }
    }
}

/// Linear speeds of the wheel rims in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RimSpeeds {
    pub v_r: f64,
    pub v_l: f64,
}

impl RimSpeeds {
    pub fn new(v_r: f64, v_l: f64) -> Self {
        RimSpeeds { v_r, v_l }
    }

    pub fn to_angular(self, geom: &RobotGeometry) -> WheelAngularSpeeds {
        WheelAngularSpeeds {
            omega_r: self.v_r / geom.wheel_radius,
            omega_l: self.v_l / geom.wheel_radius,
        }
    }
}

/// Translational and rotational velocity of the axle midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyVelocity {
    pub v: f64,
    pub omega: f64,
}

/// Time derivative of a pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRate {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

/// Per-step wheel travel and the resulting body displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Displacement {
    pub ds_l: f64,
    pub ds_r: f64,
    pub ds: f64,
    pub dtheta: f64,
}

/// Rim speeds to body velocity.
///
/// The printed velocity matrix lists `1/L` twice in its second row, which
/// would make ω depend on the wheel-speed sum. Here ω = (v_R − v_L)/L, the
/// sign that agrees with the incremental heading update Δθ = (Δs_R − Δs_L)/L.
pub fn wheels_to_body(rim: RimSpeeds, geom: &RobotGeometry) -> BodyVelocity {
    BodyVelocity {
        v: 0.5 * (rim.v_r + rim.v_l),
        omega: (rim.v_r - rim.v_l) / geom.track_width,
    }
}

pub fn pose_rate(p: &Pose, b: &BodyVelocity) -> PoseRate {
    let (s, c) = p.theta.sin_cos();
    PoseRate {
        dx: b.v * c,
        dy: b.v * s,
        dtheta: b.omega,
    }
}

/// Wheel travel over one sampling period, returned as `(ds_l, ds_r)`.
pub fn wheel_increments(
    w: WheelAngularSpeeds,
    dt: f64,
    geom: &RobotGeometry,
) -> Result<(f64, f64), KinematicsError> {
    if !(dt > 0.0) {
        return Err(KinematicsError::NonPositiveDt(dt));
    }
    Ok((
        dt * geom.wheel_radius * w.omega_l,
        dt * geom.wheel_radius * w.omega_r,
    ))
}

pub fn increments_to_displacement(ds_l: f64, ds_r: f64, geom: &RobotGeometry) -> Displacement {
    Displacement {
        ds_l,
        ds_r,
        ds: 0.5 * (ds_l + ds_r),
        dtheta: (ds_r - ds_l) / geom.track_width,
    }
}

/// Midpoint-heading pose update. Intentionally not the exact arc.
pub fn dead_reckon_step(p: &Pose, d: &Displacement) -> Pose {
    let (s, c) = (p.theta + 0.5 * d.dtheta).sin_cos();
    Pose {
        x: p.x + d.ds * c,
        y: p.y + d.ds * s,
        theta: wrap(p.theta + d.dtheta),
    }
}

/// Wheel speeds held for `dt`, folded through increments and the midpoint update.
pub fn odometry_step(
    p: &Pose,
    w: WheelAngularSpeeds,
    dt: f64,
    geom: &RobotGeometry,
) -> Result<Pose, KinematicsError> {
    let (ds_l, ds_r) = wheel_increments(w, dt, geom)?;
    Ok(dead_reckon_step(
        p,
        &increments_to_displacement(ds_l, ds_r, geom),
    ))
}
