//! 3D laser range finder geometry.
//!
//! A planar scanner sweeps bearings β over ±90° in its scan plane; the plane
//! itself is pitched upward by α ∈ [0°, 25°] about the sensor's y axis. In the
//! sensor frame (x forward, y left, z up) a return at range R is
//!
//! ```text
//! p = R · (cos α · cos β,  sin β,  sin α · cos β)
//! ```
//!
//! which is the ordinary planar scan at α = 0 and keeps ‖p‖ = R.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::par::{self, Execution};

pub const MIN_RANGE: f64 = 0.04;
pub const MAX_RANGE: f64 = 80.0;
pub const MAX_BETA: f64 = FRAC_PI_2;
/// 25° vertical field of view.
pub const MAX_ALPHA: f64 = 25.0 * std::f64::consts::PI / 180.0;

/// Angular slack accepted when recovering angles from points.
const ANGLE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrfError {
    #[error("range {0} m outside [{MIN_RANGE}, {MAX_RANGE}]")]
    Range(f64),
    #[error("pitch {0} rad outside [0, 25°]")]
    Alpha(f64),
    #[error("bearing {0} rad outside [−90°, 90°]")]
    Beta(f64),
    #[error("non-finite value")]
    NonFinite,
}

/// One return: plane pitch, in-plane bearing, range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrfSample {
    pub alpha: f64,
    pub beta: f64,
    pub range: f64,
}

impl LrfSample {
    pub fn new(alpha: f64, beta: f64, range: f64) -> Result<Self, LrfError> {
        let s = LrfSample { alpha, beta, range };
        s.validate()?;
        Ok(s)
    }

    pub fn from_degrees(alpha_deg: f64, beta_deg: f64, range: f64) -> Result<Self, LrfError> {
        Self::new(alpha_deg.to_radians(), beta_deg.to_radians(), range)
    }

    pub fn validate(&self) -> Result<(), LrfError> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.range.is_finite()) {
            return Err(LrfError::NonFinite);
        }
        if !(MIN_RANGE..=MAX_RANGE).contains(&self.range) {
            return Err(LrfError::Range(self.range));
        }
        if !(0.0..=MAX_ALPHA).contains(&self.alpha) {
            return Err(LrfError::Alpha(self.alpha));
        }
        if !(-MAX_BETA..=MAX_BETA).contains(&self.beta) {
            return Err(LrfError::Beta(self.beta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

pub fn project(s: &LrfSample) -> Result<Point3, LrfError> {
    s.validate()?;
    let (sa, ca) = s.alpha.sin_cos();
    let (sb, cb) = s.beta.sin_cos();
    Ok(Point3 {
        x: s.range * ca * cb,
        y: s.range * sb,
        z: s.range * sa * cb,
    })
}

/// Recovers `(α, β, R)` from a sensor-frame point.
pub fn unproject(p: &Point3) -> Result<LrfSample, LrfError> {
    if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
        return Err(LrfError::NonFinite);
    }
    let range = p.norm();
    if !(MIN_RANGE * (1.0 - 1e-12)..=MAX_RANGE * (1.0 + 1e-12)).contains(&range) {
        return Err(LrfError::Range(range));
    }
    let beta = p.y.atan2(p.x.hypot(p.z));
    let alpha = p.z.atan2(p.x);
    if !(-ANGLE_SLACK..=MAX_ALPHA + ANGLE_SLACK).contains(&alpha) {
        return Err(LrfError::Alpha(alpha));
    }
    Ok(LrfSample {
        alpha: alpha.clamp(0.0, MAX_ALPHA),
        beta,
        range: range.clamp(MIN_RANGE, MAX_RANGE),
    })
}

/// Returns of one pitched scan plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPlane {
    pub alpha: f64,
    /// `(beta, range)` pairs in scan order.
    pub beams: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cloud {
    pub points: Vec<Point3>,
    /// Samples dropped for violating the sensor limits.
    pub rejected: usize,
}

/// Projects every sample in order, dropping and counting invalid ones.
pub fn project_all(samples: &[LrfSample], exec: Execution) -> Cloud {
    let projected = par::map(exec, samples, |s| project(s).ok());
    let mut cloud = Cloud {
        points: Vec::with_capacity(projected.len()),
        rejected: 0,
    };
    for p in projected {
        match p {
            Some(p) => cloud.points.push(p),
            None => cloud.rejected += 1,
        }
    }
    cloud
}

pub fn sweep_to_cloud(sweep: &[ScanPlane], exec: Execution) -> Cloud {
    let samples: Vec<LrfSample> = sweep
        .iter()
        .flat_map(|plane| {
            plane.beams.iter().map(move |&(beta, range)| LrfSample {
                alpha: plane.alpha,
                beta,
                range,
            })
        })
        .collect();
    project_all(&samples, exec)
}
