use std::f64::consts::{PI, TAU};

use rand_distr::{Distribution, Normal};

use super::{SimError, SimParams, SimRng};
use crate::kinematics::{wrap, RobotGeometry};

/// Accumulated quadrature counts of both wheels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderSample {
    pub ticks_l: i64,
    pub ticks_r: i64,
    /// Seconds, stored as raw bits so the sample stays `Eq`.
    timestamp_bits: u64,
}

impl EncoderSample {
    pub fn new(ticks_l: i64, ticks_r: i64, timestamp: f64) -> Self {
        EncoderSample {
            ticks_l,
            ticks_r,
            timestamp_bits: timestamp.to_bits(),
        }
    }

    pub fn timestamp(&self) -> f64 {
        f64::from_bits(self.timestamp_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompassSample {
    /// Radians in (−π, π], a multiple of the compass quantum.
    pub heading: f64,
    pub timestamp: f64,
}

fn angle_to_ticks(angle: f64, counts_per_rev: u32) -> i64 {
    (angle / TAU * counts_per_rev as f64).floor() as i64
}

/// Quantizes accumulated wheel angles (radians) into decoded counts.
pub fn sample_encoders(
    angle_l: f64,
    angle_r: f64,
    timestamp: f64,
    params: &SimParams,
) -> EncoderSample {
    let cpr = params.counts_per_rev();
    EncoderSample::new(
        angle_to_ticks(angle_l, cpr),
        angle_to_ticks(angle_r, cpr),
        timestamp,
    )
}

/// Wheel travel between two encoder samples, returned as `(ds_l, ds_r)`.
pub fn decode_encoders(
    prev: &EncoderSample,
    curr: &EncoderSample,
    geom: &RobotGeometry,
    params: &SimParams,
) -> Result<(f64, f64), SimError> {
    if !(curr.timestamp() > prev.timestamp()) {
        return Err(SimError::NonMonotoneTimestamps {
            prev: prev.timestamp(),
            curr: curr.timestamp(),
        });
    }
    let arc = TAU / params.counts_per_rev() as f64 * geom.wheel_radius;
    Ok((
        (curr.ticks_l - prev.ticks_l) as f64 * arc,
        (curr.ticks_r - prev.ticks_r) as f64 * arc,
    ))
}

/// Rounds a heading to the nearest multiple of `quantum`, keeping the
/// result in (−π, π]. A zero quantum leaves the heading untouched.
pub fn quantize_heading(heading: f64, quantum: f64) -> f64 {
    let h = wrap(heading);
    if quantum <= 0.0 {
        return h;
    }
    let q = (h / quantum).round() * quantum;
    if q > PI {
        // only reachable by rounding up to the +π multiple
        if q - PI <= 1e-12 {
            PI
        } else {
            q - TAU
        }
    } else if q <= -PI {
        if -PI - q <= 1e-12 {
            PI
        } else {
            q + TAU
        }
    } else {
        q
    }
}

pub fn sample_compass(
    true_heading: f64,
    timestamp: f64,
    params: &SimParams,
    rng: &mut SimRng,
) -> CompassSample {
    let noise = if params.compass_sigma > 0.0 {
        Normal::new(0.0, params.compass_sigma)
            .expect("finite sigma")
            .sample(rng)
    } else {
        0.0
    };
    CompassSample {
        heading: quantize_heading(true_heading + noise, params.compass_quantum),
        timestamp,
    }
}
