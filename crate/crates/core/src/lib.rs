//! Differential-drive localization toolkit.
//!
//! - [`kinematics`]: wheel speeds to body velocity and midpoint dead reckoning.
//! - [`ekf`]: extended Kalman filter fusing odometry position and compass heading.
//! - [`noise`]: input-noise covariance, windowed measurement-noise estimates, δ calibration.
//! - [`sim`]: seeded ground truth, encoders, compass and a waypoint follower.
//! - [`lrf`]: pitched planar laser scans to 3D points.
//! - [`harness`]: scenarios, trajectory logs, error metrics and Monte Carlo batches.
//!
//! The `parallel` feature (on by default) runs Monte Carlo seeds and point
//! projection on a rayon pool; see [`par::Execution`].

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ekf;
pub mod harness;
pub mod kinematics;
pub mod lrf;
pub mod noise;
pub mod par;
pub mod sim;

pub use ekf::{Measurement, MeasurementNoise, ProcessInput, StateEstimate};
pub use kinematics::{
    BodyVelocity, Displacement, Pose, RimSpeeds, RobotGeometry, WheelAngularSpeeds,
};
pub use par::Execution;
