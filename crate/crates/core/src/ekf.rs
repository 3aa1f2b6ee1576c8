//! Extended Kalman filter over the midpoint odometry model.
//!
//! The state is the planar pose. The process input is the pair of measured
//! wheel rates and the process noise enters as wheel-rate perturbations with
//! covariance `Q` (2×2). The measurement is a full pose `z = (x, y, θ)` with
//! `h(x) = x`, so `H = V = I` and the 3×3 measurement covariance is diagonal.

use nalgebra::{Matrix2, Matrix3, Matrix3x2, SymmetricEigen, Vector3};
use thiserror::Error;

use crate::kinematics::{
    dead_reckon_step, increments_to_displacement, wheel_increments, wrap, Displacement,
    KinematicsError, Pose, RobotGeometry, WheelAngularSpeeds,
};

/// Slack allowed on symmetry and on negative eigenvalues of covariances.
pub const COVARIANCE_TOLERANCE: f64 = 1e-12;

/// Initial covariance diagonal: 1e-6 m², 1e-6 m², 1e-6 rad².
pub const DEFAULT_INITIAL_VARIANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EkfError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("{which} covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd {
        which: &'static str,
        min_eigenvalue: f64,
    },
    #[error("{0} covariance is not symmetric")]
    NotSymmetric(&'static str),
    #[error("measurement noise must be non-negative, got {0}")]
    NegativeNoise(f64),
    #[error("non-finite measurement")]
    NonFiniteMeasurement,
    #[error("innovation covariance is singular; measurement update is degenerate")]
    Degenerate,
}

/// Gaussian belief over the pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEstimate {
    pub mean: Pose,
    pub covariance: Matrix3<f64>,
}

impl StateEstimate {
    pub fn new(mean: Pose, covariance: Matrix3<f64>) -> Self {
        StateEstimate { mean, covariance }
    }

    /// Start pose with the default small diagonal covariance.
    pub fn initial(mean: Pose) -> Self {
        StateEstimate {
            mean,
            covariance: Matrix3::from_diagonal_element(DEFAULT_INITIAL_VARIANCE),
        }
    }

    pub fn mean_vector(&self) -> Vector3<f64> {
        Vector3::new(self.mean.x, self.mean.y, self.mean.theta)
    }
}

/// Diagonal of the measurement covariance `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementNoise {
    pub r11: f64,
    pub r22: f64,
    pub r33: f64,
}

impl MeasurementNoise {
    pub fn new(r11: f64, r22: f64, r33: f64) -> Result<Self, EkfError> {
        for r in [r11, r22, r33] {
            if !(r >= 0.0) {
                return Err(EkfError::NegativeNoise(r));
            }
        }
        Ok(MeasurementNoise { r11, r22, r33 })
    }

    pub fn uniform(r: f64) -> Result<Self, EkfError> {
        Self::new(r, r, r)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.r11, self.r22, self.r33))
    }
}

/// Absolute pose observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub noise: MeasurementNoise,
}

impl Measurement {
    pub fn new(x: f64, y: f64, theta: f64, noise: MeasurementNoise) -> Result<Self, EkfError> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(EkfError::NonFiniteMeasurement);
        }
        Ok(Measurement {
            x,
            y,
            theta: wrap(theta),
            noise,
        })
    }
}

/// Wheel rates held over `dt`, with their noise covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessInput {
    pub speeds: WheelAngularSpeeds,
    pub dt: f64,
    pub q: Matrix2<f64>,
}

impl ProcessInput {
    pub fn new(speeds: WheelAngularSpeeds, dt: f64, q: Matrix2<f64>) -> Result<Self, EkfError> {
        if !(dt > 0.0) {
            return Err(KinematicsError::NonPositiveDt(dt).into());
        }
        check_covariance("process input", &q)?;
        Ok(ProcessInput { speeds, dt, q })
    }

    /// Noise-free displacement for this input.
    pub fn displacement(&self, geom: &RobotGeometry) -> Result<Displacement, KinematicsError> {
        let (ds_l, ds_r) = wheel_increments(self.speeds, self.dt, geom)?;
        Ok(increments_to_displacement(ds_l, ds_r, geom))
    }
}

fn check_covariance<const N: usize>(
    which: &'static str,
    m: &nalgebra::SMatrix<f64, N, N>,
) -> Result<(), EkfError> {
    if (m - m.transpose()).amax() > COVARIANCE_TOLERANCE {
        return Err(EkfError::NotSymmetric(which));
    }
    let min_eigenvalue = min_eigenvalue(m);
    if !(min_eigenvalue >= -COVARIANCE_TOLERANCE) {
        return Err(EkfError::NotPsd {
            which,
            min_eigenvalue,
        });
    }
    Ok(())
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue<const N: usize>(m: &nalgebra::SMatrix<f64, N, N>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let dynamic = nalgebra::DMatrix::from_column_slice(N, N, sym.as_slice());
    SymmetricEigen::new(dynamic).eigenvalues.min()
}

fn symmetrize(p: &Matrix3<f64>) -> Matrix3<f64> {
    (p + p.transpose()) * 0.5
}

/// ∂f/∂x of the midpoint update.
pub fn jacobian_a(p: &Pose, d: &Displacement) -> Matrix3<f64> {
    let (s, c) = (p.theta + 0.5 * d.dtheta).sin_cos();
    let mut a = Matrix3::identity();
    a[(0, 2)] = -d.ds * s;
    a[(1, 2)] = d.ds * c;
    a
}

/// ∂f/∂(ω_R, ω_L), chained through the wheel increments and the midpoint heading.
pub fn jacobian_w(
    p: &Pose,
    input: &ProcessInput,
    geom: &RobotGeometry,
) -> Result<Matrix3x2<f64>, EkfError> {
    let d = input.displacement(geom)?;
    let (s, c) = (p.theta + 0.5 * d.dtheta).sin_cos();
    // ∂(x, y, θ)/∂(ds, dθ)
    let by_ds = Vector3::new(c, s, 0.0);
    let by_dtheta = Vector3::new(-0.5 * d.ds * s, 0.5 * d.ds * c, 1.0);

    let k = input.dt * geom.wheel_radius;
    let col_r = by_ds * (0.5 * k) + by_dtheta * (k / geom.track_width);
    let col_l = by_ds * (0.5 * k) - by_dtheta * (k / geom.track_width);
    Ok(Matrix3x2::from_columns(&[col_r, col_l]))
}

/// Time update: `x⁻ = f(x, u, 0)`, `P⁻ = A P Aᵀ + W Q Wᵀ`.
pub fn predict(
    s: &StateEstimate,
    input: &ProcessInput,
    geom: &RobotGeometry,
) -> Result<StateEstimate, EkfError> {
    check_covariance("state", &s.covariance)?;
    check_covariance("process input", &input.q)?;
    let d = input.displacement(geom)?;
    let a = jacobian_a(&s.mean, &d);
    let w = jacobian_w(&s.mean, input, geom)?;
    let p = a * s.covariance * a.transpose() + w * input.q * w.transpose();
    Ok(StateEstimate {
        mean: dead_reckon_step(&s.mean, &d),
        covariance: symmetrize(&p),
    })
}

/// Measurement update with `H = V = I`.
///
/// The gain solves `S Kᵀ = P⁻` with a Cholesky factorisation of
/// `S = P⁻ + R` instead of forming `S⁻¹`.
pub fn update(prior: &StateEstimate, z: &Measurement) -> Result<StateEstimate, EkfError> {
    if !(z.x.is_finite() && z.y.is_finite() && z.theta.is_finite()) {
        return Err(EkfError::NonFiniteMeasurement);
    }
    let p = &prior.covariance;
    let s = p + z.noise.matrix();
    let chol = s.cholesky().ok_or(EkfError::Degenerate)?;
    let gain = chol.solve(p).transpose();

    let innovation = Vector3::new(
        z.x - prior.mean.x,
        z.y - prior.mean.y,
        wrap(z.theta - prior.mean.theta),
    );
    let correction = gain * innovation;
    let mean = Pose::new(
        prior.mean.x + correction.x,
        prior.mean.y + correction.y,
        prior.mean.theta + correction.z,
    );
    let covariance = symmetrize(&((Matrix3::identity() - gain) * p));
    Ok(StateEstimate { mean, covariance })
}

/// One filter tick: always predict, update only when a measurement arrived.
pub fn step(
    s: &StateEstimate,
    input: &ProcessInput,
    z: Option<&Measurement>,
    geom: &RobotGeometry,
) -> Result<StateEstimate, EkfError> {
    let prior = predict(s, input, geom)?;
    match z {
        Some(z) => update(&prior, z),
        None => Ok(prior),
    }
}
