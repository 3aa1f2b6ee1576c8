use crate::ekf::{self, Measurement, ProcessInput, StateEstimate};
use crate::kinematics::{dead_reckon_step, increments_to_displacement, WheelAngularSpeeds};
use crate::noise::{build_q, AdaptiveMeasurementNoise, HeadingPair, PositionResidual};
use crate::sim::{decode_encoders, PathController, SimParams, World};

use super::config::{MeasurementNoiseMode, ScenarioConfig};
use super::log::{EkfColumns, LogRow, TrajectoryLog};
use super::HarnessError;

enum NoiseSource {
    Adaptive(AdaptiveMeasurementNoise),
    Fixed(ekf::MeasurementNoise),
}

/// Runs one seeded scenario.
///
/// Each tick the controller steers from the filter estimate (or from
/// odometry when the filter is off), the world realises the command, and
/// both estimators consume the same encoder and compass samples:
/// odometry integrates the decoded wheel travel, the filter predicts with the
/// decoded wheel rates and corrects with `(x_odo, y_odo, θ_compass)`.
/// Both adaptive R windows compare against the filter prior.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<TrajectoryLog, HarnessError> {
    cfg.validate()?;
    let geom = cfg.geometry;
    let params = SimParams { seed, ..cfg.sim };
    let dt = params.dt_sensor;
    let plan = cfg.path.plan()?;
    let start = plan.start();
    let mut controller = PathController::new(plan, cfg.controller);
    let mut world = World::new(start, geom, params)?;

    let mut odometry = start;
    let mut filter = StateEstimate::initial(start);
    let mut noise = match cfg.measurement_noise {
        MeasurementNoiseMode::Adaptive { window, floors } => {
            NoiseSource::Adaptive(AdaptiveMeasurementNoise::new(window, floors)?)
        }
        MeasurementNoiseMode::Fixed(r) => NoiseSource::Fixed(r),
    };
    let mut prev_encoders = world.encoders_now();
    let ticks = cfg.ticks();
    let mut rows = Vec::with_capacity(ticks);

    for k in 1..=ticks {
        let steer_from = if cfg.with_ekf { filter.mean } else { odometry };
        let command = controller.command(&steer_from);
        let frame = world.advance(command)?;

        let (ds_l, ds_r) = decode_encoders(&prev_encoders, &frame.encoders, &geom, &params)?;
        prev_encoders = frame.encoders;
        odometry = dead_reckon_step(&odometry, &increments_to_displacement(ds_l, ds_r, &geom));

        let ekf_columns = if cfg.with_ekf {
            let k_dt = geom.wheel_radius * dt;
            let speeds = WheelAngularSpeeds::new(ds_r / k_dt, ds_l / k_dt);
            let input = ProcessInput::new(speeds, dt, build_q(speeds, &cfg.delta))?;
            let prior = ekf::predict(&filter, &input, &geom)?;
            filter = if k % cfg.measurement_interval == 0 {
                let r = match &mut noise {
                    NoiseSource::Adaptive(a) => {
                        a.push(
                            HeadingPair {
                                compass: frame.compass.heading,
                                encoder: prior.mean.theta,
                            },
                            PositionResidual {
                                dx: odometry.x - prior.mean.x,
                                dy: odometry.y - prior.mean.y,
                            },
                        );
                        a.current()
                    }
                    NoiseSource::Fixed(r) => *r,
                };
                let z = Measurement::new(odometry.x, odometry.y, frame.compass.heading, r)?;
                ekf::update(&prior, &z)?
            } else {
                prior
            };
            if !filter.mean.is_finite() {
                return Err(HarnessError::Numeric(format!(
                    "filter diverged at tick {k}"
                )));
            }
            Some(EkfColumns {
                pose: filter.mean,
                p_diag: [
                    filter.covariance[(0, 0)],
                    filter.covariance[(1, 1)],
                    filter.covariance[(2, 2)],
                ],
            })
        } else {
            None
        };

        rows.push(LogRow {
            t: k as f64 * dt,
            truth: world.truth(),
            odometry,
            ekf: ekf_columns,
        });
    }
    Ok(TrajectoryLog { rows })
}
