//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Matrix3x2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use diffloc::ekf::{self, jacobian_a, jacobian_w, min_eigenvalue};
use diffloc::harness::{monte_carlo, ScenarioConfig};
use diffloc::kinematics::{dead_reckon_step, increments_to_displacement, wrap};
use diffloc::lrf::{project, sweep_to_cloud, unproject, LrfSample, ScanPlane, MAX_ALPHA, MAX_BETA};
use diffloc::noise::{
    build_q, calibrate_delta, estimate_r33, CalibrationMotion, HeadingPair, ProcessNoiseParams,
    ResidualWindow,
};
use diffloc::sim::{
    calibration_drive, decode_encoders, sample_encoders, PathController, SimParams, World,
};
use diffloc::{
    Execution, Measurement, MeasurementNoise, Pose, ProcessInput, RobotGeometry, StateEstimate,
    WheelAngularSpeeds,
};

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
    Pose::new(
        rng.random_range(-10.0..10.0),
        rng.random_range(-10.0..10.0),
        rng.random_range(-3.0..3.0),
    )
}

fn random_speeds(rng: &mut ChaCha8Rng) -> WheelAngularSpeeds {
    WheelAngularSpeeds::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0))
}

fn input(speeds: WheelAngularSpeeds, q: nalgebra::Matrix2<f64>) -> ProcessInput {
    ProcessInput::new(speeds, 0.1, q).unwrap()
}

fn propagate(p: &Pose, w: WheelAngularSpeeds, g: &RobotGeometry) -> nalgebra::Vector3<f64> {
    let d = input(w, nalgebra::Matrix2::zeros())
        .displacement(g)
        .unwrap();
    let n = dead_reckon_step(p, &d);
    nalgebra::Vector3::new(n.x, n.y, n.theta)
}

fn diff(a: nalgebra::Vector3<f64>, b: nalgebra::Vector3<f64>) -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(a.x - b.x, a.y - b.y, wrap(a.z - b.z))
}

fn jacobians() -> Outcome {
    let start = Instant::now();
    let g = RobotGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_pose(&mut rng);
        let w = random_speeds(&mut rng);
        let inp = input(w, nalgebra::Matrix2::zeros());
        let d = inp.displacement(&g).unwrap();

        let mut fd_a = Matrix3::zeros();
        for j in 0..3 {
            let mut plus = [p.x, p.y, p.theta];
            let mut minus = plus;
            plus[j] += h;
            minus[j] -= h;
            let f = |v: [f64; 3]| {
                let n = dead_reckon_step(
                    &Pose {
                        x: v[0],
                        y: v[1],
                        theta: v[2],
                    },
                    &d,
                );
                nalgebra::Vector3::new(n.x, n.y, n.theta)
            };
            fd_a.set_column(j, &(diff(f(plus), f(minus)) / (2.0 * h)));
        }
        let mut fd_w = Matrix3x2::zeros();
        for j in 0..2 {
            let shift = |s: f64| {
                let mut v = w;
                if j == 0 {
                    v.omega_r += s;
                } else {
                    v.omega_l += s;
                }
                v
            };
            let col = diff(propagate(&p, shift(h), &g), propagate(&p, shift(-h), &g)) / (2.0 * h);
            fd_w.set_column(j, &col);
        }
        let a = jacobian_a(&p, &d);
        let wj = jacobian_w(&p, &inp, &g).unwrap();
        worst = worst
            .max((a - fd_a).norm() / a.norm())
            .max((wj - fd_w).norm() / wj.norm().max(f64::MIN_POSITIVE));
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-6 && within(t, 1.0),
        format!("max relative error {worst:.3e}, {:.3} s", t.as_secs_f64()),
    )
}

fn random_psd(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3<f64> {
    let l = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0) * scale);
    l * l.transpose()
}

fn covariance_health() -> Outcome {
    let start = Instant::now();
    let g = RobotGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut asym, mut min_eig, mut min_shrink) = (0.0f64, f64::INFINITY, f64::INFINITY);
    for _ in 0..100 {
        let mut s = StateEstimate::new(random_pose(&mut rng), random_psd(&mut rng, 0.1));
        for _ in 0..100 {
            let w = random_speeds(&mut rng);
            let delta = ProcessNoiseParams::new(rng.random_range(0.0..0.05)).unwrap();
            let prior = ekf::predict(&s, &input(w, build_q(w, &delta)), &g).unwrap();
            let r = MeasurementNoise::new(
                10f64.powf(rng.random_range(-8.0..0.0)),
                10f64.powf(rng.random_range(-8.0..0.0)),
                10f64.powf(rng.random_range(-8.0..0.0)),
            )
            .unwrap();
            let z = Measurement::new(
                prior.mean.x + rng.random_range(-0.5..0.5),
                prior.mean.y + rng.random_range(-0.5..0.5),
                wrap(prior.mean.theta + rng.random_range(-0.5..0.5)),
                r,
            )
            .unwrap();
            let post = ekf::update(&prior, &z).unwrap();
            for p in [&prior.covariance, &post.covariance] {
                asym = asym.max((p - p.transpose()).abs().max());
                min_eig = min_eig.min(min_eigenvalue(p));
            }
            min_shrink = min_shrink.min(min_eigenvalue(&(prior.covariance - post.covariance)));
            s = post;
        }
    }
    let t = start.elapsed();
    outcome(
        asym <= 1e-12 && min_eig >= -1e-12 && min_shrink >= -1e-12 && within(t, 10.0),
        format!(
            "10000 cycles: asymmetry {asym:.1e}, min eig {min_eig:.1e}, min eig(P⁻−P') {min_shrink:.1e}, {:.2} s",
            t.as_secs_f64()
        ),
    )
}

/// 60 s closed-loop run. Returns the worst per-tick deviation of
/// (a) a `Q = 0`, `R = 1e12` filter from dead reckoning and
/// (b) an `R = 1e-12` update from its measurement, applied to the prior of a
/// filter running with the default floor noise.
fn degenerate_run() -> (f64, f64) {
    let cfg = ScenarioConfig::default();
    let g = cfg.geometry;
    let params = SimParams { seed: 9, ..cfg.sim };
    let dt = params.dt_sensor;
    let plan = cfg.path.plan().unwrap();
    let mut controller = PathController::new(plan.clone(), cfg.controller);
    let mut world = World::new(plan.start(), g, params).unwrap();
    let mut prev = world.encoders_now();
    let mut odometry = plan.start();
    let mut blind = StateEstimate::new(plan.start(), Matrix3::zeros());
    let mut tuned = StateEstimate::initial(plan.start());
    let loose = MeasurementNoise::uniform(1e12).unwrap();
    let tight = MeasurementNoise::uniform(1e-12).unwrap();
    let floors = MeasurementNoise::new(1e-4, 1e-4, 0.1f64.to_radians().powi(2)).unwrap();
    let pose_gap = |a: &Pose, b: &Pose| {
        (a.x - b.x)
            .abs()
            .max((a.y - b.y).abs())
            .max(wrap(a.theta - b.theta).abs())
    };
    let (mut worst_loose, mut worst_tight) = (0.0f64, 0.0f64);
    for _ in 0..cfg.ticks() {
        let frame = world.advance(controller.command(&odometry)).unwrap();
        let (ds_l, ds_r) = decode_encoders(&prev, &frame.encoders, &g, &params).unwrap();
        prev = frame.encoders;
        odometry = dead_reckon_step(&odometry, &increments_to_displacement(ds_l, ds_r, &g));
        let k = g.wheel_radius * dt;
        let w = WheelAngularSpeeds::new(ds_r / k, ds_l / k);
        let (x, y, heading) = (odometry.x, odometry.y, frame.compass.heading);

        let z = Measurement::new(x, y, heading, loose).unwrap();
        blind = ekf::step(&blind, &input(w, nalgebra::Matrix2::zeros()), Some(&z), &g).unwrap();
        worst_loose = worst_loose.max(pose_gap(&blind.mean, &odometry));

        let prior = ekf::predict(
            &tuned,
            &input(w, build_q(w, &ProcessNoiseParams::default())),
            &g,
        )
        .unwrap();
        let exact = ekf::update(&prior, &Measurement::new(x, y, heading, tight).unwrap()).unwrap();
        worst_tight = worst_tight.max(pose_gap(
            &exact.mean,
            &Pose {
                x,
                y,
                theta: heading,
            },
        ));
        tuned = ekf::update(&prior, &Measurement::new(x, y, heading, floors).unwrap()).unwrap();
    }
    (worst_loose, worst_tight)
}

fn degenerate_limits() -> Outcome {
    let (loose, tight) = degenerate_run();
    outcome(
        loose <= 1e-9 && tight <= 1e-6,
        format!("R=1e12 vs dead reckoning {loose:.2e}; R=1e-12 vs measurement {tight:.2e}"),
    )
}

fn fusion_benefit() -> Outcome {
    let start = Instant::now();
    let cfg = ScenarioConfig {
        seeds: (1..=100).collect(),
        ..ScenarioConfig::default()
    };
    let report = monte_carlo(&cfg, Execution::default());
    let t = start.elapsed();
    let Some(agg) = report.aggregate else {
        return outcome(false, "every run failed");
    };
    let odo = agg.median.odometry;
    let Some(ekf) = agg.median.ekf else {
        return outcome(false, "no filter metrics");
    };
    outcome(
        report.failures() == 0
            && ekf.final_position < odo.final_position
            && ekf.rms_theta <= 0.5 * odo.rms_theta
            && within(t, 60.0),
        format!(
            "100 seeds: final position {:.4} vs {:.4} m, RMS heading {:.5} vs {:.5} rad, {:.2} s",
            ekf.final_position,
            odo.final_position,
            ekf.rms_theta,
            odo.rms_theta,
            t.as_secs_f64()
        ),
    )
}

fn delta_calibration() -> Outcome {
    let g = RobotGeometry::default();
    let mut runs = Vec::new();
    for i in 0..25u64 {
        // minimum to maximum tangential speed
        let rate = 1.0 + 5.0 * i as f64 / 24.0;
        for (j, motion) in [CalibrationMotion::Straight, CalibrationMotion::Spin]
            .into_iter()
            .enumerate()
        {
            let params = SimParams {
                seed: 1000 + 2 * i + j as u64,
                ..SimParams::default()
            };
            runs.push(calibration_drive(motion, rate, 100, g, params).unwrap());
        }
    }
    let delta = calibrate_delta(&runs, &g, SimParams::default().dt_sensor)
        .unwrap()
        .delta;
    outcome(
        (0.008..=0.012).contains(&delta),
        format!("{} runs, recovered δ = {delta:.5}", runs.len()),
    )
}

fn r33_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut win = ResidualWindow::new(50).unwrap();
    for _ in 0..50 {
        let encoder = rng.random_range(-3.1..3.1);
        win.push(HeadingPair {
            compass: wrap(encoder + 0.02),
            encoder,
        });
    }
    let r33 = estimate_r33(&win).unwrap();
    let err = (r33 - 4e-4).abs();
    outcome(err <= 1e-15, format!("r33 = {r33:.17e}, error {err:.1e}"))
}

fn encoder_quantization() -> Outcome {
    let g = RobotGeometry::default();
    let params = SimParams::default();
    let zero = sample_encoders(0.0, 0.0, 0.0, &params);
    let turn = sample_encoders(std::f64::consts::TAU, std::f64::consts::TAU, 0.1, &params);
    let (ds_l, ds_r) = decode_encoders(&zero, &turn, &g, &params).unwrap();
    let expected = std::f64::consts::TAU * 0.05;
    let err = (ds_l - expected).abs().max((ds_r - expected).abs());
    outcome(
        turn.ticks_l == 2000 && turn.ticks_r == 2000 && err <= 1e-12,
        format!("{} counts, decode error {err:.1e} m", turn.ticks_r),
    )
}

fn lrf_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut norm_err, mut trip_err) = (0.0f64, 0.0f64);
    for _ in 0..100_000 {
        let s = LrfSample::new(
            rng.random_range(0.0..=MAX_ALPHA),
            rng.random_range(-MAX_BETA + 1e-6..MAX_BETA - 1e-6),
            rng.random_range(0.04..80.0),
        )
        .unwrap();
        let p = project(&s).unwrap();
        norm_err = norm_err.max((p.norm() - s.range).abs() / s.range);
        let back = unproject(&p).unwrap();
        trip_err = trip_err
            .max((back.alpha - s.alpha).abs())
            .max((back.beta - s.beta).abs())
            .max((back.range - s.range).abs());
    }
    // wall x = 3 swept over the full pitch range
    let wall = 3.0;
    let sweep: Vec<ScanPlane> = (0..=25)
        .map(|a| {
            let alpha = (a as f64).to_radians();
            let beams = (-60..=60)
                .map(|b| {
                    let beta = (b as f64).to_radians();
                    (beta, wall / (alpha.cos() * beta.cos()))
                })
                .collect();
            ScanPlane { alpha, beams }
        })
        .collect();
    let cloud = sweep_to_cloud(&sweep, Execution::default());
    let plane_err = cloud
        .points
        .iter()
        .map(|p| (p.x - wall).abs())
        .fold(0.0, f64::max);
    outcome(
        norm_err <= 1e-9 && trip_err <= 1e-9 && plane_err <= 1e-9 && cloud.rejected == 0,
        format!(
            "norm {norm_err:.1e}, round trip {trip_err:.1e}, wall {plane_err:.1e} over {} points",
            cloud.points.len()
        ),
    )
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(&cfg, "duration = 30\nseeds = 7\n").unwrap();
    let run = |out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_diffloc"))
            .arg("simulate")
            .arg(&cfg)
            .args(["--seed", "42", "--out"])
            .arg(out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out.join("trajectory_seed42.csv")).unwrap()
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    outcome(
        a == b && !a.is_empty(),
        format!(
            "two invocations, {} bytes each, identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("Jacobians match central differences", jacobians),
        (
            "covariance stays symmetric, PSD and non-increasing",
            covariance_health,
        ),
        ("degenerate R limits", degenerate_limits),
        ("fusion beats odometry over 100 seeds", fusion_benefit),
        ("δ calibration recovers injected slip", delta_calibration),
        ("r33 closed form", r33_closed_form),
        ("encoder quantization", encoder_quantization),
        ("LRF projection geometry", lrf_geometry),
        ("simulate output is reproducible", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} - {}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
