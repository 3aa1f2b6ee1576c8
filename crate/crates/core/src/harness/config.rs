//! Scenario files: one `key = value` pair per line, `#` starts a comment.
//! Angles are given in degrees, everything else in SI units.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `wheel_radius` | 0.05 | m |
//! | `track_width` | 0.6 | m |
//! | `dt_sensor` | 0.1 | s, sensor and filter period |
//! | `dt_fine` | 0.001 | s, truth integration step |
//! | `encoder_cpr` | 500 | lines per revolution |
//! | `quad_decode_factor` | 4 | |
//! | `compass_sigma_deg` | 0.1 | compass noise std |
//! | `compass_quantum_deg` | 0.1 | compass resolution |
//! | `speed_ripple_frac` | 0.05 | uniform ± speed ripple |
//! | `slip_delta` | 0.01 | injected slip variance factor |
//! | `path` | `rounded_rectangle` | or `waypoints` |
//! | `rect_width`, `rect_height`, `corner_radius` | 4, 3, 0.5 | m |
//! | `arc_segments` | 6 | chords per quarter arc |
//! | `waypoints` | | `x,y; x,y; ...` (first point is the start) |
//! | `straight_speed`, `turn_inner_speed` | 0.3, 0.05 | m/s |
//! | `capture_radius` | 0.05 | m |
//! | `heading_tolerance_deg` | 2.8647889757 | straight-driving bearing band (0.05 rad) |
//! | `duration` | 60 | s |
//! | `delta` | 0.01 | filter input-noise factor |
//! | `with_ekf` | true | |
//! | `residual_window` | 50 | samples for the R estimates |
//! | `r_floor_position` | 1e-4 | m² |
//! | `r_floor_heading_deg` | 0.1 | r33 floor is this angle squared |
//! | `r_fixed` | | `r11,r22,r33` disables the adaptive R |
//! | `measurement_interval` | 1 | ticks between measurement updates |
//! | `seeds` | 1 | `a-b` range or comma list |
//! | `out_dir` | `out` | |

use std::path::{Path, PathBuf};

use crate::ekf::MeasurementNoise;
use crate::kinematics::RobotGeometry;
use crate::noise::{NoiseFloors, ProcessNoiseParams, DEFAULT_WINDOW};
use crate::sim::{ControllerParams, PathPlan, RoundedRectangle, SimParams};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum PathSpec {
    RoundedRectangle(RoundedRectangle),
    Waypoints(Vec<(f64, f64)>),
}

impl PathSpec {
    pub fn plan(&self) -> Result<PathPlan, HarnessError> {
        let plan = match self {
            PathSpec::RoundedRectangle(r) => r.plan(),
            PathSpec::Waypoints(pts) => PathPlan::from_points(pts.clone()),
        };
        plan.map_err(|e| HarnessError::config("path", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementNoiseMode {
    /// Windowed mean-square estimates with floors.
    Adaptive {
        window: usize,
        floors: NoiseFloors,
    },
    Fixed(MeasurementNoise),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: RobotGeometry,
    pub sim: SimParams,
    pub path: PathSpec,
    pub controller: ControllerParams,
    pub duration: f64,
    pub delta: ProcessNoiseParams,
    pub with_ekf: bool,
    pub measurement_noise: MeasurementNoiseMode,
    pub measurement_interval: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            geometry: RobotGeometry::default(),
            sim: SimParams::default(),
            path: PathSpec::RoundedRectangle(RoundedRectangle::default()),
            controller: ControllerParams::default(),
            duration: 60.0,
            delta: ProcessNoiseParams::default(),
            with_ekf: true,
            measurement_noise: MeasurementNoiseMode::Adaptive {
                window: DEFAULT_WINDOW,
                floors: NoiseFloors::default(),
            },
            measurement_interval: 1,
            seeds: vec![1],
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, HarnessError> {
    let v: f64 = value
        .parse()
        .map_err(|_| HarnessError::config(key, format!("expected a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(HarnessError::config(key, "must be finite"));
    }
    Ok(v)
}

fn parse_nonneg(key: &str, value: &str) -> Result<f64, HarnessError> {
    let v = parse_f64(key, value)?;
    if v < 0.0 {
        return Err(HarnessError::config(key, "must be >= 0"));
    }
    Ok(v)
}

fn parse_positive(key: &str, value: &str) -> Result<f64, HarnessError> {
    let v = parse_f64(key, value)?;
    if v <= 0.0 {
        return Err(HarnessError::config(key, "must be > 0"));
    }
    Ok(v)
}

fn parse_count<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value.parse().map_err(|_| {
        HarnessError::config(
            key,
            format!("expected a non-negative integer, got `{value}`"),
        )
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, HarnessError> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(HarnessError::config(
            key,
            format!("expected true/false, got `{value}`"),
        )),
    }
}

fn parse_seeds(value: &str) -> Result<Vec<u64>, HarnessError> {
    let mut seeds = Vec::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once('-') {
            let a: u64 = parse_count("seeds", a.trim())?;
            let b: u64 = parse_count("seeds", b.trim())?;
            if b < a {
                return Err(HarnessError::config(
                    "seeds",
                    format!("empty range `{part}`"),
                ));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(parse_count("seeds", part)?);
        }
    }
    if seeds.is_empty() {
        return Err(HarnessError::config(
            "seeds",
            "at least one seed is required",
        ));
    }
    Ok(seeds)
}

fn parse_points(value: &str) -> Result<Vec<(f64, f64)>, HarnessError> {
    let mut pts = Vec::new();
    for part in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (x, y) = part.split_once(',').ok_or_else(|| {
            HarnessError::config("waypoints", format!("expected `x,y`, got `{part}`"))
        })?;
        pts.push((
            parse_f64("waypoints", x.trim())?,
            parse_f64("waypoints", y.trim())?,
        ));
    }
    if pts.len() < 2 {
        return Err(HarnessError::config(
            "waypoints",
            "need at least two points",
        ));
    }
    Ok(pts)
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = ScenarioConfig::default();
        let mut rect = RoundedRectangle::default();
        let mut path_kind = "rounded_rectangle".to_string();
        let mut waypoints = None;
        let mut window = DEFAULT_WINDOW;
        let mut floors = NoiseFloors::default();
        let mut fixed = None;

        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::config(format!("line {}", index + 1), "expected `key = value`")
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "wheel_radius" => cfg.geometry.wheel_radius = parse_positive(key, value)?,
                "track_width" => cfg.geometry.track_width = parse_positive(key, value)?,
                "dt_sensor" => cfg.sim.dt_sensor = parse_positive(key, value)?,
                "dt_fine" => cfg.sim.dt_fine = parse_positive(key, value)?,
                "encoder_cpr" => cfg.sim.encoder_cpr = parse_count(key, value)?,
                "quad_decode_factor" => cfg.sim.quad_decode_factor = parse_count(key, value)?,
                "compass_sigma_deg" => {
                    cfg.sim.compass_sigma = parse_nonneg(key, value)?.to_radians()
                }
                "compass_quantum_deg" => {
                    cfg.sim.compass_quantum = parse_nonneg(key, value)?.to_radians()
                }
                "speed_ripple_frac" => cfg.sim.speed_ripple_frac = parse_nonneg(key, value)?,
                "slip_delta" => cfg.sim.slip_delta = parse_nonneg(key, value)?,
                "path" => path_kind = value.to_string(),
                "rect_width" => rect.width = parse_positive(key, value)?,
                "rect_height" => rect.height = parse_positive(key, value)?,
                "corner_radius" => rect.corner_radius = parse_nonneg(key, value)?,
                "arc_segments" => rect.arc_segments = parse_count(key, value)?,
                "waypoints" => waypoints = Some(parse_points(value)?),
                "straight_speed" => cfg.controller.straight_speed = parse_nonneg(key, value)?,
                "turn_inner_speed" => cfg.controller.turn_inner_speed = parse_nonneg(key, value)?,
                "capture_radius" => cfg.controller.capture_radius = parse_positive(key, value)?,
                "heading_tolerance_deg" => {
                    cfg.controller.heading_tolerance = parse_nonneg(key, value)?.to_radians()
                }
                "duration" => cfg.duration = parse_positive(key, value)?,
                "delta" => cfg.delta.delta = parse_nonneg(key, value)?,
                "with_ekf" => cfg.with_ekf = parse_bool(key, value)?,
                "residual_window" => window = parse_count(key, value)?,
                "r_floor_position" => {
                    let r = parse_nonneg(key, value)?;
                    floors.r11 = r;
                    floors.r22 = r;
                }
                "r_floor_heading_deg" => {
                    floors.r33 = parse_nonneg(key, value)?.to_radians().powi(2)
                }
                "r_fixed" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(HarnessError::config(key, "expected `r11,r22,r33`"));
                    }
                    fixed = Some(MeasurementNoise {
                        r11: parse_nonneg(key, parts[0])?,
                        r22: parse_nonneg(key, parts[1])?,
                        r33: parse_nonneg(key, parts[2])?,
                    });
                }
                "measurement_interval" => cfg.measurement_interval = parse_count(key, value)?,
                "seeds" => cfg.seeds = parse_seeds(value)?,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                _ => return Err(HarnessError::config(key, "unknown key")),
            }
        }

        cfg.path = match path_kind.as_str() {
            "rounded_rectangle" => PathSpec::RoundedRectangle(rect),
            "waypoints" => PathSpec::Waypoints(waypoints.ok_or_else(|| {
                HarnessError::config("waypoints", "required when path = waypoints")
            })?),
            other => {
                return Err(HarnessError::config(
                    "path",
                    format!("unknown path `{other}`"),
                ))
            }
        };
        cfg.measurement_noise = match fixed {
            Some(r) => MeasurementNoiseMode::Fixed(r),
            None => MeasurementNoiseMode::Adaptive { window, floors },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.geometry
            .validate()
            .map_err(|e| HarnessError::config("geometry", e.to_string()))?;
        self.sim.validate().map_err(|e| match e {
            crate::sim::SimError::InvalidParam { field, reason } => {
                HarnessError::config(field, reason)
            }
            other => HarnessError::config("sim", other.to_string()),
        })?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(HarnessError::config("duration", "must be > 0"));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::config(
                "seeds",
                "at least one seed is required",
            ));
        }
        if self.measurement_interval == 0 {
            return Err(HarnessError::config("measurement_interval", "must be >= 1"));
        }
        if let MeasurementNoiseMode::Adaptive { window, .. } = self.measurement_noise {
            if window == 0 {
                return Err(HarnessError::config("residual_window", "must be >= 1"));
            }
        }
        let c = &self.controller;
        if !(c.turn_inner_speed <= c.straight_speed) {
            return Err(HarnessError::config(
                "turn_inner_speed",
                "must not exceed straight_speed",
            ));
        }
        self.path.plan()?;
        Ok(())
    }

    /// Number of sensor ticks covering `duration`.
    pub fn ticks(&self) -> usize {
        (self.duration / self.sim.dt_sensor).round() as usize
    }
}
