//! Scenario harness behind the `diffloc` command line.

pub mod commands;
pub mod config;
pub mod format;
pub mod log;
pub mod metrics;
pub mod montecarlo;
pub mod scenario;

use std::path::Path;

use thiserror::Error;

use crate::ekf::EkfError;
use crate::kinematics::KinematicsError;
use crate::noise::NoiseError;
use crate::sim::SimError;

pub use config::{MeasurementNoiseMode, PathSpec, ScenarioConfig};
pub use log::{Deviation, EkfColumns, LogRow, TrajectoryLog, CSV_COLUMNS};
pub use metrics::{aggregate, compute_metrics, Aggregate, EstimatorMetrics, RunSummary};
pub use montecarlo::{monte_carlo, MonteCarloReport, SeedOutcome};
pub use scenario::run_scenario;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("trajectory log is empty")]
    EmptyLog,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ekf(#[from] EkfError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        HarnessError::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for bad configuration or input files, 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::Parse { .. } => 2,
            _ => 3,
        }
    }
}
