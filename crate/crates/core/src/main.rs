use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use diffloc::harness::{commands, HarnessError};
use diffloc::Execution;

#[derive(Parser)]
#[command(
    name = "diffloc",
    version,
    about = "Differential-drive odometry/EKF scenario harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded scenario and write its trajectory log and summary.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the error summary from a trajectory log.
    Metrics { log: PathBuf },
    /// Run every configured seed and aggregate.
    Montecarlo {
        config: PathBuf,
        /// Run seeds one after another on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Convert an `alpha_deg beta_deg range_m` sweep into `x y z` points.
    LrfProject { sweep: PathBuf, cloud: PathBuf },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let o = commands::simulate(&config, seed, out.as_deref())?;
            eprintln!(
                "wrote {} and {}",
                o.log_path.display(),
                o.summary_path.display()
            );
            print!("{}", o.summary);
        }
        Command::Metrics { log } => print!("{}", commands::metrics(&log)?),
        Command::Montecarlo { config, sequential } => {
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let o = commands::montecarlo(&config, exec)?;
            for (seed, err) in &o.failures {
                eprintln!("seed {seed} failed: {err}");
            }
            eprintln!(
                "wrote {} and {}",
                o.runs_path.display(),
                o.summary_path.display()
            );
            print!("{}", o.summary);
        }
        Command::LrfProject { sweep, cloud } => {
            let o = commands::lrf_project(&sweep, &cloud, Execution::Parallel)?;
            eprintln!("{} points, {} rejected samples", o.points, o.rejected);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
