use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use altproj::cli::{self, output, OverrelaxOptions};
use altproj::schedule::Schedule;
use altproj::Result;

/// Relaxed alternating projections between affine subspaces.
#[derive(Debug, Parser)]
#[command(name = "altproj", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs.
    Run {
        scenario: PathBuf,
        /// Directory for output files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Constant relaxations on a geometry with ||Q||^2 = nu2.
    Overrelax {
        #[arg(long)]
        nu2: f64,
        /// Comma-separated relaxation parameters.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Write the table here as CSV instead of printing JSON.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Limit norm of diagonal truncations with singular values i^-p and data i^-r.
    Truncate {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        r: f64,
        /// Comma-separated truncation sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Landweber steps (constant relaxation 1) per size.
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Numerical admissibility diagnostics for a schedule file.
    CheckSchedule {
        schedule: PathBuf,
        /// Scale factor applied to the sequence (typically nu^2).
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
}

/// A closed pipe downstream (`| head`) is not an error.
fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn dispatch(args: Args) -> Result<()> {
    match args.command {
        Command::Run { scenario, out } => {
            let tol = cli::rank_tol_from_env()?;
            let (run, written) = cli::run_scenario(&scenario, &out, tol)?;
            print_json(&run.summary)?;
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Overrelax {
            nu2,
            alphas,
            seed,
            max_iters,
            csv,
        } => {
            let opts = OverrelaxOptions {
                max_iters,
                ..OverrelaxOptions::default()
            };
            let rows = cli::overrelaxation_study(nu2, &alphas, seed, &opts)?;
            match csv {
                Some(p) => output::write_records(&p, &rows)?,
                None => print_json(&rows)?,
            }
        }
        Command::Truncate { p, r, dims, iters, csv } => {
            let rows = cli::truncation_study(p, r, &dims, &Schedule::Constant { alpha: 1.0 }, iters)?;
            match csv {
                Some(path) => output::write_records(&path, &rows)?,
                None => print_json(&rows)?,
            }
        }
        Command::CheckSchedule { schedule, mu, horizon } => {
            print_json(&cli::check_schedule(&schedule, mu, horizon)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match dispatch(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
