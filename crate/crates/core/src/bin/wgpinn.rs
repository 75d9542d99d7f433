use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wgpinn::experiment::{self, ExperimentConfig, MatrixCell};
use wgpinn::Error;

/// Wave-scattering PINN trainer for 2-D waveguide junctions.
#[derive(Parser)]
#[command(name = "wgpinn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration and write its artifacts.
    Run { config: PathBuf },
    /// Run the formulation-by-wave-number matrix of a configuration.
    Matrix { config: PathBuf },
    /// Run the verification suite (taper identities, DtN identity,
    /// formulation equivalence, gradient check).
    Verify { config: Option<PathBuf> },
    /// Evaluate a checkpoint on an NXxNZ grid and emit the field CSV.
    Eval {
        checkpoint: PathBuf,
        /// Grid shape, e.g. 240x20.
        grid: String,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

// Exit codes: 0 success, 1 usage/config error, 2 numeric failure,
// 3 verification failure.
const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VERIFY: u8 = 3;

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), Error> {
    let (nx, nz) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Config(format!("grid '{s}' is not of the form NXxNZ")))?;
    let parse = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::Config(format!("grid '{s}' is not of the form NXxNZ")))
    };
    Ok((parse(nx)?, parse(nz)?))
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = experiment::run_single(&cfg)?;
            println!(
                "{} k={}: eps_r={:.6} eps_i={:.6} loss={:.6e} ({:.1}s) -> {}",
                summary.formulation,
                summary.k,
                summary.eps_r,
                summary.eps_i,
                summary.final_loss,
                summary.wall_time_s,
                summary.out_dir.display()
            );
            Ok(0)
        }
        Command::Matrix { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let cells = experiment::run_matrix(&cfg)?;
            let mut any_failed = false;
            for cell in &cells {
                match cell {
                    MatrixCell::Ok(s) => println!(
                        "{} k={}: eps_r={:.6} eps_i={:.6} ({:.1}s)",
                        s.formulation, s.k, s.eps_r, s.eps_i, s.wall_time_s
                    ),
                    MatrixCell::Failed {
                        formulation,
                        k,
                        message,
                    } => {
                        any_failed = true;
                        println!("{formulation} k={k}: FAILED ({message})");
                    }
                }
            }
            println!(
                "error table: {}",
                cfg.out_dir().join("error_table.csv").display()
            );
            Ok(if any_failed { EXIT_NUMERIC } else { 0 })
        }
        Command::Verify { config } => {
            let cfg = match &config {
                Some(p) => Some(ExperimentConfig::load(p)?),
                None => None,
            };
            let report = experiment::verify(cfg.as_ref());
            for check in &report.checks {
                println!("{check}");
            }
            if report.all_passed() {
                println!("verification passed ({} checks)", report.checks.len());
                Ok(0)
            } else {
                println!("verification FAILED");
                Ok(EXIT_VERIFY)
            }
        }
        Command::Eval {
            checkpoint,
            grid,
            out,
        } => {
            let (nx, nz) = parse_grid(&grid)?;
            experiment::eval_checkpoint(&checkpoint, nx, nz, out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
