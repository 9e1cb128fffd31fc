use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};
use sparsectl::Tolerances;
use sparsectl_cli::pretty::render;
use sparsectl_cli::{run_command, Command, GeneratorKind, Options};

/// Nonnegative sparse controllability analysis for x_k = A x_{k-1} + B u_k.
#[derive(Parser, Debug)]
#[command(name = "sparsectl", version)]
struct Cli {
    /// Set every numeric tolerance (rank, eigenvalue, inequality) to this value.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Print a human-readable summary on stderr.
    #[arg(long, global = true)]
    pretty: bool,
    /// JSON file {"Phi": [[..]]}; the system is analysed with inputs B*Phi.
    #[arg(long, global = true, value_name = "FILE")]
    input_basis: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide nonnegative (s-sparse) controllability and emit a certificate if it fails.
    Check {
        file: PathBuf,
        #[arg(long)]
        s: Option<usize>,
    },
    /// Smallest admissible sparsity level.
    MinSparsity { file: PathBuf },
    /// Brute-force reachability coverage over probe directions.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Zero-eigenvalue Jordan structure decomposition and its verification.
    Decompose { file: PathBuf },
    /// Re-check a certificate (bare, or embedded in a check report) against a system.
    VerifyCert {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        cert: PathBuf,
    },
    /// Generate a test system.
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rank deficiency for planted_rank_deficient.
        #[arg(long)]
        d: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sparsectl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<(), sparsectl_cli::CliError> {
    let tol = match cli.tol {
        Some(t) => Tolerances::uniform(t)?,
        None => Tolerances::default(),
    };
    let (input, command) = match cli.command {
        Cmd::Check { file, s } => (Some(file), Command::Check { s }),
        Cmd::MinSparsity { file } => (Some(file), Command::MinSparsity),
        Cmd::Oracle {
            file,
            s,
            kmax,
            samples,
            seed,
        } => (
            Some(file),
            Command::Oracle {
                s,
                k_max: kmax,
                samples,
                seed,
            },
        ),
        Cmd::Decompose { file } => (Some(file), Command::Decompose),
        Cmd::VerifyCert { file, cert } => (Some(file), Command::VerifyCert { cert }),
        Cmd::Gen {
            kind,
            n,
            m,
            seed,
            d,
        } => (
            None,
            Command::Gen {
                kind: kind.parse::<GeneratorKind>()?,
                n,
                m,
                seed,
                deficiency: d,
            },
        ),
    };
    let opts = Options {
        input,
        input_basis: cli.input_basis,
        tol,
    };
    let report = run_command(&command, &opts)?;
    println!("{}", report.to_json());
    if cli.pretty {
        eprint!("{}", render(&report));
    }
    Ok(())
}
