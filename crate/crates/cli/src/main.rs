//! Command-line interface for log-determinant information quantities and
//! Gaussian covariance-matrix computations.
//!
//! Exit codes: 0 on success, 1 when a `verify` property fails beyond
//! tolerance, 2 on parse/usage errors, 3 on math-domain errors
//! (non-positive-definite input, invalid covariance matrices, singular
//! blocks).

use clap::{Parser, Subcommand};

mod commands;
mod io;
mod json;

/// Error carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A verification property failed beyond tolerance (exit 1).
    PropertyFailure,
    /// Input could not be parsed or the usage is wrong (exit 2).
    Parse(String),
    /// Mathematically invalid input (exit 3).
    Math(String),
}

impl CliError {
    pub fn from_core(e: logdet_gauss::Error) -> CliError {
        use logdet_gauss::Error as E;
        match e {
            E::UnknownLabel(_)
            | E::DuplicateLabel(_)
            | E::PartitionSizeMismatch { .. }
            | E::DimensionMismatch { .. }
            | E::NotSquare { .. }
            | E::Shape(_) => CliError::Parse(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::PropertyFailure => 1,
            CliError::Parse(_) => 2,
            CliError::Math(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "logdet-gauss",
    about = "Log-det entropies, Gaussian recovery and Rényi-2 entanglement on covariance matrices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Log-det entropy, mutual information and the conditional identity
    /// cross-checks for a partitioned matrix
    Info {
        /// Matrix file (JSON, or plain CSV with --csv)
        file: String,
        /// Block roles: labels `A,B[,C]`, or definitions `A=1,B=2[,C=1]`
        #[arg(long)]
        blocks: String,
        /// Machine-readable output
        #[arg(long)]
        json: bool,
        /// Treat the input as row-major CSV
        #[arg(long)]
        csv: bool,
    },
    /// Five-condition saturation report for strong subadditivity
    Saturation {
        file: String,
        /// Block roles (defaults to the file's three blocks in order)
        #[arg(long)]
        blocks: Option<String>,
        /// Relative tolerance for the saturation flags
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the recovered extension to this file
        #[arg(long)]
        emit_recovered: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Quantum covariance matrix operations
    Qcm {
        file: String,
        /// One of: validate, williamson, purify, gamma-sharp, measure
        action: String,
        /// Party to measure (defaults to the last one)
        #[arg(long)]
        party: Option<String>,
        /// Seed QCM file for `measure`
        #[arg(long)]
        seed_file: Option<String>,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
        /// Mode structure `A=1,B=1` overriding the file's
        #[arg(long)]
        modes: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Entanglement computations on quantum covariance matrices
    Entangle {
        file: String,
        /// One of: eof, squashed, monogamy, additivity
        action: String,
        /// Second QCM file for `additivity`
        #[arg(long)]
        other: Option<String>,
        /// Optimizer config JSON
        #[arg(long)]
        config: Option<String>,
        /// Optimizer seed (overrides the config's)
        #[arg(long)]
        seed: Option<u64>,
        /// Mode structure `A=1,B=1` overriding the file's
        #[arg(long)]
        modes: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Seeded randomized property suites
    Verify {
        /// One of: classical, quantum, recovery, entanglement, all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances per suite
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Monte Carlo samples per sampled instance
        #[arg(long)]
        mc_samples: Option<usize>,
        /// Instances receiving the Monte Carlo treatment
        #[arg(long)]
        mc_instances: Option<usize>,
        /// Report file (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
        /// Optimizer config JSON for the entanglement suite
        #[arg(long)]
        config: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Info {
            file,
            blocks,
            json,
            csv,
        } => commands::cmd_info(file, blocks, *json, *csv),
        Command::Saturation {
            file,
            blocks,
            tol,
            emit_recovered,
            json,
            csv,
        } => commands::cmd_saturation(
            file,
            blocks.as_deref(),
            *tol,
            emit_recovered.as_deref(),
            *json,
            *csv,
        ),
        Command::Qcm {
            file,
            action,
            party,
            seed_file,
            out,
            modes,
            json,
            csv,
        } => commands::cmd_qcm(
            file,
            action,
            party.as_deref(),
            seed_file.as_deref(),
            out.as_deref(),
            modes.as_deref(),
            *json,
            *csv,
        ),
        Command::Entangle {
            file,
            action,
            other,
            config,
            seed,
            modes,
            json,
            csv,
        } => commands::cmd_entangle(
            file,
            action,
            other.as_deref(),
            config.as_deref(),
            *seed,
            modes.as_deref(),
            *json,
            *csv,
        ),
        Command::Verify {
            suite,
            seed,
            count,
            mc_samples,
            mc_instances,
            out,
            config,
        } => commands::cmd_verify(
            suite,
            *seed,
            *count,
            *mc_samples,
            *mc_instances,
            out.as_deref(),
            config.as_deref(),
        ),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            match &e {
                CliError::PropertyFailure => eprintln!("error: property failure"),
                CliError::Parse(msg) => eprintln!("error: {msg}"),
                CliError::Math(msg) => eprintln!("error: {msg}"),
            }
            std::process::exit(e.exit_code());
        }
    }
}
