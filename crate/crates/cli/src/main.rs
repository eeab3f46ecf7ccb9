//! `qofc`: builds comb states and writes nullifier tables, phase scans,
//! vLF reports, wire listings and imbalance sweeps as CSV or JSON.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, Overrides, Storage};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qofc", version, about = "Dual-rail quantum wires in an OPO frequency comb")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Squeezing parameter of both pumps
    #[arg(long, global = true, allow_hyphen_values = true)]
    r: Option<f64>,

    /// Pump imbalance: r_z = r + epsilon, r_y = r - epsilon
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pz: Option<i64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    py: Option<i64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    nmin: Option<i64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    nmax: Option<i64>,

    /// Detector dark noise relative to shot noise, in dB [default: -13]
    #[arg(long = "dark-db", global = true, allow_hyphen_values = true)]
    dark_db: Option<f64>,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            format: self.format,
            r: self.r,
            epsilon: self.epsilon,
            p_z: self.pz,
            p_y: self.py,
            n_min: self.nmin,
            n_max: self.nmax,
            dark_db: self.dark_db,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the wires and their graph edges
    Wires,
    /// Beam-splitter nullifier table per wire, plus graph nullifiers
    Nullifiers {
        /// Also write the full covariance matrix
        #[arg(long)]
        covariance: bool,
    },
    /// Balanced-homodyne trace over the LO phase
    Scan,
    /// van Loock-Furusawa inseparability report
    Vlf,
    /// First-order imbalance sweep over epsilon
    Imperfect,
    /// Build a large comb and evaluate every nullifier
    Bench {
        #[arg(long, value_enum)]
        storage: Option<Storage>,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        allow_large_dense: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let imperfect = matches!(cli.command, Command::Imperfect);
    let mut cfg = config::load(cli.global.config.as_deref(), &cli.global.overrides(), imperfect)?;
    match cli.command {
        Command::Wires => commands::wires(&cfg),
        Command::Nullifiers { covariance } => commands::nullifiers(&cfg, covariance),
        Command::Scan => commands::scan(&cfg),
        Command::Vlf => commands::vlf(&cfg),
        Command::Imperfect => commands::imperfect(&cfg),
        Command::Bench { storage, modes, allow_large_dense } => {
            if let Some(s) = storage {
                cfg.build.policy = s.into();
            }
            if let Some(m) = modes {
                config::check_bench_modes(m)?;
                cfg.bench_modes = m;
            }
            cfg.build.allow_large_dense |= allow_large_dense;
            commands::bench(&cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e);
            ExitCode::from(e.exit_code())
        }
    }
}
