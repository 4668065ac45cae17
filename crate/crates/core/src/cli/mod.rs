//! Configuration-driven pipelines behind the `kspace-forge` binary.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error,
//! 3 numerical non-convergence, 4 infeasible design.

pub mod config;
pub mod design;
pub mod report;
pub mod selftest;
pub mod simulate;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::Config;
pub use design::{cmd_design, run_design, Descriptor, DesignOutput};
pub use report::cmd_report;
pub use selftest::cmd_selftest;
pub use simulate::{cmd_simulate, run_simulate, SimReport};

use crate::error::Error;

pub const THREADS_ENV: &str = "KSPACE_FORGE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parse { .. } | Error::Json(_) => EXIT_CONFIG,
        Error::NonConvergence(_) => EXIT_NON_CONVERGENCE,
        Error::Infeasible(_) | Error::TooCoarse { .. } => EXIT_INFEASIBLE,
        _ => EXIT_FAILURE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "kspace-forge", version, about = "Admissible variable-density k-space trajectory design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a trajectory and write its bundle.
    Design(RunArgs),
    /// Design, undersample an image and reconstruct it.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// PGM or raw `.f64` image; the Shepp-Logan phantom when omitted.
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// Tabulate and plot one or more bundles.
    Report {
        #[arg(required = true)]
        bundles: Vec<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// Quick numerical self-checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(args: &RunArgs) -> crate::Result<Config> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Applies the thread cap from `KSPACE_FORGE_THREADS`, if set.
pub fn init_threads() -> crate::Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config(THREADS_ENV, format!("expected a positive integer, got {v:?}")))?;
    // Fails only if a pool already exists, in which case the cap is moot.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command and maps the outcome to a process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = init_threads().and_then(|_| match cli.command {
        Command::Design(args) => {
            let cfg = load_config(&args)?;
            let d = cmd_design(&cfg, &args.out)?;
            Ok(if d.non_converged() { EXIT_NON_CONVERGENCE } else { EXIT_OK })
        }
        Command::Simulate { run, image } => {
            let cfg = load_config(&run)?;
            let s = cmd_simulate(&cfg, image.as_deref(), &run.out)?;
            Ok(if s.design.non_converged() { EXIT_NON_CONVERGENCE } else { EXIT_OK })
        }
        Command::Report { bundles, out } => {
            cmd_report(&bundles, &out)?;
            Ok(EXIT_OK)
        }
        Command::Selftest { seed } => Ok(if cmd_selftest(seed)? { EXIT_OK } else { EXIT_FAILURE }),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
