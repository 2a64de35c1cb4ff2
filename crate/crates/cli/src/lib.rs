//! Command-line experiment runner.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gps", version, about = "Numerical laboratory for the disordered generalized Poland-Scheraga model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; overrides `run.out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; overrides `run.threads`.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Master seed; overrides `model.master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    KernelInfo,
    RenewalValidate,
    IntersectionStats,
    HomogScan,
    QuenchedScan,
    SecondMomentScan,
    Certificate,
    OracleSuite,
}

/// Run one subcommand; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gps: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.model.master_seed = seed;
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        cfg.run.threads = Some(t);
    }
    let out_dir = cli.out.clone().or_else(|| cfg.run.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.run.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;

    let mut out = output::Outputs::new(cfg.hash());
    let result = pool.install(|| match cli.command {
        Command::KernelInfo => commands::kernel_info(&cfg, &mut out),
        Command::RenewalValidate => commands::renewal_validate(&cfg, &mut out),
        Command::IntersectionStats => commands::intersection_stats(&cfg, &mut out),
        Command::HomogScan => commands::homog_scan(&cfg, &mut out),
        Command::QuenchedScan => commands::quenched_scan(&cfg, &mut out),
        Command::SecondMomentScan => commands::second_moment_scan(&cfg, &mut out),
        Command::Certificate => commands::certificate(&cfg, &mut out),
        Command::OracleSuite => commands::oracle_suite(&cfg, &mut out),
    });
    // a failed cross-check still leaves its report behind
    if matches!(result, Ok(()) | Err(CliError::CheckFailed(_))) {
        out.write_all(&out_dir)?;
        for name in out.names() {
            println!("wrote {}", out_dir.join(name).display());
        }
    }
    result
}
