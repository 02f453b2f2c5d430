//! Command-line front end: configuration-driven experiment runner.
//!
//! Subcommands: `tables` (VRF tables), `curves` (error-vs-paths CSV),
//! `speed` (parallel vs reference timing plus cost-adjusted efficiency),
//! `validate` (oracle/consistency suite). Exit codes: 0 success,
//! 1 validation failure, 2 configuration error.

pub mod config;
pub mod experiment;
pub mod format;
pub mod validate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "qmc-greeks",
    about = "Monte Carlo / quasi-Monte Carlo Greeks engine for exotic options",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Config file with flat `key = value` lines (flags override it).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Paths per run.
    #[arg(long, global = true)]
    pub paths: Option<usize>,

    /// Independent runs per estimate.
    #[arg(long, global = true)]
    pub runs: Option<usize>,

    /// Base seed; the config fully determines the output bytes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Variance-reduction-factor tables (CSV + markdown) per product.
    Tables,
    /// Error-vs-paths curves over the path sweep.
    Curves,
    /// Timing report: parallel engine vs single-worker reference.
    Speed,
    /// Run the oracle and consistency suite.
    Validate,
}

impl Cli {
    /// Resolves the effective configuration: defaults, then the config
    /// file, then flag overrides.
    pub fn resolve_config(&self) -> crate::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = self.paths {
            cfg.paths = p;
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a closure on a dedicated pool of `workers` threads.
pub fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(f)
}

/// Executes a resolved command; returns the process exit code.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> i32 {
    let mp = match cfg.market() {
        Ok(mp) => mp,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let workers = cfg.effective_workers();
    let outcome: crate::Result<i32> = with_pool(workers, || match command {
        Command::Tables => {
            let files = experiment::run_tables(cfg, &mp)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
        Command::Curves => {
            let files = experiment::run_curves(cfg, &mp)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
        Command::Speed => {
            let files = experiment::run_speed(cfg, &mp)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
        Command::Validate => {
            let checks = validate::run_validation(cfg)?;
            let mut failures = 0;
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status}  {} — {}", c.name, c.detail);
                if !c.passed {
                    failures += 1;
                }
            }
            println!(
                "{} checks, {} failed",
                checks.len(),
                failures
            );
            Ok(if failures == 0 { 0 } else { 1 })
        }
    });
    match outcome {
        Ok(code) => code,
        Err(e @ Error::Config(_)) | Err(e @ Error::Validation(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let cfg = match cli.resolve_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    execute(cli.command, &cfg)
}
