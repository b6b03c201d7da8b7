use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nehari_fp_cli::run::EXIT_IO;
use nehari_fp_cli::{load_config, run, Command};

const THREADS_ENV: &str = "NEHARI_FP_THREADS";

#[derive(Parser)]
#[command(
    name = "nehari-fp",
    version,
    about = "Fixed points of Hammerstein integral systems on a Nehari-type set"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Problem configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sampling seed; overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Panel count; overrides `[grid] n`.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Check the hypotheses and write report.json (exit 2 if any fails).
    Verify,
    /// Solve with the configured method (exit 3 if not converged).
    Solve,
    /// Homotopy continuation from (0, omega) (exit 3 if not converged).
    Continue,
    /// Enumerate fixed points on a grid of at most 5 nodes.
    Oracle,
    /// Run the built-in invariant checks.
    Selftest,
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32> {
    configure_threads()?;
    let command = match cli.command {
        Cmd::Verify => Command::Verify,
        Cmd::Solve => Command::Solve,
        Cmd::Continue => Command::Continue,
        Cmd::Oracle => Command::Oracle,
        Cmd::Selftest => Command::Selftest,
    };
    let (cfg, base_dir) = match &cli.config {
        Some(path) => {
            let mut cfg = load_config(path)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(n) = cli.grid_n {
                cfg.grid.n = n;
                cfg.build_grid().context("--grid-n")?;
            }
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            (Some(cfg), base)
        }
        None => (None, PathBuf::from(".")),
    };
    let out = cli
        .out
        .or_else(|| {
            cfg.as_ref()
                .and_then(|c| c.output_dir.as_ref().map(|d| base_dir.join(d)))
        })
        .or_else(|| (command != Command::Selftest).then(|| PathBuf::from("out")));
    run(command, cfg.as_ref(), &base_dir, out.as_deref())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO as u8)
        }
    }
}
