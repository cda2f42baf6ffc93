use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use lyman_cli::run::{load_config, run, RunOptions};

/// Runs one configured computation and writes a CSV plus a `.meta` sidecar.
#[derive(Debug, Parser)]
#[command(name = "lyman", version)]
struct Args {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Spectral-constant cache; overrides `cache` in the config.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads for scans (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Log progress; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(args: &Args) -> anyhow::Result<u8> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    let (cfg, text) = load_config(&args.config)?;
    let outcome = run(
        &cfg,
        &text,
        &RunOptions {
            out: args.out.clone(),
            cache: args.cache.clone(),
        },
    )?;
    for line in &outcome.report {
        println!("{line}");
    }
    Ok(outcome.exit_code() as u8)
}
