//! `maxlin`: simulation, reconstruction and verification experiments for
//! generalized max-linear models of max-stable and generalized Pareto
//! processes on `[0, 1]`.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::Context;
use crate::config::Loaded;
use crate::error::CliError;
use crate::output::Output;

#[derive(Debug, Parser)]
#[command(name = "maxlin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate SMSP or SGPP paths on the fine grid.
    Simulate(CommonArgs),
    /// Rebuild a process from grid observations.
    Reconstruct(CommonArgs),
    /// Sup-norm reconstruction errors along a sequence of grids.
    Convergence(CommonArgs),
    /// Mean squared errors by quadrature and by Monte Carlo.
    Mse(CommonArgs),
    /// Covariances and conditional GPD moments.
    Moments(CommonArgs),
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 or absent: all available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Simulate(_) => "simulate",
            Self::Reconstruct(_) => "reconstruct",
            Self::Convergence(_) => "convergence",
            Self::Mse(_) => "mse",
            Self::Moments(_) => "moments",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Self::Simulate(a) | Self::Reconstruct(a) | Self::Convergence(a) | Self::Mse(a) | Self::Moments(a) => a,
        }
    }
}

fn run(command: &Command) -> Result<serde_json::Value, CliError> {
    let args = command.args();
    let loaded = Loaded::from_file(&args.config)?;
    let out_dir = match (&args.out, &loaded.config.output_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => loaded.resolve(p),
        (None, None) => PathBuf::from("."),
    };
    let seed = args.seed.or(loaded.config.seed).unwrap_or(0);
    let ctx = Context { loaded, seed };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let mut out = Output::new(&out_dir)?;
    let mut summary = pool.install(|| match command {
        Command::Simulate(_) => commands::simulate(&ctx, &mut out),
        Command::Reconstruct(_) => commands::reconstruct(&ctx, &mut out),
        Command::Convergence(_) => commands::convergence(&ctx, &mut out),
        Command::Mse(_) => commands::mse(&ctx, &mut out),
        Command::Moments(_) => commands::moments(&ctx, &mut out),
    })?;
    summary["files"] = json!(out.files());
    summary["output_dir"] = json!(out_dir.display().to_string());
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let record = json!({
                "schema": config::SCHEMA,
                "command": null,
                "error": { "kind": "usage", "message": e.to_string() },
            });
            eprintln!("{record}");
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    match run(&cli.command) {
        Ok(summary) => {
            println!("{}", json!({ "schema": config::SCHEMA, "command": name, "status": "ok", "summary": summary }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record(name));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
