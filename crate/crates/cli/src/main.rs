//! `liquid`: scene generation, simulation, prediction, sweeps and analysis.

mod analyze;
mod inputs;
mod manifest;
mod predict;
mod scene_gen;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use liquid_core::Exec;

#[derive(Parser)]
#[command(name = "liquid", version, about = "Particle-based liquid outcome prediction")]
struct Cli {
    /// Worker threads; 1 runs everything sequentially, 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (and optionally filter or contrastively select) scenes.
    SceneGen(scene_gen::SceneGenArgs),
    /// Run one scene and dump the particle trajectory or traced paths.
    Simulate(predict::SimulateArgs),
    /// Judgments for every scene under each given spec.
    Predict(predict::PredictArgs),
    /// Judgments over a parameter grid around a base spec.
    Sweep(predict::SweepArgs),
    /// Correlation, reliability and variance tables from results.
    Analyze(analyze::AnalyzeArgs),
    /// List the shipped presets, or print one.
    Presets { name: Option<String> },
    /// Check a directory's outputs against its manifest.
    VerifyManifest { dir: PathBuf },
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some cells or runs failed; the rest were written.
    Partial,
}

/// Invalid flags or arguments; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<UsageError>()
            || matches!(
                c.downcast_ref::<liquid_core::Error>(),
                Some(liquid_core::Error::InvalidSpec(_) | liquid_core::Error::Parse { .. })
            )
    })
}

fn configure_pool(jobs: usize) -> Result<Exec> {
    if jobs == 1 {
        return Ok(Exec::Sequential);
    }
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    Ok(Exec::Parallel)
}

fn run(cli: Cli) -> Result<Status> {
    let exec = configure_pool(cli.jobs)?;
    match cli.command {
        Command::SceneGen(a) => scene_gen::run(&a, exec),
        Command::Simulate(a) => predict::run_simulate(&a, exec),
        Command::Predict(a) => predict::run_predict(&a, exec),
        Command::Sweep(a) => predict::run_sweep(&a, exec),
        Command::Analyze(a) => analyze::run(&a, exec),
        Command::Presets { name: None } => {
            for n in liquid_core::predict::preset_names() {
                println!("{n}");
            }
            Ok(Status::Ok)
        }
        Command::Presets { name: Some(n) } => {
            let spec = liquid_core::predict::preset(&n)?;
            println!("{}", serde_json::to_string_pretty(&spec)?);
            Ok(Status::Ok)
        }
        Command::VerifyManifest { dir } => {
            let bad = manifest::verify(&dir)?;
            for b in &bad {
                eprintln!("{b}");
            }
            Ok(if bad.is_empty() { Status::Ok } else { Status::Partial })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLUID_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
