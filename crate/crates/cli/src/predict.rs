use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use liquid_core::heuristic::{trace_paths, write_paths};
use liquid_core::predict::{
    read_results, simple_sim_cells, sweep, write_results, ModelSpec, ResultRow, SweepGrid, SweepOptions,
};
use liquid_core::sph::{Simulation, TrajectoryWriter};
use liquid_core::Exec;
use serde::Serialize;

use crate::inputs::{load_scenes, resolve_spec, SpecArgs};
use crate::manifest::Recorder;
use crate::{Status, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    /// Scene files or directories.
    #[arg(long, num_args = 1.., required = true)]
    pub scenes: Vec<PathBuf>,
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Average over the spec's damping or carry window.
    #[arg(long)]
    pub uncertain: bool,
    /// Record per-cell wall-clock runtimes (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    /// Ignore results already present in the output directory.
    #[arg(long)]
    pub fresh: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value = "predictions")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub scenes: Vec<PathBuf>,
    /// Base spec whose parameters the grid varies (preset name or file).
    #[arg(long, default_value = "water-ife")]
    pub base: String,
    /// Damping values, comma-separated; default 0..=20.
    #[arg(long, value_delimiter = ',')]
    pub zeta_values: Option<Vec<f64>>,
    /// Viscosity values, comma-separated; default 0.01,0.2,2.
    #[arg(long, value_delimiter = ',')]
    pub alpha_values: Option<Vec<f64>>,
    /// Particle counts, comma-separated; default 50.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<usize>>,
    #[arg(long)]
    pub uncertain: bool,
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub fresh: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value = "sweep")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// One scene file.
    #[arg(long)]
    pub scene: PathBuf,
    /// Preset name or spec file.
    #[arg(long, default_value = "water-ife")]
    pub spec: String,
    /// Steps between trajectory samples; default is every 0.02 s.
    #[arg(long)]
    pub every: Option<u64>,
    #[arg(long, default_value = "trajectory")]
    pub out: PathBuf,
}

fn results_name(format: Format) -> &'static str {
    match format {
        Format::Csv => "results.csv",
        Format::Json => "results.json",
    }
}

fn previous_rows(path: &Path, format: Format) -> Result<Vec<ResultRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let rows = match format {
        Format::Csv => read_results(fs::File::open(path)?)?,
        Format::Json => serde_json::from_str(&fs::read_to_string(path)?)?,
    };
    log::info!("resuming from {} rows in {}", rows.len(), path.display());
    Ok(rows)
}

fn write_rows(rec: &mut Recorder, rows: &[ResultRow], format: Format) -> Result<()> {
    let name = results_name(format);
    match format {
        Format::Csv => write_results(rows, fs::File::create(rec.output(name))?)?,
        Format::Json => rec.write(name, serde_json::to_string_pretty(rows)? + "\n")?,
    }
    Ok(())
}

fn evaluate(
    rec: &mut Recorder,
    scenes: &[PathBuf],
    specs: &[ModelSpec],
    opts: SweepOptions,
    fresh: bool,
    format: Format,
) -> Result<Status> {
    let scenes = load_scenes(scenes, rec)?;
    let prev_path = rec.out_dir().join(results_name(format));
    let previous = if fresh {
        Vec::new()
    } else {
        previous_rows(&prev_path, format)?
    };
    let rows = sweep(&scenes, specs, &previous, &opts);
    write_rows(rec, &rows, format)?;
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", rows.len());
    }
    Ok(if failed > 0 { Status::Partial } else { Status::Ok })
}

pub fn run_predict(args: &PredictArgs, exec: Exec) -> Result<Status> {
    let mut rec = Recorder::new(&args.out, "predict", serde_json::to_value(args)?)?;
    let specs = args.spec.resolve(&mut rec)?;
    let opts = SweepOptions {
        uncertain: args.uncertain,
        exec,
        timings: args.timings,
    };
    let status = evaluate(&mut rec, &args.scenes, &specs, opts, args.fresh, args.format)?;
    rec.finish()?;
    Ok(status)
}

pub fn run_sweep(args: &SweepArgs, exec: Exec) -> Result<Status> {
    let mut rec = Recorder::new(&args.out, "sweep", serde_json::to_value(args)?)?;
    let base = resolve_spec(&args.base, Some(&mut rec))?;
    let specs = match &base {
        ModelSpec::Fluid(f) => {
            let mut grid = SweepGrid::default();
            if let Some(v) = &args.zeta_values {
                grid.zeta_values = v.clone();
            }
            if let Some(v) = &args.alpha_values {
                grid.alpha_values = v.clone();
            }
            if let Some(v) = &args.n_values {
                grid.n_values = v.clone();
            }
            grid.cells(f)
        }
        ModelSpec::SimpleSim(h) => {
            if args.zeta_values.is_some() || args.alpha_values.is_some() || args.n_values.is_some() {
                return Err(UsageError("the SimpleSim grid is fixed; drop the value lists".into()).into());
            }
            simple_sim_cells(h)
        }
        ModelSpec::Gravity { .. } => {
            return Err(UsageError("the gravity heuristic has no parameters to sweep".into()).into())
        }
    };
    for s in &specs {
        s.validate()?;
    }
    log::info!("sweeping {} parameter settings", specs.len());
    let opts = SweepOptions {
        uncertain: args.uncertain,
        exec,
        timings: args.timings,
    };
    let status = evaluate(&mut rec, &args.scenes, &specs, opts, args.fresh, args.format)?;
    rec.finish()?;
    Ok(status)
}

/// Writes a particle trajectory for the fluid models, or traced paths for
/// the heuristics.
pub fn run_simulate(args: &SimulateArgs, exec: Exec) -> Result<Status> {
    let mut rec = Recorder::new(&args.out, "simulate", serde_json::to_value(args)?)?;
    let scenes = load_scenes(std::slice::from_ref(&args.scene), &mut rec)?;
    let scene = &scenes[0].1;
    let spec = resolve_spec(&args.spec, Some(&mut rec))?;
    match &spec {
        ModelSpec::Fluid(f) => {
            let every = args.every.unwrap_or_else(|| (0.02 / f.dt).round().max(1.0) as u64);
            let file = fs::File::create(rec.output("trajectory.csv"))?;
            let mut writer = TrajectoryWriter::new(std::io::BufWriter::new(file))?;
            let mut sim = Simulation::new(scene, f)?;
            let mut write_err = None;
            let outcome = sim.run_observed(Some(every), |s| {
                if write_err.is_none() {
                    write_err = writer.record(s).err();
                }
            });
            if let Some(e) = write_err {
                return Err(e.into());
            }
            writer.finish()?;
            if let Err(e) = outcome {
                rec.finish()?;
                log::error!("simulation stopped: {e}");
                return Ok(Status::Partial);
            }
            log::info!("simulated {:.3} s in {} steps", sim.state().time, sim.state().steps);
        }
        ModelSpec::SimpleSim(h) => {
            let paths = trace_paths(scene, h, h.carry, exec)?;
            write_paths(&paths, fs::File::create(rec.output("paths.csv"))?)?;
        }
        ModelSpec::Gravity { n_paths } => {
            let h = liquid_core::heuristic::HeuristicSpec {
                n_paths: *n_paths,
                ..Default::default()
            };
            let paths = trace_paths(scene, &h, 0.0, exec)?;
            write_paths(&paths, fs::File::create(rec.output("paths.csv"))?)?;
        }
    }
    rec.finish().context("writing manifest")?;
    Ok(Status::Ok)
}
