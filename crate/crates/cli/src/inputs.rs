use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use liquid_core::predict::{preset, ModelSpec};
use liquid_core::scene::{load_scene, Scene};
use liquid_core::sph::Sticky;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::manifest::{Recorder, MANIFEST_FILE};
use crate::UsageError;

pub const INDEX_FILE: &str = "index.json";

/// Listing written by `scene-gen` next to the scene files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneIndex {
    pub style: String,
    pub manifest: String,
    pub scenes: Vec<IndexEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub file: String,
    pub seed: u64,
}

/// Expands scene arguments into (id, path) pairs. A directory contributes
/// the scenes listed in its index, or every JSON file other than the index
/// and manifest when it has none.
pub fn scene_paths(args: &[PathBuf]) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for arg in args {
        if arg.is_dir() {
            let index = arg.join(INDEX_FILE);
            if index.exists() {
                let idx: SceneIndex = serde_json::from_str(&fs::read_to_string(&index)?)
                    .with_context(|| format!("parsing {}", index.display()))?;
                out.extend(idx.scenes.into_iter().map(|e| (e.id, arg.join(e.file))));
            } else {
                let mut files: Vec<PathBuf> = fs::read_dir(arg)
                    .with_context(|| format!("listing {}", arg.display()))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|e| e == "json"))
                    .filter(|p| !p.ends_with(INDEX_FILE) && !p.ends_with(MANIFEST_FILE))
                    .collect();
                files.sort();
                out.extend(files.into_iter().map(|p| (stem(&p), p)));
            }
        } else if arg.exists() {
            out.push((stem(arg), arg.clone()));
        } else {
            return Err(UsageError(format!("no such scene file or directory: {}", arg.display())).into());
        }
    }
    if out.is_empty() {
        return Err(UsageError("no scenes given".into()).into());
    }
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn load_scenes(args: &[PathBuf], rec: &mut Recorder) -> Result<Vec<(String, Scene)>> {
    scene_paths(args)?
        .into_iter()
        .map(|(id, path)| {
            rec.input(&path)?;
            let scene = load_scene(&path)?;
            Ok((id, scene))
        })
        .collect()
}

/// A preset name or a path to a spec file.
pub fn resolve_spec(name: &str, rec: Option<&mut Recorder>) -> Result<ModelSpec> {
    let path = Path::new(name);
    if path.is_file() {
        if let Some(rec) = rec {
            rec.input(path)?;
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
        return ModelSpec::from_json(&text).with_context(|| format!("spec file {name}"));
    }
    Ok(preset(name)?)
}

/// Model selection shared by the predict-style commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SpecArgs {
    /// Shipped parameter preset; repeatable.
    #[arg(long = "preset")]
    pub presets: Vec<String>,
    /// JSON spec file with a `model` field; repeatable.
    #[arg(long = "spec")]
    pub spec_files: Vec<PathBuf>,
    /// Build a spec from flags: ife, marble, simplesim or gravity.
    #[arg(long)]
    pub model: Option<String>,
    /// Particle count, or path count for the tracers.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Use default obstacle stickiness.
    #[arg(long)]
    pub sticky: bool,
    /// Simulated seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Probability of tracing against gravity.
    #[arg(long)]
    pub g: Option<f64>,
    /// Carry distance past obstacle edges, meters.
    #[arg(long)]
    pub carry: Option<f64>,
    /// Half-width of the carry window, meters.
    #[arg(long = "sigma-m")]
    pub sigma_m: Option<f64>,
}

impl SpecArgs {
    pub fn resolve(&self, rec: &mut Recorder) -> Result<Vec<ModelSpec>> {
        let mut specs = Vec::new();
        for p in &self.presets {
            specs.push(preset(p)?);
        }
        for f in &self.spec_files {
            specs.push(resolve_spec(&f.to_string_lossy(), Some(&mut *rec))?);
        }
        if let Some(m) = &self.model {
            specs.push(self.spec_from_flags(m)?);
        } else if self.has_model_flags() {
            return Err(UsageError("model parameter flags need --model".into()).into());
        }
        if specs.is_empty() {
            return Err(UsageError("give at least one of --preset, --spec or --model".into()).into());
        }
        Ok(specs)
    }

    fn has_model_flags(&self) -> bool {
        self.n.is_some()
            || self.alpha.is_some()
            || self.zeta.is_some()
            || self.sigma.is_some()
            || self.sticky
            || self.duration.is_some()
            || self.g.is_some()
            || self.carry.is_some()
            || self.sigma_m.is_some()
    }

    fn spec_from_flags(&self, model: &str) -> Result<ModelSpec> {
        let mut o = Map::new();
        o.insert("model".into(), model.into());
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                o.insert(k.into(), v);
            }
        };
        match model {
            "ife" | "marble" => {
                for (flag, set) in [
                    ("--g", self.g.is_some()),
                    ("--carry", self.carry.is_some()),
                    ("--sigma-m", self.sigma_m.is_some()),
                ] {
                    if set {
                        bail!(UsageError(format!("{flag} does not apply to --model {model}")));
                    }
                }
                put("n_particles", Some(self.n.unwrap_or(50).into()));
                put(
                    "alpha",
                    Some(self.alpha.unwrap_or(if model == "ife" { 0.01 } else { 0.0 }).into()),
                );
                put("zeta", Some(self.zeta.unwrap_or(0.0).into()));
                put("sigma", self.sigma.map(Value::from));
                put("duration", self.duration.map(Value::from));
                if self.sticky {
                    put("sticky", Some(serde_json::to_value(Sticky::default())?));
                }
            }
            "simplesim" | "gravity" => {
                for (flag, set) in [
                    ("--alpha", self.alpha.is_some()),
                    ("--zeta", self.zeta.is_some()),
                    ("--sigma", self.sigma.is_some()),
                    ("--sticky", self.sticky),
                    ("--duration", self.duration.is_some()),
                ] {
                    if set {
                        bail!(UsageError(format!("{flag} does not apply to --model {model}")));
                    }
                }
                put("n_paths", self.n.map(Value::from));
                if model == "simplesim" {
                    put("g_noise", Some(self.g.unwrap_or(0.0).into()));
                    put("carry", Some(self.carry.unwrap_or(0.0).into()));
                    put("sigma_m", self.sigma_m.map(Value::from));
                } else if self.g.is_some() || self.carry.is_some() || self.sigma_m.is_some() {
                    bail!(UsageError(
                        "the gravity heuristic takes no --g, --carry or --sigma-m".into()
                    ));
                }
            }
            other => bail!(UsageError(format!(
                "unknown model `{other}` (expected ife, marble, simplesim or gravity)"
            ))),
        }
        Ok(ModelSpec::from_value(Value::Object(o))?)
    }
}
