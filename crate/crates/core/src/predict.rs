//! Judgments from every model family, damping-window averaging, presets and
//! resumable parameter sweeps.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::heuristic::{self, HeuristicSpec, CARRY_GRID, NOISE_GRID};
use crate::scene::{scene_to_json, Scene};
use crate::sph::{self, FluidModel, FluidSpec, SimState};

/// Outcome of one prediction. For window averages the counts are pooled
/// over every run in the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub j: f64,
    pub n_right_or_in: u64,
    pub n_total: u64,
    pub n_stuck: u64,
    /// Number of runs pooled.
    pub window: usize,
    pub model_id: String,
    pub params: ModelSpec,
}

impl Judgment {
    pub fn from_counts(hits: u64, total: u64, stuck: u64, window: usize, params: ModelSpec) -> Judgment {
        Judgment {
            j: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
            n_right_or_in: hits,
            n_total: total,
            n_stuck: stuck,
            window,
            model_id: params.model_id().to_string(),
            params,
        }
    }

    /// Pools several judgments of equal-sized runs; `j` is then the mean of
    /// the individual fractions.
    pub fn pool(parts: &[Judgment], params: ModelSpec) -> Judgment {
        let sum = |f: fn(&Judgment) -> u64| parts.iter().map(f).sum::<u64>();
        Judgment::from_counts(
            sum(|j| j.n_right_or_in),
            sum(|j| j.n_total),
            sum(|j| j.n_stuck),
            parts.iter().map(|j| j.window).sum(),
            params,
        )
    }
}

/// Counts the particles of a finished run that scored, and those left at
/// rest on an obstacle or above the basins. Particles still moving are
/// judged by where they are.
pub fn judge(state: &SimState, scene: &Scene, settle_speed: f64) -> (u64, u64, u64) {
    let top = scene.bottom.basin_top();
    let mut hits = 0;
    let mut stuck = 0;
    for p in &state.particles {
        let resting = p.velocity.length() < settle_speed;
        if resting && (p.on_obstacle || p.position.y > top) {
            stuck += 1;
        } else if scene.bottom.scores(p.position) {
            hits += 1;
        }
    }
    (hits, state.particles.len() as u64, stuck)
}

/// Any model family's configuration. Serialized as a flat JSON object
/// whose `model` field selects the family.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Fluid(FluidSpec),
    SimpleSim(HeuristicSpec),
    Gravity { n_paths: usize },
}

impl ModelSpec {
    pub fn model_id(&self) -> &'static str {
        match self {
            ModelSpec::Fluid(f) => match f.model {
                FluidModel::Ife => "ife",
                FluidModel::Marble => "marble",
            },
            ModelSpec::SimpleSim(_) => "simplesim",
            ModelSpec::Gravity { .. } => "gravity",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Fluid(f) => f.validate(),
            ModelSpec::SimpleSim(h) => h.validate(),
            ModelSpec::Gravity { n_paths } if *n_paths < 1 => {
                Err(Error::InvalidSpec("n_paths must be at least 1".into()))
            }
            ModelSpec::Gravity { .. } => Ok(()),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            ModelSpec::Fluid(f) => serde_json::to_value(f).expect("spec serializes"),
            ModelSpec::SimpleSim(h) => {
                let mut v = serde_json::to_value(h).expect("spec serializes");
                v["model"] = Value::from("simplesim");
                v
            }
            ModelSpec::Gravity { n_paths } => serde_json::json!({ "model": "gravity", "n_paths": n_paths }),
        }
    }

    pub fn from_value(mut v: Value) -> Result<ModelSpec> {
        let parse = |e| Error::Parse {
            what: "model spec".into(),
            source: e,
        };
        let model = v
            .get("model")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidSpec("spec needs a string `model` field".into()))?
            .to_string();
        let spec = match model.as_str() {
            "ife" | "marble" => ModelSpec::Fluid(serde_json::from_value(v).map_err(parse)?),
            "simplesim" => {
                v.as_object_mut().map(|o| o.remove("model"));
                ModelSpec::SimpleSim(serde_json::from_value(v).map_err(parse)?)
            }
            "gravity" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct Gravity {
                    #[allow(dead_code)]
                    model: String,
                    #[serde(default = "hundred")]
                    n_paths: usize,
                }
                fn hundred() -> usize {
                    100
                }
                let g: Gravity = serde_json::from_value(v).map_err(parse)?;
                ModelSpec::Gravity { n_paths: g.n_paths }
            }
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown model `{other}` (expected ife, marble, simplesim or gravity)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<ModelSpec> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "model spec".into(),
            source: e,
        })?;
        ModelSpec::from_value(v)
    }

    /// Canonical JSON text (sorted keys, no whitespace).
    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    /// Half-width of the averaging window in the spec's own parameter.
    pub fn window_width(&self) -> f64 {
        match self {
            ModelSpec::Fluid(f) => f.sigma,
            ModelSpec::SimpleSim(h) => h.sigma_m,
            ModelSpec::Gravity { .. } => 0.0,
        }
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ModelSpec::from_value(v).map_err(serde::de::Error::custom)
    }
}

const PRESETS: &[(&str, &str)] = &[
    ("water-ife", include_str!("../presets/water-ife.json")),
    ("honey1-ife-exp1", include_str!("../presets/honey1-ife-exp1.json")),
    ("honey1-ife-exp2", include_str!("../presets/honey1-ife-exp2.json")),
    ("honey2-ife-exp1", include_str!("../presets/honey2-ife-exp1.json")),
    ("honey2-ife-exp2", include_str!("../presets/honey2-ife-exp2.json")),
    ("water-marble", include_str!("../presets/water-marble.json")),
    ("honey-marble", include_str!("../presets/honey-marble.json")),
    ("ground-truth-water", include_str!("../presets/ground-truth-water.json")),
    (
        "ground-truth-honey-exp1",
        include_str!("../presets/ground-truth-honey-exp1.json"),
    ),
    (
        "ground-truth-honey-exp2",
        include_str!("../presets/ground-truth-honey-exp2.json"),
    ),
    (
        "honey1-ife-exp1-swapped",
        include_str!("../presets/honey1-ife-exp1-swapped.json"),
    ),
    (
        "honey1-ife-exp2-swapped",
        include_str!("../presets/honey1-ife-exp2-swapped.json"),
    ),
    (
        "honey2-ife-exp1-swapped",
        include_str!("../presets/honey2-ife-exp1-swapped.json"),
    ),
    (
        "honey2-ife-exp2-swapped",
        include_str!("../presets/honey2-ife-exp2-swapped.json"),
    ),
    (
        "ground-truth-honey-exp1-swapped",
        include_str!("../presets/ground-truth-honey-exp1-swapped.json"),
    ),
    (
        "ground-truth-honey-exp2-swapped",
        include_str!("../presets/ground-truth-honey-exp2-swapped.json"),
    ),
    ("water-simplesim", include_str!("../presets/water-simplesim.json")),
    ("honey-simplesim", include_str!("../presets/honey-simplesim.json")),
    ("gravity", include_str!("../presets/gravity.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<ModelSpec> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        Error::InvalidSpec(format!(
            "unknown preset `{name}`; known presets: {}",
            preset_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    ModelSpec::from_json(text)
}

/// Damping values of a window: `zeta - sigma ..= zeta + sigma` in steps of
/// one, dropping negative values.
pub fn zeta_window(zeta: f64, sigma: f64) -> Result<Vec<f64>> {
    if sigma.fract() != 0.0 || sigma < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "sigma must be a non-negative whole number on the damping grid, got {sigma}"
        )));
    }
    let k = sigma as i64;
    Ok((-k..=k).map(|i| zeta + i as f64).filter(|&z| z >= 0.0).collect())
}

/// Single run of the spec with its averaging window ignored.
pub fn deterministic_predict(scene: &Scene, spec: &ModelSpec) -> Result<Judgment> {
    spec.validate()?;
    match spec {
        ModelSpec::Fluid(f) => {
            let state = sph::run_simulation(scene, f)?;
            let (hits, total, stuck) = judge(&state, scene, f.settle_speed);
            Ok(Judgment::from_counts(hits, total, stuck, 1, spec.clone()))
        }
        ModelSpec::SimpleSim(h) => heuristic::simple_sim_predict(
            scene,
            &HeuristicSpec {
                sigma_m: 0.0,
                ..h.clone()
            },
        )
        .map(|j| Judgment {
            params: spec.clone(),
            ..j
        }),
        ModelSpec::Gravity { n_paths } => heuristic::gravity_heuristic_predict_n(scene, *n_paths),
    }
}

/// Deterministic judgments for every member of the spec's window, in order.
pub fn window_judgments(scene: &Scene, spec: &ModelSpec, exec: Exec) -> Result<Vec<Judgment>> {
    spec.validate()?;
    let members: Vec<ModelSpec> = match spec {
        ModelSpec::Fluid(f) => zeta_window(f.zeta, f.sigma)?
            .into_iter()
            .map(|z| {
                ModelSpec::Fluid(FluidSpec {
                    sigma: 0.0,
                    ..f.with_zeta(z)
                })
            })
            .collect(),
        ModelSpec::SimpleSim(h) => h
            .carry_window()
            .into_iter()
            .map(|m| {
                ModelSpec::SimpleSim(HeuristicSpec {
                    carry: m,
                    sigma_m: 0.0,
                    ..h.clone()
                })
            })
            .collect(),
        ModelSpec::Gravity { .. } => vec![spec.clone()],
    };
    exec.map(&members, |m| deterministic_predict(scene, m))
        .into_iter()
        .collect()
}

/// Mean judgment over the spec's window; identical to
/// [`deterministic_predict`] when the window width is zero.
pub fn uncertain_predict(scene: &Scene, spec: &ModelSpec) -> Result<Judgment> {
    uncertain_predict_with(scene, spec, Exec::Sequential)
}

pub fn uncertain_predict_with(scene: &Scene, spec: &ModelSpec, exec: Exec) -> Result<Judgment> {
    if spec.window_width() == 0.0 {
        return deterministic_predict(scene, spec);
    }
    let parts = window_judgments(scene, spec, exec)?;
    Ok(Judgment::pool(&parts, spec.clone()))
}

pub fn predict(scene: &Scene, spec: &ModelSpec, uncertain: bool, exec: Exec) -> Result<Judgment> {
    if uncertain {
        uncertain_predict_with(scene, spec, exec)
    } else {
        deterministic_predict(scene, spec)
    }
}

/// Parameter grid for particle-model sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub zeta_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub n_values: Vec<usize>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            zeta_values: (0..=20).map(f64::from).collect(),
            alpha_values: vec![0.01, 0.2, 2.0],
            n_values: vec![50],
        }
    }
}

impl SweepGrid {
    /// Every (n, alpha, zeta) combination applied to `base`, in that
    /// nesting order. Marble specs ignore the alpha axis.
    pub fn cells(&self, base: &FluidSpec) -> Vec<ModelSpec> {
        let alphas = if base.model == FluidModel::Marble {
            vec![0.0]
        } else {
            self.alpha_values.clone()
        };
        let mut out = Vec::new();
        for &n in &self.n_values {
            for &alpha in &alphas {
                for &zeta in &self.zeta_values {
                    out.push(ModelSpec::Fluid(FluidSpec {
                        n_particles: n,
                        alpha,
                        zeta,
                        ..base.clone()
                    }));
                }
            }
        }
        out
    }
}

/// The 11 x 11 noise-by-carry grid applied to `base`.
pub fn simple_sim_cells(base: &HeuristicSpec) -> Vec<ModelSpec> {
    NOISE_GRID
        .iter()
        .flat_map(|&g| {
            CARRY_GRID.iter().map(move |&m| {
                ModelSpec::SimpleSim(HeuristicSpec {
                    g_noise: g,
                    carry: m,
                    ..base.clone()
                })
            })
        })
        .collect()
}

/// One results-table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scene_id: String,
    pub model_id: String,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub zeta: Option<f64>,
    pub sigma: Option<f64>,
    pub sticky: Option<bool>,
    pub g: Option<f64>,
    pub carry: Option<f64>,
    pub j: Option<f64>,
    pub n_stuck: Option<u64>,
    pub runtime_ms: u64,
    /// Content hash of the scene, spec and averaging mode.
    pub key: String,
    pub error: Option<String>,
}

impl ResultRow {
    fn new(scene_id: &str, spec: &ModelSpec, uncertain: bool, key: String) -> ResultRow {
        let mut r = ResultRow {
            scene_id: scene_id.to_string(),
            model_id: spec.model_id().to_string(),
            n: None,
            alpha: None,
            zeta: None,
            sigma: None,
            sticky: None,
            g: None,
            carry: None,
            j: None,
            n_stuck: None,
            runtime_ms: 0,
            key,
            error: None,
        };
        match spec {
            ModelSpec::Fluid(f) => {
                r.n = Some(f.n_particles);
                if f.model == FluidModel::Ife {
                    r.alpha = Some(f.alpha);
                }
                r.zeta = Some(f.zeta);
                r.sigma = Some(if uncertain { f.sigma } else { 0.0 });
                r.sticky = Some(f.sticky.is_some());
            }
            ModelSpec::SimpleSim(h) => {
                r.n = Some(h.n_paths);
                r.sigma = Some(if uncertain { h.sigma_m } else { 0.0 });
                r.g = Some(h.g_noise);
                r.carry = Some(h.carry);
            }
            ModelSpec::Gravity { n_paths } => {
                r.n = Some(*n_paths);
                r.sigma = Some(0.0);
                r.g = Some(0.0);
                r.carry = Some(0.0);
            }
        }
        r
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.j.is_some()
    }
}

/// Cache key of one cell.
pub fn cell_key(scene: &Scene, spec: &ModelSpec, uncertain: bool) -> String {
    let mut h = Sha256::new();
    h.update(scene_to_json(scene).as_bytes());
    h.update(b"\n");
    h.update(spec.to_json().as_bytes());
    h.update(if uncertain { b"\nuncertain" } else { b"\nsingle   " });
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub uncertain: bool,
    pub exec: Exec,
    /// Record wall-clock runtimes; otherwise `runtime_ms` is 0 so that
    /// repeated sweeps produce identical tables.
    pub timings: bool,
}

/// Evaluates every (scene, spec) cell. Successful rows of `previous` whose
/// key matches are reused; failures are recorded in the row, never raised.
/// Rows come back in scene-major, spec-minor order.
pub fn sweep(
    scenes: &[(String, Scene)],
    specs: &[ModelSpec],
    previous: &[ResultRow],
    opts: &SweepOptions,
) -> Vec<ResultRow> {
    let done: HashMap<&str, &ResultRow> = previous
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| (r.key.as_str(), r))
        .collect();
    let cells: Vec<(usize, usize)> = (0..scenes.len())
        .flat_map(|s| (0..specs.len()).map(move |m| (s, m)))
        .collect();
    opts.exec.map(&cells, |&(si, mi)| {
        let (id, scene) = &scenes[si];
        let spec = &specs[mi];
        let key = cell_key(scene, spec, opts.uncertain);
        if let Some(r) = done.get(key.as_str()) {
            return ResultRow {
                scene_id: id.clone(),
                ..(*r).clone()
            };
        }
        let mut row = ResultRow::new(id, spec, opts.uncertain, key);
        let t0 = Instant::now();
        match predict(scene, spec, opts.uncertain, Exec::Sequential) {
            Ok(j) => {
                row.j = Some(j.j);
                row.n_stuck = Some(j.n_stuck);
            }
            Err(e) => {
                log::warn!("scene {id}, {} cell failed: {e}", spec.model_id());
                row.error = Some(e.to_string());
            }
        }
        if opts.timings {
            row.runtime_ms = t0.elapsed().as_millis() as u64;
        }
        row
    })
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "scene_id",
            "model_id",
            "n",
            "alpha",
            "zeta",
            "sigma",
            "sticky",
            "g",
            "carry",
            "j",
            "n_stuck",
            "runtime_ms",
            "key",
            "error",
        ])?;
    }
    w.flush().map_err(|e| Error::io("results", e))
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    for needed in ["scene_id", "model_id", "j", "key"] {
        if !headers.iter().any(|h| h == needed) {
            return Err(Error::Data(format!("results file lacks a `{needed}` column")));
        }
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}
