use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use liquid_core::scene::{
    filter_scene, generate_shape_scene, generate_voronoi_scene, scene_to_json, select_contrastive_scenes, FilterConfig,
    FilterVerdict, Scene,
};
use liquid_core::Exec;
use serde::Serialize;

use crate::inputs::{resolve_spec, IndexEntry, SceneIndex, INDEX_FILE};
use crate::manifest::{Recorder, MANIFEST_FILE};
use crate::{Status, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    /// Voronoi obstacles over a central divider.
    Voronoi,
    /// Separated shapes over a cup.
    Shapes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SceneGenArgs {
    #[arg(long, value_enum, default_value = "voronoi")]
    pub style: Style,
    /// Number of scenes to write.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// First generator seed; later candidates use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Drop scenes rejected by the coarse probe simulation.
    #[arg(long, value_enum, default_value = "on")]
    pub filter: OnOff,
    /// Two specs (preset names or files); keeps the scenes where their
    /// judgments differ most.
    #[arg(long, num_args = 2, value_names = ["SPEC_A", "SPEC_B"])]
    pub contrastive: Option<Vec<String>>,
    /// Scenes kept by contrastive selection; defaults to --count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Candidate pool size for contrastive selection.
    #[arg(long, default_value_t = 100)]
    pub candidates: usize,
    /// Give up after this many generator seeds per requested scene.
    #[arg(long, default_value_t = 50)]
    pub max_attempts: usize,
    #[arg(long, default_value = "scenes")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ContrastRow {
    id: String,
    seed: u64,
    j_a: f64,
    j_b: f64,
    divergence: f64,
    selected: bool,
}

fn generate(style: Style, seed: u64) -> Result<Scene> {
    Ok(match style {
        Style::Voronoi => generate_voronoi_scene(seed, &Default::default())?,
        Style::Shapes => generate_shape_scene(seed, &Default::default())?,
    })
}

/// Walks seeds upward from `--seed`, skipping rejected scenes, until `count` are found.
fn accepted(args: &SceneGenArgs, count: usize, exec: Exec) -> Result<Vec<Scene>> {
    let config = FilterConfig::default();
    let limit = count.saturating_mul(args.max_attempts).max(1) as u64;
    let mut out = Vec::new();
    let mut next = args.seed;
    // Evaluate in batches so the probe simulations run in parallel while
    // acceptance order stays tied to seed order.
    let batch = 16u64;
    while out.len() < count {
        if next - args.seed >= limit {
            anyhow::bail!("only {} of {count} scenes accepted after {limit} seeds", out.len());
        }
        let seeds: Vec<u64> = (next..next + batch).collect();
        next += batch;
        let results = exec.map(&seeds, |&s| -> Result<Option<Scene>> {
            let scene = generate(args.style, s)?;
            if args.filter == OnOff::Off {
                return Ok(Some(scene));
            }
            match filter_scene(&scene, &config)? {
                FilterVerdict::Accept => Ok(Some(scene)),
                FilterVerdict::Reject(r) => {
                    log::debug!("seed {s} rejected: {r}");
                    Ok(None)
                }
            }
        });
        for r in results {
            if let Some(scene) = r? {
                if out.len() < count {
                    out.push(scene);
                }
            }
        }
    }
    Ok(out)
}

fn scene_id(seed: u64) -> String {
    format!("scene-{seed:06}")
}

pub fn run(args: &SceneGenArgs, exec: Exec) -> Result<Status> {
    if args.count == 0 && args.contrastive.is_none() {
        return Err(UsageError("--count must be at least 1".into()).into());
    }
    if args.contrastive.is_none() && args.k.is_some() {
        return Err(UsageError("--k needs --contrastive".into()).into());
    }
    let mut rec = Recorder::new(&args.out, "scene-gen", serde_json::to_value(args)?)?;
    rec.seed(args.seed);

    let scenes = match &args.contrastive {
        None => accepted(args, args.count, exec)?,
        Some(pair) => {
            let k = args.k.unwrap_or(args.count);
            if k > args.candidates {
                return Err(UsageError(format!("--k {k} exceeds --candidates {}", args.candidates)).into());
            }
            let spec_a = resolve_spec(&pair[0], Some(&mut rec))?;
            let spec_b = resolve_spec(&pair[1], Some(&mut rec))?;
            let pool = accepted(args, args.candidates, exec)?;
            let sel = select_contrastive_scenes(&pool, &spec_a, &spec_b, k, exec)?;
            match sel.correlation {
                Some(r) => log::info!("correlation of the two specs over the selected scenes: {r:.4}"),
                None => log::warn!("correlation over the selected scenes is undefined"),
            }
            log::info!("mean divergence of selected scenes: {:.4}", sel.mean_divergence);
            let rows: Vec<ContrastRow> = pool
                .iter()
                .enumerate()
                .map(|(i, s)| ContrastRow {
                    id: scene_id(s.seed),
                    seed: s.seed,
                    j_a: sel.j_a[i],
                    j_b: sel.j_b[i],
                    divergence: (sel.j_a[i] - sel.j_b[i]).abs(),
                    selected: sel.indices.contains(&i),
                })
                .collect();
            let mut w = csv::Writer::from_path(rec.output("contrastive.csv"))?;
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            let summary = serde_json::json!({
                "selected_correlation": sel.correlation,
                "mean_divergence": sel.mean_divergence,
                "k": k,
                "candidates": pool.len(),
            });
            rec.write("contrastive.json", serde_json::to_string_pretty(&summary)? + "\n")?;
            sel.indices.iter().map(|&i| pool[i].clone()).collect()
        }
    };

    let mut entries = Vec::new();
    for scene in &scenes {
        let id = scene_id(scene.seed);
        let file = format!("{id}.json");
        rec.write(&file, scene_to_json(scene))
            .with_context(|| format!("writing scene {id}"))?;
        entries.push(IndexEntry {
            id,
            file,
            seed: scene.seed,
        });
    }
    let index = SceneIndex {
        style: format!("{:?}", args.style).to_lowercase(),
        manifest: MANIFEST_FILE.to_string(),
        scenes: entries,
    };
    rec.write(INDEX_FILE, serde_json::to_string_pretty(&index)? + "\n")?;
    rec.finish()?;
    log::info!("wrote {} scenes to {}", scenes.len(), args.out.display());
    Ok(Status::Ok)
}
