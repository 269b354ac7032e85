//! Versioned scene file format: one UTF-8 JSON document per scene.
//!
//! Numbers are written in shortest round-trip form, so every `f64` reloads
//! bit-identically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BottomLayout, LiquidStart, Obstacle, Scene};
use crate::error::{Error, Result};

pub const SCENE_FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct SceneDocRef<'a> {
    version: u64,
    width: f64,
    height: f64,
    seed: u64,
    obstacles: &'a [Obstacle],
    liquid_start: &'a LiquidStart,
    bottom: &'a BottomLayout,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[allow(dead_code)]
    version: u64,
    width: f64,
    height: f64,
    seed: u64,
    obstacles: Vec<Obstacle>,
    liquid_start: LiquidStart,
    bottom: BottomLayout,
}

pub fn scene_to_json(scene: &Scene) -> String {
    let doc = SceneDocRef {
        version: SCENE_FORMAT_VERSION,
        width: scene.width,
        height: scene.height,
        seed: scene.seed,
        obstacles: &scene.obstacles,
        liquid_start: &scene.liquid_start,
        bottom: &scene.bottom,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("scene serialization cannot fail");
    s.push('\n');
    s
}

/// Parses and validates a scene document.
pub fn scene_from_json(text: &str) -> Result<Scene> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        what: "scene document".into(),
        source: e,
    })?;
    let version = value
        .get("version")
        .ok_or_else(|| Error::InvalidScene("missing field `version`".into()))?
        .as_u64()
        .ok_or_else(|| Error::InvalidScene("field `version` must be an unsigned integer".into()))?;
    if version != SCENE_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: SCENE_FORMAT_VERSION,
        });
    }
    // Re-parse from text so serde reports line/column for field errors.
    let doc: SceneDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        what: "scene document".into(),
        source: e,
    })?;
    let scene = Scene {
        width: doc.width,
        height: doc.height,
        seed: doc.seed,
        obstacles: doc.obstacles,
        liquid_start: doc.liquid_start,
        bottom: doc.bottom,
    };
    scene.validate()?;
    Ok(scene)
}

pub fn save_scene(path: impl AsRef<Path>, scene: &Scene) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scene_to_json(scene)).map_err(|e| Error::io(path, e))
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    scene_from_json(&text).map_err(|e| match e {
        Error::Parse { what, source } => Error::Parse {
            what: format!("{what} {}", path.display()),
            source,
        },
        other => other,
    })
}
