use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BottomLayout, LiquidStart, Obstacle, Scene, LIQUID_DIAMETER, SCENE_HEIGHT, SCENE_WIDTH};
use crate::error::{Error, Result};
use crate::geom::{self, Vec2};

/// Parameters of the tessellation-based obstacle course generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VoronoiConfig {
    pub width: f64,
    pub height: f64,
    /// Summed obstacle area to aim for, m².
    pub target_area: f64,
    /// Accepted relative deviation from `target_area`.
    pub area_tolerance: f64,
    /// Inclusive range for the number of tessellation sites.
    pub min_sites: usize,
    pub max_sites: usize,
    /// Vertical band the cells are clipped to.
    pub band_bottom: f64,
    pub band_top: f64,
    /// Horizontal clearance between the band and the side walls.
    pub side_margin: f64,
    /// Linear scale applied to each selected cell about its centroid, leaving
    /// gaps between neighbouring obstacles.
    pub cell_scale: f64,
    /// Range for the liquid disc's centre x.
    pub liquid_x_min: f64,
    pub liquid_x_max: f64,
    pub liquid_y: f64,
    pub max_attempts: usize,
}

impl Default for VoronoiConfig {
    fn default() -> Self {
        VoronoiConfig {
            width: SCENE_WIDTH,
            height: SCENE_HEIGHT,
            target_area: 0.12,
            area_tolerance: 0.1,
            min_sites: 20,
            max_sites: 60,
            band_bottom: 0.25,
            band_top: 1.2,
            side_margin: 0.02,
            cell_scale: 0.85,
            liquid_x_min: 0.3,
            liquid_x_max: 0.7,
            liquid_y: SCENE_HEIGHT - 0.1,
            max_attempts: 64,
        }
    }
}

fn cells(sites: &[Vec2], band: &[Vec2]) -> Vec<Vec<Vec2>> {
    sites
        .iter()
        .enumerate()
        .map(|(i, &si)| {
            let mut cell = band.to_vec();
            for (j, &sj) in sites.iter().enumerate() {
                if i == j || cell.is_empty() {
                    continue;
                }
                let normal = sj - si;
                let mid = (si + sj) * 0.5;
                cell = geom::clip_half_plane(&cell, normal, mid.dot(normal));
            }
            cell
        })
        .collect()
}

/// Shrinks a convex cell about its centroid and snaps it to the coordinate grid.
/// Returns `None` for cells that degenerate.
fn finish_cell(cell: &[Vec2], scale: f64) -> Option<Vec<Vec2>> {
    if cell.len() < 3 {
        return None;
    }
    let c = geom::centroid(cell);
    let mut out: Vec<Vec2> = Vec::with_capacity(cell.len());
    for &p in cell {
        let q = geom::snap_point(c + (p - c) * scale);
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    if out.len() < 3 || !geom::is_simple_polygon(&out) || geom::signed_area(&out) <= 0.0 {
        return None;
    }
    Some(out)
}

/// Builds an obstacle course by tessellating a central band, keeping a random
/// subset of (shrunken) cells whose areas sum to the configured target.
pub fn generate_voronoi_scene(seed: u64, config: &VoronoiConfig) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let liquid_x = geom::snap(rng.random_range(config.liquid_x_min..=config.liquid_x_max));
    let base = Scene {
        width: config.width,
        height: config.height,
        seed,
        obstacles: Vec::new(),
        liquid_start: LiquidStart {
            center: Vec2::new(liquid_x, geom::snap(config.liquid_y)),
            diameter: LIQUID_DIAMETER,
        },
        bottom: BottomLayout::divider(geom::snap(0.5 * config.width)),
    };
    if config.target_area <= 0.0 {
        base.validate()?;
        return Ok(base);
    }

    let lo = config.target_area * (1.0 - config.area_tolerance);
    let hi = config.target_area * (1.0 + config.area_tolerance);
    let (x0, x1) = (config.side_margin, config.width - config.side_margin);
    let (y0, y1) = (config.band_bottom, config.band_top);
    let band = [
        Vec2::new(x0, y0),
        Vec2::new(x1, y0),
        Vec2::new(x1, y1),
        Vec2::new(x0, y1),
    ];

    let mut last_reason = String::from("no attempts made");
    for _ in 0..config.max_attempts.max(1) {
        let n_sites = rng.random_range(config.min_sites..=config.max_sites.max(config.min_sites));
        let sites: Vec<Vec2> = (0..n_sites)
            .map(|_| Vec2::new(rng.random_range(x0..x1), rng.random_range(y0..y1)))
            .collect();
        let mut candidates: Vec<Vec<Vec2>> = cells(&sites, &band)
            .iter()
            .filter_map(|c| finish_cell(c, config.cell_scale))
            .collect();
        if candidates.is_empty() {
            last_reason = "degenerate tessellation".into();
            continue;
        }
        candidates.shuffle(&mut rng);

        let mut total = 0.0;
        let mut chosen = Vec::new();
        for cell in candidates {
            let a = geom::signed_area(&cell);
            if total + a <= hi {
                total += a;
                chosen.push(Obstacle::Polygon { vertices: cell });
            }
            if total >= lo {
                break;
            }
        }
        if total < lo {
            last_reason = format!("selected area {total:.4} below {lo:.4}");
            continue;
        }
        let scene = Scene {
            obstacles: chosen,
            ..base.clone()
        };
        match scene.validate() {
            Ok(()) => return Ok(scene),
            Err(e) => last_reason = e.to_string(),
        }
    }
    Err(Error::Generation {
        attempts: config.max_attempts,
        reason: last_reason,
    })
}
