use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BottomLayout, LiquidStart, Obstacle, Scene, LIQUID_DIAMETER, SCENE_HEIGHT, SCENE_WIDTH};
use crate::error::{Error, Result};
use crate::geom::{self, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Triangle,
    Square,
    Circle,
}

impl ShapeKind {
    const ALL: [ShapeKind; 3] = [ShapeKind::Triangle, ShapeKind::Square, ShapeKind::Circle];

    /// Builds the shape with circumradius `size` centred at `c`, rotated by `angle`.
    pub fn build(self, c: Vec2, size: f64, angle: f64) -> Obstacle {
        let regular = |sides: usize| {
            let verts = (0..sides)
                .map(|k| {
                    let t = angle + TAU * k as f64 / sides as f64;
                    geom::snap_point(c + Vec2::new(t.cos(), t.sin()) * size)
                })
                .collect();
            Obstacle::Polygon { vertices: verts }
        };
        match self {
            ShapeKind::Triangle => regular(3),
            ShapeKind::Square => regular(4),
            ShapeKind::Circle => Obstacle::Circle {
                center: geom::snap_point(c),
                radius: geom::snap(size),
            },
        }
    }
}

/// Parameters of the three-shape cup scene generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeConfig {
    pub width: f64,
    pub height: f64,
    pub n_obstacles: usize,
    /// Circumradius range of each shape, meters.
    pub min_size: f64,
    pub max_size: f64,
    /// Evenly spaced candidate cup positions along the floor.
    pub cup_slots: usize,
    pub cup_wall_height: f64,
    pub band_bottom: f64,
    pub band_top: f64,
    /// Minimum gap between bounding circles of two shapes.
    pub clearance: f64,
    pub liquid_x_min: f64,
    pub liquid_x_max: f64,
    pub liquid_y: f64,
    pub max_attempts: usize,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig {
            width: SCENE_WIDTH,
            height: SCENE_HEIGHT,
            n_obstacles: 3,
            min_size: 0.07,
            max_size: 0.15,
            cup_slots: 5,
            cup_wall_height: BottomLayout::CUP_WALL_HEIGHT,
            band_bottom: 0.3,
            band_top: 1.2,
            clearance: 0.04,
            liquid_x_min: 0.3,
            liquid_x_max: 0.7,
            liquid_y: SCENE_HEIGHT - 0.1,
            max_attempts: 256,
        }
    }
}

impl ShapeConfig {
    /// Centre x of cup slot `k`; the cup is a third of the scene wide.
    pub fn cup_center(&self, k: usize) -> f64 {
        let cup = self.width / 3.0;
        if self.cup_slots <= 1 {
            return 0.5 * self.width;
        }
        let span = self.width - cup;
        geom::snap(0.5 * cup + span * k as f64 / (self.cup_slots - 1) as f64)
    }
}

/// Generates a scene with `n_obstacles` random triangles, squares or circles
/// above a cup placed in one of the configured slots.
pub fn generate_shape_scene(seed: u64, config: &ShapeConfig) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slot = rng.random_range(0..config.cup_slots.max(1));
    let liquid_x = geom::snap(rng.random_range(config.liquid_x_min..=config.liquid_x_max));

    let mut placed: Vec<(Vec2, f64)> = Vec::with_capacity(config.n_obstacles);
    let mut obstacles = Vec::with_capacity(config.n_obstacles);
    let mut attempts = 0;
    while obstacles.len() < config.n_obstacles {
        attempts += 1;
        if attempts > config.max_attempts {
            return Err(Error::Generation {
                attempts: config.max_attempts,
                reason: format!("placed {} of {} shapes", obstacles.len(), config.n_obstacles),
            });
        }
        let kind = ShapeKind::ALL[rng.random_range(0..3)];
        let size = if config.max_size > config.min_size {
            rng.random_range(config.min_size..=config.max_size)
        } else {
            config.min_size
        };
        let angle = match kind {
            // Keep a vertex pointing up half the time so apex landings occur.
            ShapeKind::Triangle => FRAC_PI_2 + rng.random_range(-PI / 3.0..PI / 3.0),
            _ => rng.random_range(0.0..FRAC_PI_2),
        };
        let (x0, x1) = (size + config.clearance, config.width - size - config.clearance);
        let (y0, y1) = (config.band_bottom + size, config.band_top - size);
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::Generation {
                attempts,
                reason: format!("shape size {size} does not fit the placement band"),
            });
        }
        let c = Vec2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if placed
            .iter()
            .any(|&(pc, pr)| (pc - c).length() < pr + size + config.clearance)
        {
            continue;
        }
        placed.push((c, size));
        obstacles.push(kind.build(c, size, angle));
    }

    let scene = Scene {
        width: config.width,
        height: config.height,
        seed,
        obstacles,
        liquid_start: LiquidStart {
            center: Vec2::new(liquid_x, geom::snap(config.liquid_y)),
            diameter: LIQUID_DIAMETER,
        },
        bottom: BottomLayout::Cup {
            center_x: config.cup_center(slot),
            width: config.width / 3.0,
            wall_height: config.cup_wall_height,
        },
    };
    scene.validate()?;
    Ok(scene)
}
