//! Scenes: bounds, solid obstacles, the liquid's starting disc and the bottom
//! layout that a judgment is read from.

mod format;
mod select;
mod shapes;
mod voronoi;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geom::{self, Aabb, Vec2};

pub use format::{load_scene, save_scene, scene_from_json, scene_to_json, SCENE_FORMAT_VERSION};
pub use select::{
    filter_scene, select_contrastive_scenes, select_from_judgments, ContrastiveSelection, FilterConfig, FilterVerdict,
    RejectReason,
};
pub use shapes::{generate_shape_scene, ShapeConfig, ShapeKind};
pub use voronoi::{generate_voronoi_scene, VoronoiConfig};

/// Default scene extent, meters.
pub const SCENE_WIDTH: f64 = 1.0;
pub const SCENE_HEIGHT: f64 = 1.5;
/// Diameter of the liquid's starting disc, meters.
pub const LIQUID_DIAMETER: f64 = 0.148;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstacle {
    /// Counter-clockwise vertex list.
    Polygon {
        vertices: Vec<Vec2>,
    },
    Circle {
        center: Vec2,
        radius: f64,
    },
}

impl Obstacle {
    pub fn area(&self) -> f64 {
        match self {
            Obstacle::Polygon { vertices } => geom::signed_area(vertices),
            Obstacle::Circle { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn aabb(&self) -> Aabb {
        match self {
            Obstacle::Polygon { vertices } => Aabb::from_points(vertices),
            Obstacle::Circle { center, radius } => Aabb {
                min: *center - Vec2::new(*radius, *radius),
                max: *center + Vec2::new(*radius, *radius),
            },
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Obstacle::Polygon { vertices } => geom::point_in_polygon(p, vertices),
            Obstacle::Circle { center, radius } => (p - *center).length_squared() < radius * radius,
        }
    }

    /// Unsigned distance from `p` to the obstacle boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        match self {
            Obstacle::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| geom::distance_to_segment(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
            Obstacle::Circle { center, radius } => ((p - *center).length() - radius).abs(),
        }
    }

    /// Distance from `p` to the solid (zero inside).
    pub fn distance(&self, p: Vec2) -> f64 {
        if self.contains(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    fn mirrored(&self, width: f64) -> Obstacle {
        match self {
            Obstacle::Polygon { vertices } => Obstacle::Polygon {
                vertices: vertices.iter().rev().map(|v| Vec2::new(width - v.x, v.y)).collect(),
            },
            Obstacle::Circle { center, radius } => Obstacle::Circle {
                center: Vec2::new(width - center.x, center.y),
                radius: *radius,
            },
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Obstacle::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(format!("polygon has {} vertices", vertices.len()));
                }
                if vertices.iter().any(|v| !v.is_finite()) {
                    return Err("polygon has non-finite vertex".into());
                }
                if !geom::is_simple_polygon(vertices) {
                    return Err("polygon is not simple".into());
                }
                if geom::signed_area(vertices) <= 0.0 {
                    return Err("polygon is not counter-clockwise".into());
                }
                Ok(())
            }
            Obstacle::Circle { center, radius } => {
                if !center.is_finite() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(format!("circle radius must be positive, got {radius}"));
                }
                Ok(())
            }
        }
    }

    /// True when the two solids share interior points or touch.
    pub fn overlaps(&self, other: &Obstacle) -> bool {
        if !self.aabb().overlaps(&other.aabb()) {
            return false;
        }
        match (self, other) {
            (Obstacle::Circle { center: a, radius: ra }, Obstacle::Circle { center: b, radius: rb }) => {
                (*a - *b).length() <= ra + rb
            }
            (Obstacle::Circle { center, radius }, poly @ Obstacle::Polygon { .. })
            | (poly @ Obstacle::Polygon { .. }, Obstacle::Circle { center, radius }) => {
                poly.distance(*center) <= *radius
            }
            (Obstacle::Polygon { vertices: a }, Obstacle::Polygon { vertices: b }) => {
                let (na, nb) = (a.len(), b.len());
                for i in 0..na {
                    for j in 0..nb {
                        if geom::segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]) {
                            return true;
                        }
                    }
                }
                geom::point_in_polygon(a[0], b) || geom::point_in_polygon(b[0], a)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiquidStart {
    pub center: Vec2,
    pub diameter: f64,
}

impl LiquidStart {
    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius() * self.radius()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BottomLayout {
    /// Two basins separated by a thin upward wedge centred on `x`.
    Divider { x: f64, half_width: f64, height: f64 },
    /// Open cup standing on the floor: two vertical walls over a floor segment.
    Cup {
        center_x: f64,
        width: f64,
        wall_height: f64,
    },
}

impl BottomLayout {
    pub const DIVIDER_HALF_WIDTH: f64 = 0.02;
    pub const DIVIDER_HEIGHT: f64 = 0.12;
    pub const CUP_WALL_HEIGHT: f64 = 0.15;

    pub fn divider(x: f64) -> Self {
        BottomLayout::Divider {
            x,
            half_width: Self::DIVIDER_HALF_WIDTH,
            height: Self::DIVIDER_HEIGHT,
        }
    }

    /// Height of the layout's solid parts; liquid settled below it counts as
    /// having reached a basin or the floor.
    pub fn basin_top(&self) -> f64 {
        match *self {
            BottomLayout::Divider { height, .. } => height,
            BottomLayout::Cup { wall_height, .. } => wall_height,
        }
    }

    /// Whether a settled position scores toward the judgment: right of the
    /// divider (ties count as left), or inside the cup interior.
    pub fn scores(&self, p: Vec2) -> bool {
        match *self {
            BottomLayout::Divider { x, .. } => p.x > x,
            BottomLayout::Cup {
                center_x,
                width,
                wall_height,
            } => {
                let half = 0.5 * width;
                p.x > center_x - half && p.x < center_x + half && p.y < wall_height
            }
        }
    }

    /// Solid geometry of the layout as polygons and wall segments.
    pub fn solids(&self) -> (Vec<Vec<Vec2>>, Vec<(Vec2, Vec2)>) {
        match *self {
            BottomLayout::Divider { x, half_width, height } => (
                vec![vec![
                    Vec2::new(x - half_width, 0.0),
                    Vec2::new(x + half_width, 0.0),
                    Vec2::new(x, height),
                ]],
                Vec::new(),
            ),
            BottomLayout::Cup {
                center_x,
                width,
                wall_height,
            } => {
                let l = center_x - 0.5 * width;
                let r = center_x + 0.5 * width;
                (
                    Vec::new(),
                    vec![
                        (Vec2::new(l, 0.0), Vec2::new(l, wall_height)),
                        (Vec2::new(r, 0.0), Vec2::new(r, wall_height)),
                        (Vec2::new(l, 0.0), Vec2::new(r, 0.0)),
                    ],
                )
            }
        }
    }

    fn mirrored(&self, width: f64) -> BottomLayout {
        match *self {
            BottomLayout::Divider { x, half_width, height } => BottomLayout::Divider {
                x: width - x,
                half_width,
                height,
            },
            BottomLayout::Cup {
                center_x,
                width: w,
                wall_height,
            } => BottomLayout::Cup {
                center_x: width - center_x,
                width: w,
                wall_height,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub width: f64,
    pub height: f64,
    pub seed: u64,
    pub obstacles: Vec<Obstacle>,
    pub liquid_start: LiquidStart,
    pub bottom: BottomLayout,
}

impl Scene {
    /// Obstacle-free scene with the liquid centred above a central divider.
    pub fn empty_divider(seed: u64) -> Scene {
        Scene {
            width: SCENE_WIDTH,
            height: SCENE_HEIGHT,
            seed,
            obstacles: Vec::new(),
            liquid_start: LiquidStart {
                center: Vec2::new(0.5 * SCENE_WIDTH, SCENE_HEIGHT - 0.1),
                diameter: LIQUID_DIAMETER,
            },
            bottom: BottomLayout::divider(0.5 * SCENE_WIDTH),
        }
    }

    pub fn obstacle_area(&self) -> f64 {
        self.obstacles.iter().map(Obstacle::area).sum()
    }

    /// Reflects every x-coordinate about `width / 2`. For coordinates on the
    /// generator's snap grid this is an exact involution.
    pub fn mirrored(&self) -> Scene {
        let w = self.width;
        Scene {
            width: w,
            height: self.height,
            seed: self.seed,
            obstacles: self.obstacles.iter().map(|o| o.mirrored(w)).collect(),
            liquid_start: LiquidStart {
                center: Vec2::new(w - self.liquid_start.center.x, self.liquid_start.center.y),
                diameter: self.liquid_start.diameter,
            },
            bottom: self.bottom.mirrored(w),
        }
    }

    /// Hex digest of the canonical serialized form.
    pub fn content_hash(&self) -> String {
        let json = scene_to_json(self);
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScene(msg));
        if !(self.width.is_finite() && self.width > 0.0) {
            return bad(format!("width must be positive, got {}", self.width));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return bad(format!("height must be positive, got {}", self.height));
        }
        let inside = |p: Vec2| p.x > 0.0 && p.x < self.width && p.y > 0.0 && p.y < self.height;
        for (i, o) in self.obstacles.iter().enumerate() {
            if let Err(e) = o.validate() {
                return bad(format!("obstacles[{i}]: {e}"));
            }
            let bb = o.aabb();
            if !inside(bb.min) || !inside(bb.max) {
                return bad(format!("obstacles[{i}] is not strictly inside the scene bounds"));
            }
        }
        for i in 0..self.obstacles.len() {
            for j in (i + 1)..self.obstacles.len() {
                if self.obstacles[i].overlaps(&self.obstacles[j]) {
                    return bad(format!("obstacles[{i}] and obstacles[{j}] overlap"));
                }
            }
        }
        let ls = &self.liquid_start;
        if !(ls.diameter.is_finite() && ls.diameter > 0.0) || !ls.center.is_finite() {
            return bad("liquid_start must have a positive diameter".into());
        }
        let disc = Obstacle::Circle {
            center: ls.center,
            radius: ls.radius(),
        };
        let disc_box = disc.aabb();
        if !inside(disc_box.min) || !inside(disc_box.max) {
            return bad("liquid_start disc leaves the scene".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.overlaps(&disc) {
                return bad(format!("liquid_start disc intersects obstacles[{i}]"));
            }
        }
        match self.bottom {
            BottomLayout::Divider { x, half_width, height } => {
                if !(x > 0.0 && x < self.width) {
                    return bad(format!("divider x {x} outside (0, width)"));
                }
                if !(half_width > 0.0 && height > 0.0 && height < self.height) {
                    return bad("divider wedge must have positive size".into());
                }
            }
            BottomLayout::Cup {
                center_x,
                width,
                wall_height,
            } => {
                let (l, r) = (center_x - 0.5 * width, center_x + 0.5 * width);
                // Slot centres are grid-snapped, so allow sub-micron slack.
                if !(width > 0.0 && l >= -1e-9 && r <= self.width + 1e-9) {
                    return bad("cup is not fully inside the scene".into());
                }
                if !(wall_height > 0.0 && wall_height < self.height) {
                    return bad("cup wall height out of range".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(x: f64) -> Obstacle {
        Obstacle::Polygon {
            vertices: [(x, 0.5), (x + 0.2, 0.5), (x + 0.1, 0.7)]
                .map(|(a, b)| geom::snap_point(Vec2::new(a, b)))
                .to_vec(),
        }
    }

    #[test]
    fn mirror_reflects_coordinates() {
        let mut s = Scene::empty_divider(0);
        s.obstacles.push(tri(0.2));
        let m = s.mirrored();
        let Obstacle::Polygon { vertices } = &m.obstacles[0] else {
            unreachable!()
        };
        assert!(vertices.iter().any(|v| v.x == 1.0 - geom::snap(0.2)));
        assert!(geom::signed_area(vertices) > 0.0);
        assert_eq!(m.bottom, s.bottom);
        assert_eq!(m.mirrored(), s);
    }

    #[test]
    fn overlap_is_rejected() {
        let mut s = Scene::empty_divider(0);
        s.obstacles.push(tri(0.2));
        s.obstacles.push(tri(0.25));
        assert!(matches!(s.validate(), Err(Error::InvalidScene(_))));
        s.obstacles.pop();
        s.validate().unwrap();
    }

    #[test]
    fn liquid_disc_must_be_clear() {
        let mut s = Scene::empty_divider(0);
        s.obstacles.push(Obstacle::Circle {
            center: s.liquid_start.center,
            radius: 0.05,
        });
        assert!(s.validate().is_err());
    }

    #[test]
    fn cup_scoring() {
        let cup = BottomLayout::Cup {
            center_x: 0.5,
            width: 1.0 / 3.0,
            wall_height: 0.15,
        };
        assert!(cup.scores(Vec2::new(0.5, 0.01)));
        assert!(!cup.scores(Vec2::new(0.2, 0.01)));
        assert!(!cup.scores(Vec2::new(0.5, 0.2)));
        let div = BottomLayout::divider(0.5);
        assert!(!div.scores(Vec2::new(0.5, 0.0)));
        assert!(div.scores(Vec2::new(0.5 + 1e-12, 0.0)));
    }
}
