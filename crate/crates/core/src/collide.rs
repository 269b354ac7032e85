//! Particle–solid collision handling shared by the SPH and marble engines.
//!
//! Particles are spheres of a fixed radius. A penetrating particle is projected
//! back onto the surface along the nearest-feature normal and the velocity
//! component into the surface is removed (no bounce).

use serde::{Deserialize, Serialize};

use crate::geom::{self, Aabb, Vec2};
use crate::scene::{Obstacle, Scene};

/// Per-contact-step velocity damping for sticky liquids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sticky {
    pub normal_damp: f64,
    pub tangent_damp: f64,
}

impl Default for Sticky {
    fn default() -> Self {
        Sticky {
            normal_damp: 0.01,
            tangent_damp: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolidKind {
    /// One of the scene's obstacles, by index.
    Obstacle(usize),
    /// Divider wedge or cup walls.
    Layout,
    /// Scene walls, floor and ceiling.
    Bounds,
}

#[derive(Debug, Clone)]
enum Shape {
    Polygon(Vec<Vec2>),
    Circle { center: Vec2, radius: f64 },
    Segment(Vec2, Vec2),
}

#[derive(Debug, Clone)]
struct Solid {
    kind: SolidKind,
    shape: Shape,
    bounds: Aabb,
}

/// Outcome of resolving one particle against every solid.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ContactInfo {
    pub any: bool,
    pub obstacle: bool,
}

/// Collision geometry of a scene for particles of one radius.
#[derive(Debug, Clone)]
pub struct Colliders {
    solids: Vec<Solid>,
    width: f64,
    height: f64,
    radius: f64,
}

impl Colliders {
    pub fn new(scene: &Scene, radius: f64) -> Self {
        let mut solids = Vec::new();
        for (i, o) in scene.obstacles.iter().enumerate() {
            let shape = match o {
                Obstacle::Polygon { vertices } => Shape::Polygon(vertices.clone()),
                Obstacle::Circle { center, radius } => Shape::Circle {
                    center: *center,
                    radius: *radius,
                },
            };
            solids.push(Solid {
                kind: SolidKind::Obstacle(i),
                shape,
                bounds: o.aabb().inflate(radius),
            });
        }
        let (polys, segs) = scene.bottom.solids();
        for p in polys {
            let bounds = Aabb::from_points(&p).inflate(radius);
            solids.push(Solid {
                kind: SolidKind::Layout,
                shape: Shape::Polygon(p),
                bounds,
            });
        }
        for (a, b) in segs {
            solids.push(Solid {
                kind: SolidKind::Layout,
                shape: Shape::Segment(a, b),
                bounds: Aabb::from_points(&[a, b]).inflate(radius),
            });
        }
        Colliders {
            solids,
            width: scene.width,
            height: scene.height,
            radius,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Projects `pos` out of every solid, removes inward normal velocity and
    /// applies sticky damping while in contact.
    pub fn resolve(&self, pos: &mut Vec2, vel: &mut Vec2, sticky: Option<&Sticky>) -> ContactInfo {
        let mut info = ContactInfo::default();
        let r = self.radius;
        for s in &self.solids {
            if !s.bounds.contains(*pos) {
                continue;
            }
            if let Some((surface, normal)) = penetration(&s.shape, *pos, *vel, r) {
                *pos = surface + normal * r;
                respond(vel, normal, sticky);
                info.any = true;
                if matches!(s.kind, SolidKind::Obstacle(_)) {
                    info.obstacle = true;
                }
            }
        }
        let walls = [
            (pos.x < r, Vec2::new(r, pos.y), Vec2::new(1.0, 0.0)),
            (
                pos.x > self.width - r,
                Vec2::new(self.width - r, pos.y),
                Vec2::new(-1.0, 0.0),
            ),
            (pos.y < r, Vec2::new(pos.x, r), Vec2::new(0.0, 1.0)),
            (
                pos.y > self.height - r,
                Vec2::new(pos.x, self.height - r),
                Vec2::new(0.0, -1.0),
            ),
        ];
        for (hit, _, normal) in walls {
            if hit {
                if normal.x != 0.0 {
                    pos.x = if normal.x > 0.0 { r } else { self.width - r };
                } else {
                    pos.y = if normal.y > 0.0 { r } else { self.height - r };
                }
                respond(vel, normal, sticky);
                info.any = true;
            }
        }
        info
    }

    /// Distance from `p` to the nearest scene obstacle surface (zero inside).
    pub fn obstacle_distance(&self, p: Vec2) -> f64 {
        self.solids
            .iter()
            .filter(|s| matches!(s.kind, SolidKind::Obstacle(_)))
            .map(|s| match &s.shape {
                Shape::Polygon(v) => {
                    if geom::point_in_polygon(p, v) {
                        0.0
                    } else {
                        polygon_closest(v, p).1
                    }
                }
                Shape::Circle { center, radius } => ((p - *center).length() - radius).max(0.0),
                Shape::Segment(a, b) => geom::distance_to_segment(p, *a, *b),
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Removes the velocity component into the surface; sticky contacts further
/// scale the normal and tangential parts.
#[inline]
fn respond(vel: &mut Vec2, normal: Vec2, sticky: Option<&Sticky>) {
    let vn = vel.dot(normal);
    if vn < 0.0 {
        *vel -= normal * vn;
    }
    if let Some(s) = sticky {
        let vn = vel.dot(normal);
        let vt = *vel - normal * vn;
        *vel = normal * (vn * (1.0 - s.normal_damp)) + vt * (1.0 - s.tangent_damp);
    }
}

/// Closest boundary point of a polygon, its distance and the edge index.
fn polygon_closest(v: &[Vec2], p: Vec2) -> (Vec2, f64, usize) {
    let n = v.len();
    let mut best = (v[0], f64::INFINITY, 0);
    for i in 0..n {
        let c = geom::closest_point_on_segment(p, v[i], v[(i + 1) % n]);
        let d = (p - c).length_squared();
        if d < best.1 {
            best = (c, d, i);
        }
    }
    (best.0, best.1.sqrt(), best.2)
}

/// Surface point and outward normal when a sphere at `p` penetrates `shape`.
fn penetration(shape: &Shape, p: Vec2, vel: Vec2, r: f64) -> Option<(Vec2, Vec2)> {
    match shape {
        Shape::Polygon(v) => {
            let inside = geom::point_in_polygon(p, v);
            let (c, d, edge) = polygon_closest(v, p);
            if !inside && d >= r {
                return None;
            }
            let edge_normal = || {
                let a = v[edge];
                let b = v[(edge + 1) % v.len()];
                let t = b - a;
                Vec2::new(t.y, -t.x).normalized().unwrap_or(Vec2::new(0.0, 1.0))
            };
            let normal = if d > 0.0 {
                let dir = (p - c) / d;
                if inside {
                    -dir
                } else {
                    dir
                }
            } else {
                edge_normal()
            };
            Some((c, normal))
        }
        Shape::Circle { center, radius } => {
            let off = p - *center;
            let d = off.length();
            if d >= radius + r {
                return None;
            }
            let normal = off.normalized().unwrap_or(Vec2::new(0.0, 1.0));
            Some((*center + normal * *radius, normal))
        }
        Shape::Segment(a, b) => {
            let c = geom::closest_point_on_segment(p, *a, *b);
            let off = p - c;
            let d = off.length();
            if d >= r {
                return None;
            }
            let normal = if d > 0.0 {
                off / d
            } else {
                let t = (*b - *a).perp().normalized().unwrap_or(Vec2::new(0.0, 1.0));
                if t.dot(vel) > 0.0 {
                    -t
                } else {
                    t
                }
            };
            Some((c, normal))
        }
    }
}
