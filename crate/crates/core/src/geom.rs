//! Planar geometry primitives shared by the scene generators and engines.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    /// Counter-clockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let l = self.length();
        if l > 0.0 && l.is_finite() {
            Some(self / l)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl MulAssign<f64> for Vec2 {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        self.x *= s;
        self.y *= s;
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn from_points(points: &[Vec2]) -> Aabb {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Aabb { min, max }
    }

    pub fn inflate(self, r: f64) -> Aabb {
        Aabb {
            min: Vec2::new(self.min.x - r, self.min.y - r),
            max: Vec2::new(self.max.x + r, self.max.y + r),
        }
    }

    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }
}

/// Closest point on segment `ab` to `p`.
pub fn closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.length_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

pub fn distance_to_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    (p - closest_point_on_segment(p, a, b)).length()
}

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

pub fn centroid(poly: &[Vec2]) -> Vec2 {
    let n = poly.len();
    let a = signed_area(poly);
    if a == 0.0 {
        let s = poly.iter().fold(Vec2::ZERO, |acc, &p| acc + p);
        return s / n.max(1) as f64;
    }
    let mut c = Vec2::ZERO;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = p.cross(q);
        c += (p + q) * w;
    }
    c / (6.0 * a)
}

/// Even-odd point containment. Points exactly on the boundary may land either way.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = poly[i];
        let b = poly[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Proper or touching intersection test between segments `ab` and `cd`.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
        (b - a).cross(c - a)
    }
    fn on_seg(a: Vec2, b: Vec2, p: Vec2) -> bool {
        p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_seg(c, d, a))
        || (d2 == 0.0 && on_seg(c, d, b))
        || (d3 == 0.0 && on_seg(a, b, c))
        || (d4 == 0.0 && on_seg(a, b, d))
}

/// True when no two non-adjacent edges of the closed polygon intersect.
pub fn is_simple_polygon(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a == b {
            return false;
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Keeps the part of a convex polygon where `dot(p, normal) <= offset`
/// (Sutherland-Hodgman against one half-plane).
pub fn clip_half_plane(poly: &[Vec2], normal: Vec2, offset: f64) -> Vec<Vec2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let cur = poly[i];
        let nxt = poly[(i + 1) % n];
        let dc = cur.dot(normal) - offset;
        let dn = nxt.dot(normal) - offset;
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}

/// Convex polygon test for a counter-clockwise polygon (collinear vertices allowed).
pub fn is_convex_ccw(poly: &[Vec2]) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        (b - a).cross(c - b) >= 0.0
    })
}

/// Step of the dyadic grid generated coordinates are snapped to (2^-20 m).
/// On this grid reflection `w - x` and shoelace sums are exact in `f64`.
pub const SNAP: f64 = 1.0 / (1u64 << 20) as f64;

#[inline]
pub fn snap(v: f64) -> f64 {
    (v / SNAP).round() * SNAP
}

#[inline]
pub fn snap_point(p: Vec2) -> Vec2 {
    Vec2::new(snap(p.x), snap(p.y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn shoelace_and_centroid() {
        let sq = square();
        assert_eq!(signed_area(&sq), 1.0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(signed_area(&rev), -1.0);
        assert_eq!(centroid(&sq), Vec2::new(0.5, 0.5));
    }

    #[test]
    fn segment_distance() {
        let d = distance_to_segment(Vec2::new(0.5, 1.0), Vec2::ZERO, Vec2::new(1.0, 0.0));
        assert_eq!(d, 1.0);
        let d = distance_to_segment(Vec2::new(2.0, 0.0), Vec2::ZERO, Vec2::new(1.0, 0.0));
        assert_eq!(d, 1.0);
    }

    #[test]
    fn containment() {
        let sq = square();
        assert!(point_in_polygon(Vec2::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Vec2::new(1.5, 0.5), &sq));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!is_simple_polygon(&bow));
        assert!(is_simple_polygon(&square()));
    }

    #[test]
    fn half_plane_clip_halves_square() {
        let clipped = clip_half_plane(&square(), Vec2::new(1.0, 0.0), 0.5);
        assert!((signed_area(&clipped) - 0.5).abs() < 1e-15);
        assert!(is_convex_ccw(&clipped));
    }

    #[test]
    fn snapped_reflection_is_exact() {
        let x = snap(0.123456789);
        let w = 1.0;
        assert_eq!(w - (w - x), x);
    }
}
