//! SimpleSim: independent particles that drop straight down, run along the
//! top surface of whatever they land on, and leave it at its edge with a
//! horizontal carry. The gravity heuristic is the no-carry, no-noise case.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geom::{self, Vec2};
use crate::predict::{Judgment, ModelSpec};
use crate::scene::{Obstacle, Scene};

/// Carry values explored by sweeps, meters.
pub const CARRY_GRID: [f64; 11] = [0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2];
/// Wrong-direction probabilities explored by sweeps.
pub const NOISE_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const MAX_CARRY: f64 = 0.2;

const EPS: f64 = 1e-9;
const ON_EDGE: f64 = 1e-12;

fn default_paths() -> usize {
    100
}
fn default_max_segments() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicSpec {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    /// Probability of taking the uphill direction at each obstacle.
    #[serde(default)]
    pub g_noise: f64,
    /// Horizontal distance travelled past an obstacle edge, meters.
    #[serde(default)]
    pub carry: f64,
    /// Half-width of the carry window averaged over, meters.
    #[serde(default)]
    pub sigma_m: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_segments")]
    pub max_segments: usize,
}

impl Default for HeuristicSpec {
    fn default() -> Self {
        HeuristicSpec {
            n_paths: default_paths(),
            g_noise: 0.0,
            carry: 0.0,
            sigma_m: 0.0,
            seed: 0,
            max_segments: default_max_segments(),
        }
    }
}

impl HeuristicSpec {
    pub fn new(g_noise: f64, carry: f64, sigma_m: f64) -> Self {
        HeuristicSpec {
            g_noise,
            carry,
            sigma_m,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n_paths < 1 {
            return bad("n_paths must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.g_noise) {
            return bad(format!("g_noise must lie in [0, 1], got {}", self.g_noise));
        }
        if !(0.0..=MAX_CARRY).contains(&self.carry) {
            return bad(format!("carry must lie in [0, {MAX_CARRY}], got {}", self.carry));
        }
        if !(self.sigma_m >= 0.0 && self.sigma_m.is_finite()) {
            return bad(format!("sigma_m must be >= 0, got {}", self.sigma_m));
        }
        if self.max_segments < 1 {
            return bad("max_segments must be at least 1".into());
        }
        Ok(())
    }

    /// Carry values averaged by a prediction: the grid values within
    /// `sigma_m` of `carry`, or `carry` alone when `sigma_m` is zero.
    pub fn carry_window(&self) -> Vec<f64> {
        if self.sigma_m == 0.0 {
            return vec![self.carry];
        }
        CARRY_GRID
            .iter()
            .copied()
            .filter(|m| (m - self.carry).abs() <= self.sigma_m + EPS)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Left => -1.0,
            Direction::Right => 1.0,
        }
    }

    fn flip(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub point: Vec2,
    /// The segment ending here was travelled uphill.
    pub against_gravity: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub obstacle: usize,
    pub direction: Direction,
    pub against_gravity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    pub start_x: f64,
    pub waypoints: Vec<Waypoint>,
    pub terminal_x: f64,
    pub decisions: Vec<Decision>,
    /// Ended in a surface valley instead of reaching the floor.
    pub trapped: bool,
    /// Random numbers consumed by this path.
    pub random_draws: u32,
}

impl PathTrace {
    pub fn terminal(&self) -> Vec2 {
        self.waypoints
            .last()
            .map_or(Vec2::new(self.terminal_x, 0.0), |w| w.point)
    }
}

/// Height of the edge `a`-`b` at `x`, interpolated from the lower endpoint so
/// that mirrored edges give identical heights.
fn edge_height(a: Vec2, b: Vec2, x: f64) -> f64 {
    let (lo, hi) = if a.y <= b.y { (a, b) } else { (b, a) };
    if lo.y == hi.y {
        return lo.y;
    }
    lo.y + (x - lo.x).abs() * (hi.y - lo.y) / (hi.x - lo.x).abs()
}

/// Abscissa where the edge `a`-`b` crosses height `y`, interpolated from the
/// lower endpoint.
fn edge_abscissa(a: Vec2, b: Vec2, y: f64) -> f64 {
    let (lo, hi) = if a.y <= b.y { (a, b) } else { (b, a) };
    let span = hi.x - lo.x;
    if span == 0.0 {
        return lo.x;
    }
    lo.x + span.signum() * (y - lo.y) * span.abs() / (hi.y - lo.y)
}

/// Top-facing edges of a counter-clockwise polygon run right to left.
fn is_top(v: &[Vec2], e: usize) -> bool {
    v[(e + 1) % v.len()].x < v[e].x
}

fn circle_top(center: Vec2, radius: f64, x: f64) -> Option<f64> {
    let dx = x - center.x;
    (dx.abs() <= radius).then(|| center.y + (radius * radius - dx * dx).max(0.0).sqrt())
}

/// Highest top surface strictly below `p` on the vertical through it.
fn surface_below(obstacles: &[Obstacle], p: Vec2) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut consider = |k: usize, y: f64| {
        if y < p.y - EPS && best.is_none_or(|(_, by)| y > by) {
            best = Some((k, y));
        }
    };
    for (k, o) in obstacles.iter().enumerate() {
        match o {
            Obstacle::Polygon { vertices: v } => {
                for e in 0..v.len() {
                    if !is_top(v, e) {
                        continue;
                    }
                    let (a, b) = (v[e], v[(e + 1) % v.len()]);
                    if b.x <= p.x && p.x <= a.x {
                        consider(k, edge_height(a, b, p.x));
                    }
                }
            }
            Obstacle::Circle { center, radius } => {
                if let Some(y) = circle_top(*center, *radius, p.x) {
                    consider(k, y);
                }
            }
        }
    }
    best
}

/// First obstacle boundary crossed moving horizontally from `p` by `dist`
/// in direction `dir`. Returns the obstacle, the crossing point and whether
/// the crossed boundary faces upward.
fn carry_hit(obstacles: &[Obstacle], p: Vec2, dir: Direction, dist: f64) -> Option<(usize, Vec2, bool)> {
    let s = dir.sign();
    let mut best: Option<(f64, usize, Vec2, bool)> = None;
    let mut consider = |k: usize, x: f64, up: bool| {
        let t = s * (x - p.x);
        if t > EPS && t <= dist && best.is_none_or(|(bt, ..)| t < bt) {
            best = Some((t, k, Vec2::new(x, p.y), up));
        }
    };
    for (k, o) in obstacles.iter().enumerate() {
        match o {
            Obstacle::Polygon { vertices: v } => {
                for e in 0..v.len() {
                    let (a, b) = (v[e], v[(e + 1) % v.len()]);
                    if a.y == b.y || (a.y - p.y) * (b.y - p.y) > 0.0 {
                        continue;
                    }
                    consider(k, edge_abscissa(a, b, p.y), is_top(v, e));
                }
            }
            Obstacle::Circle { center, radius } => {
                let dy = p.y - center.y;
                if dy.abs() <= *radius {
                    let half = (radius * radius - dy * dy).max(0.0).sqrt();
                    consider(k, center.x - half, dy > 0.0);
                    consider(k, center.x + half, dy > 0.0);
                }
            }
        }
    }
    best.map(|(_, k, q, up)| (k, q, up))
}

/// Chooses the downhill side from the descent rate on each side (drop per
/// unit horizontal distance; infinite where the surface ends). Flat ground
/// goes toward the nearer end; ties go left. `None` means a valley.
fn downhill(rate_left: f64, rate_right: f64, dist_left: f64, dist_right: f64) -> Option<Direction> {
    if rate_left > 0.0 || rate_right > 0.0 {
        return Some(if rate_right > rate_left {
            Direction::Right
        } else {
            Direction::Left
        });
    }
    match (rate_left == 0.0, rate_right == 0.0) {
        (true, true) => Some(if dist_right < dist_left {
            Direction::Right
        } else {
            Direction::Left
        }),
        (true, false) => Some(Direction::Left),
        (false, true) => Some(Direction::Right),
        (false, false) => None,
    }
}

/// Top edges of polygon `v` through the surface point `p`: the one extending
/// left of it and the one extending right.
fn edges_at(v: &[Vec2], p: Vec2) -> (Option<usize>, Option<usize>) {
    let (mut left, mut right) = (None, None);
    for e in 0..v.len() {
        if !is_top(v, e) {
            continue;
        }
        let (a, b) = (v[e], v[(e + 1) % v.len()]);
        if p.x < b.x || p.x > a.x || (edge_height(a, b, p.x) - p.y).abs() > ON_EDGE {
            continue;
        }
        if a.x > p.x && right.is_none() {
            right = Some(e);
        }
        if b.x < p.x && left.is_none() {
            left = Some(e);
        }
    }
    (left, right)
}

struct Tracer<'a> {
    scene: &'a Scene,
    spec: &'a HeuristicSpec,
    carry: f64,
    path_index: u64,
    rng: Option<ChaCha8Rng>,
    trace: PathTrace,
}

enum Surface {
    Fell(Vec2, Direction),
    Trapped(Vec2),
}

impl Tracer<'_> {
    fn push(&mut self, p: Vec2) -> Result<()> {
        let prev = self.trace.waypoints.last().map(|w| w.point);
        self.trace.waypoints.push(Waypoint {
            point: p,
            against_gravity: prev.is_some_and(|q| p.y > q.y),
        });
        if self.trace.waypoints.len() > self.spec.max_segments {
            return Err(Error::PathCycle {
                limit: self.spec.max_segments,
                scene_seed: self.scene.seed,
            });
        }
        Ok(())
    }

    /// Draws the wrong-direction coin; no random numbers are used when the
    /// noise is zero.
    fn wrong_way(&mut self) -> bool {
        let g = self.spec.g_noise;
        if g <= 0.0 {
            return false;
        }
        let (seed, stream) = (self.spec.seed, self.path_index);
        let rng = self.rng.get_or_insert_with(|| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(stream);
            r
        });
        self.trace.random_draws += 1;
        rng.random::<f64>() < g
    }

    fn decide(&mut self, obstacle: usize, down: Direction) -> Direction {
        let against = self.wrong_way();
        let direction = if against { down.flip() } else { down };
        self.trace.decisions.push(Decision {
            obstacle,
            direction,
            against_gravity: against,
        });
        direction
    }

    fn run(&mut self, start: Vec2) -> Result<()> {
        self.push(start)?;
        let obstacles = &self.scene.obstacles;
        let mut p = start;
        loop {
            let Some((k, y)) = surface_below(obstacles, p) else {
                let end = Vec2::new(p.x, 0.0);
                self.push(end)?;
                self.trace.terminal_x = end.x;
                return Ok(());
            };
            let landing = Vec2::new(p.x, y);
            self.push(landing)?;
            match self.ride(k, landing)? {
                Surface::Trapped(at) => {
                    self.trace.trapped = true;
                    self.trace.terminal_x = at.x;
                    return Ok(());
                }
                Surface::Fell(edge, dir) => match self.carry_from(edge, dir)? {
                    Some(next) => p = next,
                    None => return Ok(()),
                },
            }
        }
    }

    /// Follows obstacle `k` from the surface point `p` to where the particle
    /// leaves it, including landings on other obstacles met while carried.
    fn ride(&mut self, k: usize, p: Vec2) -> Result<Surface> {
        match &self.scene.obstacles[k] {
            Obstacle::Polygon { vertices } => self.ride_polygon(k, vertices, p),
            Obstacle::Circle { center, radius } => self.ride_circle(k, *center, *radius, p),
        }
    }

    fn ride_polygon(&mut self, k: usize, v: &[Vec2], p: Vec2) -> Result<Surface> {
        let n = v.len();
        let (left, right) = edges_at(v, p);
        let rate_left = left.map_or(f64::INFINITY, |e| (p.y - v[(e + 1) % n].y) / (p.x - v[(e + 1) % n].x));
        let rate_right = right.map_or(f64::INFINITY, |e| (p.y - v[e].y) / (v[e].x - p.x));
        let dist_left = left.map_or(0.0, |e| p.x - v[(e + 1) % n].x);
        let dist_right = right.map_or(0.0, |e| v[e].x - p.x);
        let Some(down) = downhill(rate_left, rate_right, dist_left, dist_right) else {
            return Ok(Surface::Trapped(p));
        };
        let dir = self.decide(k, down);
        let against = dir != down;

        let mut edge = match dir {
            Direction::Left => left,
            Direction::Right => right,
        };
        let mut cur = p;
        // Uphill travel is allowed only until the first descent after a
        // wrong-way decision.
        let mut descending = !against;
        while let Some(e) = edge {
            let target = match dir {
                Direction::Right => v[e],
                Direction::Left => v[(e + 1) % n],
            };
            if target.y < cur.y {
                descending = true;
            }
            self.push(target)?;
            cur = target;
            let next = match dir {
                Direction::Right => (e + n - 1) % n,
                Direction::Left => (e + 1) % n,
            };
            if !is_top(v, next) {
                break;
            }
            let ahead = match dir {
                Direction::Right => v[next],
                Direction::Left => v[(next + 1) % n],
            };
            if ahead.y > cur.y && descending {
                return Ok(Surface::Trapped(cur));
            }
            edge = Some(next);
        }
        Ok(Surface::Fell(cur, dir))
    }

    fn ride_circle(&mut self, k: usize, c: Vec2, r: f64, p: Vec2) -> Result<Surface> {
        let down = if p.x > c.x { Direction::Right } else { Direction::Left };
        let dir = self.decide(k, down);
        let start = (p.y - c.y).atan2(p.x - c.x);
        let end = match dir {
            Direction::Right => 0.0,
            Direction::Left => PI,
        };
        if dir != down {
            self.arc(c, r, start, FRAC_PI_2)?;
            self.push(Vec2::new(c.x, c.y + r))?;
            self.arc(c, r, FRAC_PI_2, end)?;
        } else {
            self.arc(c, r, start, end)?;
        }
        let edge = Vec2::new(c.x + dir.sign() * r, c.y);
        self.push(edge)?;
        Ok(Surface::Fell(edge, dir))
    }

    /// Interior polyline points of an arc, for path output only.
    fn arc(&mut self, c: Vec2, r: f64, from: f64, to: f64) -> Result<()> {
        let steps = ((to - from).abs() / (PI / 12.0)).ceil() as usize;
        for i in 1..steps {
            let t = from + (to - from) * i as f64 / steps as f64;
            self.push(c + Vec2::new(t.cos(), t.sin()) * r)?;
        }
        Ok(())
    }

    /// Carries the particle horizontally off an edge. Returns the point from
    /// which it next drops, or `None` if it was trapped; a carry that runs
    /// into another obstacle's top surface becomes a new landing there.
    fn carry_from(&mut self, edge: Vec2, dir: Direction) -> Result<Option<Vec2>> {
        let mut at = edge;
        let mut dir = dir;
        loop {
            if self.carry <= 0.0 {
                return Ok(Some(at));
            }
            let reach = (at.x + dir.sign() * self.carry).clamp(0.0, self.scene.width);
            let dist = (reach - at.x).abs();
            match carry_hit(&self.scene.obstacles, at, dir, dist) {
                None => {
                    let end = Vec2::new(reach, at.y);
                    if end != at {
                        self.push(end)?;
                    }
                    return Ok(Some(end));
                }
                Some((_, q, false)) => {
                    self.push(q)?;
                    return Ok(Some(q));
                }
                Some((k, q, true)) => {
                    self.push(q)?;
                    match self.ride(k, q)? {
                        Surface::Trapped(t) => {
                            self.trace.trapped = true;
                            self.trace.terminal_x = t.x;
                            return Ok(None);
                        }
                        Surface::Fell(e, d) => {
                            at = e;
                            dir = d;
                        }
                    }
                }
            }
        }
    }
}

/// Traces one particle dropped from `start_x` at the height of the liquid's
/// centre. `path_index` selects the random stream.
pub fn trace_particle(start_x: f64, scene: &Scene, spec: &HeuristicSpec, path_index: u64) -> Result<PathTrace> {
    trace_with_carry(start_x, scene, spec, spec.carry, path_index)
}

fn trace_with_carry(
    start_x: f64,
    scene: &Scene,
    spec: &HeuristicSpec,
    carry: f64,
    path_index: u64,
) -> Result<PathTrace> {
    let mut t = Tracer {
        scene,
        spec,
        carry: geom::snap(carry),
        path_index,
        rng: None,
        trace: PathTrace {
            start_x,
            waypoints: Vec::new(),
            terminal_x: start_x,
            decisions: Vec::new(),
            trapped: false,
            random_draws: 0,
        },
    };
    t.run(Vec2::new(start_x, scene.liquid_start.center.y))?;
    Ok(t.trace)
}

/// Equally spaced start positions across the liquid disc's horizontal
/// midline, placed symmetrically about its centre.
pub fn start_positions(scene: &Scene, n: usize) -> Vec<f64> {
    let c = scene.liquid_start.center.x;
    let r = scene.liquid_start.radius();
    (0..n)
        .map(|i| {
            let k = (2 * i + 1) as f64 - n as f64;
            c + geom::snap(k * r / n as f64)
        })
        .collect()
}

/// Traces every path of one carry value.
pub fn trace_paths(scene: &Scene, spec: &HeuristicSpec, carry: f64, exec: Exec) -> Result<Vec<PathTrace>> {
    let starts = start_positions(scene, spec.n_paths);
    exec.map_range(starts.len(), |i| {
        trace_with_carry(starts[i], scene, spec, carry, i as u64)
    })
    .into_iter()
    .collect()
}

/// Fraction of paths ending in the scoring region, pooled over the carry
/// window. Trapped paths count toward the total and `n_stuck`.
pub fn simple_sim_predict(scene: &Scene, spec: &HeuristicSpec) -> Result<Judgment> {
    simple_sim_predict_with(scene, spec, Exec::Sequential)
}

pub fn simple_sim_predict_with(scene: &Scene, spec: &HeuristicSpec, exec: Exec) -> Result<Judgment> {
    spec.validate()?;
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut stuck = 0u64;
    let window = spec.carry_window();
    for &m in &window {
        for path in trace_paths(scene, spec, m, exec)? {
            total += 1;
            if path.trapped {
                stuck += 1;
            } else if scene.bottom.scores(Vec2::new(path.terminal_x, 0.0)) {
                hits += 1;
            }
        }
    }
    Ok(Judgment::from_counts(
        hits,
        total,
        stuck,
        window.len(),
        ModelSpec::SimpleSim(spec.clone()),
    ))
}

/// SimpleSim without carry or noise.
pub fn gravity_heuristic_predict(scene: &Scene) -> Result<Judgment> {
    gravity_heuristic_predict_n(scene, default_paths())
}

pub fn gravity_heuristic_predict_n(scene: &Scene, n_paths: usize) -> Result<Judgment> {
    let spec = HeuristicSpec {
        n_paths,
        ..Default::default()
    };
    let j = simple_sim_predict(scene, &spec)?;
    Ok(Judgment {
        model_id: "gravity".into(),
        params: ModelSpec::Gravity { n_paths },
        ..j
    })
}

/// Writes every path as a polyline: `path,seq,x,y,against_gravity`.
pub fn write_paths<W: Write>(paths: &[PathTrace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path", "seq", "x", "y", "against_gravity"])?;
    for (i, p) in paths.iter().enumerate() {
        for (s, wp) in p.waypoints.iter().enumerate() {
            w.write_record([
                i.to_string(),
                s.to_string(),
                wp.point.x.to_string(),
                wp.point.y.to_string(),
                wp.against_gravity.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("path dump", e))
}
