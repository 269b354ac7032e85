//! Smoothed-particle hydrodynamics engine.
//!
//! Weakly compressible SPH with a linear equation of state, Monaghan-style
//! artificial viscosity scaled by `alpha`, a global velocity damping `zeta`,
//! inelastic sphere–obstacle collisions and an optional sticky contact model.
//! Particles do not collide with each other; only SPH forces couple them.
//!
//! One step runs, in order: density, pressure, forces (with damping),
//! velocity, position, obstacle collisions.

mod grid;
mod kernel;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::collide::Colliders;
pub use crate::collide::Sticky;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scene::Scene;
pub use grid::{NeighborGrid, Pair};
pub use kernel::CubicSpline;
pub use trajectory::TrajectoryWriter;

pub const GRAVITY: Vec2 = Vec2::new(0.0, -9.81);
/// Rest density of the 2D liquid, kg/m².
pub const REST_DENSITY: f64 = 1000.0;
/// Numerical sound speed of the equation of state, m/s.
pub const SOUND_SPEED: f64 = 20.0;
/// Speed above which a run is declared diverged, m/s.
pub const MAX_SPEED: f64 = 100.0;
/// Kernel support radius as a multiple of the initial lattice spacing.
pub const SUPPORT_RATIO: f64 = 1.3;
pub const DEFAULT_DT: f64 = 0.0002;
/// Collision-pass iterations per marble step.
pub const MARBLE_ITERATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluidModel {
    /// SPH particles.
    Ife,
    /// Rigid inelastic spheres.
    Marble,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_duration() -> f64 {
    4.0
}
fn default_settle_speed() -> f64 {
    0.01
}
fn default_settle_time() -> f64 {
    0.1
}

/// Configuration of a particle simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSpec {
    pub model: FluidModel,
    pub n_particles: usize,
    /// Artificial-viscosity coefficient (particle friction).
    #[serde(default)]
    pub alpha: f64,
    /// Velocity damping, 1/s.
    #[serde(default)]
    pub zeta: f64,
    /// Half-width of the damping window averaged by uncertain predictions.
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub sticky: Option<Sticky>,
    /// Kernel support radius; derived from the lattice spacing when absent.
    #[serde(default)]
    pub smoothing_h: Option<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Maximum simulated time, seconds.
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// A run ends early once every speed stays below this for `settle_time`.
    #[serde(default = "default_settle_speed")]
    pub settle_speed: f64,
    #[serde(default = "default_settle_time")]
    pub settle_time: f64,
    /// Tangential friction between marbles.
    #[serde(default)]
    pub marble_friction: f64,
}

impl FluidSpec {
    pub fn ife(n_particles: usize, alpha: f64, zeta: f64) -> Self {
        FluidSpec {
            model: FluidModel::Ife,
            n_particles,
            alpha,
            zeta,
            sigma: 0.0,
            sticky: None,
            smoothing_h: None,
            dt: DEFAULT_DT,
            duration: default_duration(),
            settle_speed: default_settle_speed(),
            settle_time: default_settle_time(),
            marble_friction: 0.0,
        }
    }

    pub fn marble(n_particles: usize, zeta: f64) -> Self {
        FluidSpec {
            model: FluidModel::Marble,
            ..FluidSpec::ife(n_particles, 0.0, zeta)
        }
    }

    pub fn with_zeta(&self, zeta: f64) -> Self {
        FluidSpec { zeta, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n_particles < 1 {
            return bad("n_particles must be at least 1".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return bad(format!("zeta must be >= 0, got {}", self.zeta));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if let Some(s) = &self.sticky {
            for (name, v) in [("normal_damp", s.normal_damp), ("tangent_damp", s.tangent_damp)] {
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("{name} must lie in [0, 1], got {v}"));
                }
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if let Some(h) = self.smoothing_h {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("smoothing_h must be positive, got {h}"));
            }
        }
        if self.model == FluidModel::Marble {
            if self.alpha != 0.0 {
                return bad("marble spec must not set alpha".into());
            }
            if self.sticky.is_some() {
                return bad("marble spec must not be sticky".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub density: f64,
    pub pressure: f64,
    pub mass: f64,
    /// Touched any solid during the last collision pass.
    pub in_contact: bool,
    /// Touched a scene obstacle during the last collision pass.
    pub on_obstacle: bool,
    /// Touched a scene obstacle at some point during the run.
    pub touched_obstacle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub particles: Vec<ParticleState>,
    pub time: f64,
    pub steps: u64,
    /// Initial lattice spacing.
    pub spacing: f64,
    /// Collision radius of every particle (half the spacing).
    pub radius: f64,
    /// Kernel support radius.
    pub h: f64,
}

impl SimState {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.particles.iter().map(|p| p.position).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.mass).sum()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| 0.5 * p.mass * p.velocity.length_squared())
            .sum()
    }

    pub fn center_of_mass(&self) -> Vec2 {
        let m = self.total_mass();
        self.particles
            .iter()
            .fold(Vec2::ZERO, |acc, p| acc + p.position * p.mass)
            / m
    }

    pub fn max_speed(&self) -> f64 {
        self.particles.iter().map(|p| p.velocity.length()).fold(0.0, f64::max)
    }
}

/// Hexagonal lattice points inside a disc, nearest to the centre first.
fn hex_fill(center: Vec2, radius: f64, spacing: f64) -> Vec<Vec2> {
    let row_h = spacing * 3f64.sqrt() * 0.5;
    let rows = (radius / row_h).ceil() as i64 + 1;
    let cols = (radius / spacing).ceil() as i64 + 2;
    let mut pts = Vec::new();
    for j in -rows..=rows {
        let shift = if j.rem_euclid(2) == 1 { 0.5 * spacing } else { 0.0 };
        for i in -cols..=cols {
            let off = Vec2::new(i as f64 * spacing + shift, j as f64 * row_h);
            if off.length() <= radius {
                pts.push((off, j, i));
            }
        }
    }
    pts.sort_by(|a, b| {
        a.0.length_squared()
            .total_cmp(&b.0.length_squared())
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    pts.into_iter().map(|(o, _, _)| center + o).collect()
}

/// Places `n` resting particles on a hexagonal lattice filling the liquid disc.
/// The lattice spacing starts from the disc area per particle and shrinks
/// until `n` sites fit; each particle carries `REST_DENSITY * area / n`.
pub fn init_particles(scene: &Scene, n: usize) -> SimState {
    let n = n.max(1);
    let disc = scene.liquid_start;
    let area = disc.area();
    let mass = REST_DENSITY * area / n as f64;
    let mut spacing = (2.0 * area / (3f64.sqrt() * n as f64)).sqrt();
    let mut sites = hex_fill(disc.center, disc.radius(), spacing);
    while sites.len() < n {
        spacing *= 0.98;
        sites = hex_fill(disc.center, disc.radius(), spacing);
    }
    sites.truncate(n);
    let particles = sites
        .into_iter()
        .map(|p| ParticleState {
            position: p,
            velocity: Vec2::ZERO,
            density: REST_DENSITY,
            pressure: 0.0,
            mass,
            in_contact: false,
            on_obstacle: false,
            touched_obstacle: false,
        })
        .collect();
    SimState {
        particles,
        time: 0.0,
        steps: 0,
        spacing,
        radius: 0.5 * spacing,
        h: SUPPORT_RATIO * spacing,
    }
}

fn density_pass(particles: &mut [ParticleState], pairs: &[Pair], kernel: &CubicSpline) {
    let w0 = kernel.w(0.0);
    for p in particles.iter_mut() {
        p.density = p.mass * w0;
    }
    for pr in pairs {
        let w = kernel.w(pr.r);
        let (i, j) = (pr.i as usize, pr.j as usize);
        particles[i].density += particles[j].mass * w;
        particles[j].density += particles[i].mass * w;
    }
}

fn pressure_pass(particles: &mut [ParticleState]) {
    for p in particles.iter_mut() {
        p.pressure = SOUND_SPEED * SOUND_SPEED * (p.density - REST_DENSITY);
    }
}

/// Monaghan artificial viscosity for one pair; zero for receding pairs.
pub fn artificial_viscosity(alpha: f64, l: f64, xij: Vec2, vij: Vec2, rho_i: f64, rho_j: f64) -> f64 {
    let vr = vij.dot(xij);
    if vr >= 0.0 || alpha == 0.0 {
        return 0.0;
    }
    let mu = l * vr / (xij.length_squared() + 0.01 * l * l);
    let rho_bar = 0.5 * (rho_i + rho_j);
    -alpha * SOUND_SPEED * mu / rho_bar
}

fn force_pass(
    particles: &[ParticleState],
    pairs: &[Pair],
    kernel: &CubicSpline,
    alpha: f64,
    zeta: f64,
    acc: &mut Vec<Vec2>,
) {
    acc.clear();
    acc.resize(particles.len(), GRAVITY);
    let l = kernel.smoothing_length();
    for pr in pairs {
        let (i, j) = (pr.i as usize, pr.j as usize);
        let (a, b) = (&particles[i], &particles[j]);
        if pr.r <= 0.0 {
            continue;
        }
        let grad = pr.xij * (kernel.dw_dr(pr.r) / pr.r);
        let pi_ij = artificial_viscosity(alpha, l, pr.xij, a.velocity - b.velocity, a.density, b.density);
        let term = a.pressure / (a.density * a.density) + b.pressure / (b.density * b.density) + pi_ij;
        acc[i] -= grad * (b.mass * term);
        acc[j] += grad * (a.mass * term);
    }
    if zeta != 0.0 {
        for (a, p) in acc.iter_mut().zip(particles) {
            *a -= p.velocity * zeta;
        }
    }
}

/// Kernel-summed density of every particle, self contribution included.
pub fn compute_density(state: &SimState, h: f64) -> Vec<f64> {
    let kernel = CubicSpline::new(h);
    let mut particles = state.particles.clone();
    let mut pairs = Vec::new();
    NeighborGrid::new().pairs(&state.positions(), h, &mut pairs);
    density_pass(&mut particles, &pairs, &kernel);
    particles.iter().map(|p| p.density).collect()
}

/// Accelerations from pressure, artificial viscosity, gravity and damping,
/// using the densities currently stored in `state`.
pub fn compute_forces(state: &SimState, spec: &FluidSpec) -> Vec<Vec2> {
    let h = spec.smoothing_h.unwrap_or(state.h);
    let kernel = CubicSpline::new(h);
    let mut particles = state.particles.clone();
    pressure_pass(&mut particles);
    let mut pairs = Vec::new();
    NeighborGrid::new().pairs(&state.positions(), h, &mut pairs);
    let mut acc = Vec::new();
    force_pass(&particles, &pairs, &kernel, spec.alpha, spec.zeta, &mut acc);
    acc
}

/// Stepper for one run of either particle model.
#[derive(Debug)]
pub struct Simulation {
    spec: FluidSpec,
    colliders: Colliders,
    kernel: CubicSpline,
    state: SimState,
    grid: NeighborGrid,
    pairs: Vec<Pair>,
    positions: Vec<Vec2>,
    acc: Vec<Vec2>,
}

impl Simulation {
    pub fn new(scene: &Scene, spec: &FluidSpec) -> Result<Self> {
        spec.validate()?;
        let mut state = init_particles(scene, spec.n_particles);
        if let Some(h) = spec.smoothing_h {
            state.h = h;
        }
        Ok(Self::from_state(scene, spec, state))
    }

    /// Continues from an explicit state (its radius and `h` are kept).
    pub fn from_state(scene: &Scene, spec: &FluidSpec, state: SimState) -> Self {
        Simulation {
            spec: spec.clone(),
            colliders: Colliders::new(scene, state.radius),
            kernel: CubicSpline::new(state.h),
            state,
            grid: NeighborGrid::new(),
            pairs: Vec::new(),
            positions: Vec::new(),
            acc: Vec::new(),
        }
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn into_state(self) -> SimState {
        self.state
    }

    pub fn spec(&self) -> &FluidSpec {
        &self.spec
    }

    fn refresh_pairs(&mut self, cutoff: f64) {
        self.positions.clear();
        self.positions.extend(self.state.particles.iter().map(|p| p.position));
        self.grid.pairs(&self.positions, cutoff, &mut self.pairs);
    }

    /// Advances one symplectic-Euler step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.spec.dt;
        match self.spec.model {
            FluidModel::Ife => {
                self.refresh_pairs(self.kernel.support());
                density_pass(&mut self.state.particles, &self.pairs, &self.kernel);
                pressure_pass(&mut self.state.particles);
                force_pass(
                    &self.state.particles,
                    &self.pairs,
                    &self.kernel,
                    self.spec.alpha,
                    self.spec.zeta,
                    &mut self.acc,
                );
            }
            FluidModel::Marble => {
                self.acc.clear();
                self.acc.resize(self.state.particles.len(), GRAVITY);
                if self.spec.zeta != 0.0 {
                    for (a, p) in self.acc.iter_mut().zip(&self.state.particles) {
                        *a -= p.velocity * self.spec.zeta;
                    }
                }
            }
        }
        for (p, a) in self.state.particles.iter_mut().zip(&self.acc) {
            p.velocity += *a * dt;
            p.position += p.velocity * dt;
        }
        if self.spec.model == FluidModel::Marble && self.state.particles.len() > 1 {
            // Candidate pairs with a margin so a pair closing in during the
            // iterations is still seen.
            let reach = 2.0 * self.state.radius * 1.5;
            self.refresh_pairs(reach);
            crate::marble::resolve_pairs(
                &mut self.state.particles,
                &self.pairs,
                self.state.radius,
                self.spec.marble_friction,
                MARBLE_ITERATIONS,
            );
        }
        let sticky = self.spec.sticky.as_ref();
        for p in self.state.particles.iter_mut() {
            let info = self.colliders.resolve(&mut p.position, &mut p.velocity, sticky);
            p.in_contact = info.any;
            p.on_obstacle = info.obstacle;
            p.touched_obstacle |= info.obstacle;
        }
        self.state.steps += 1;
        self.state.time = self.state.steps as f64 * dt;
        for (k, p) in self.state.particles.iter().enumerate() {
            let s2 = p.velocity.length_squared();
            if !(s2.is_finite() && p.position.is_finite()) {
                return Err(Error::Divergence {
                    step: self.state.steps,
                    reason: format!("particle {k} has a non-finite state"),
                });
            }
            if s2 > MAX_SPEED * MAX_SPEED {
                return Err(Error::Divergence {
                    step: self.state.steps,
                    reason: format!("particle {k} exceeded {MAX_SPEED} m/s"),
                });
            }
        }
        Ok(())
    }

    /// Steps until `duration` elapses or the liquid settles, calling
    /// `observe` on the initial state and every `every` steps.
    pub fn run_observed(&mut self, every: Option<u64>, mut observe: impl FnMut(&SimState)) -> Result<()> {
        let max_steps = (self.spec.duration / self.spec.dt).round() as u64;
        let settle_steps = ((self.spec.settle_time / self.spec.dt).round() as u64).max(1);
        let mut calm = 0u64;
        if every.is_some() {
            observe(&self.state);
        }
        while self.state.steps < max_steps {
            self.step()?;
            if let Some(k) = every {
                if k > 0 && self.state.steps.is_multiple_of(k) {
                    observe(&self.state);
                }
            }
            if self.state.max_speed() < self.spec.settle_speed {
                calm += 1;
                if calm >= settle_steps {
                    break;
                }
            } else {
                calm = 0;
            }
        }
        Ok(())
    }

    pub fn run(mut self) -> Result<SimState> {
        self.run_observed(None, |_| {})?;
        Ok(self.state)
    }
}

/// Runs either particle model to its end criterion and returns the final state.
pub fn run_simulation(scene: &Scene, spec: &FluidSpec) -> Result<SimState> {
    Simulation::new(scene, spec)?.run()
}
