//! Marble model: the particle scaffolding of the SPH engine with SPH forces
//! replaced by inelastic rigid-sphere contacts between particles.

use crate::error::{Error, Result};
use crate::scene::Scene;
use crate::sph::{FluidModel, FluidSpec, NeighborGrid, Pair, ParticleState, SimState, Simulation};

/// Resolves overlapping sphere pairs: each sphere moves half the overlap
/// apart along the centre line and the approaching normal velocity is removed
/// (restitution 0). `friction` scales down relative tangential velocity.
/// Pairs are visited in index order, `iterations` times.
pub fn resolve_pairs(
    particles: &mut [ParticleState],
    candidates: &[Pair],
    radius: f64,
    friction: f64,
    iterations: usize,
) {
    let contact = 2.0 * radius;
    for _ in 0..iterations {
        for pr in candidates {
            let (i, j) = (pr.i as usize, pr.j as usize);
            let d = particles[i].position - particles[j].position;
            let r = d.length();
            if r >= contact || r == 0.0 {
                continue;
            }
            let n = d / r;
            let push = n * (0.5 * (contact - r));
            particles[i].position += push;
            particles[j].position -= push;

            let rel = particles[i].velocity - particles[j].velocity;
            let vn = rel.dot(n);
            if vn < 0.0 {
                // Equal masses: split the normal impulse evenly.
                let dv = n * (0.5 * vn);
                particles[i].velocity -= dv;
                particles[j].velocity += dv;
            }
            if friction > 0.0 {
                let rel = particles[i].velocity - particles[j].velocity;
                let vt = rel - n * rel.dot(n);
                let dv = vt * (0.5 * friction.min(1.0));
                particles[i].velocity -= dv;
                particles[j].velocity += dv;
            }
        }
    }
}

/// One standalone collision pass over the current state.
pub fn resolve_particle_collisions(state: &mut SimState, friction: f64) {
    let positions = state.positions();
    let mut pairs = Vec::new();
    NeighborGrid::new().pairs(&positions, 2.0 * state.radius * 1.5, &mut pairs);
    resolve_pairs(
        &mut state.particles,
        &pairs,
        state.radius,
        friction,
        crate::sph::MARBLE_ITERATIONS,
    );
}

pub fn run_marble_sim(scene: &Scene, spec: &FluidSpec) -> Result<SimState> {
    if spec.model != FluidModel::Marble {
        return Err(Error::InvalidSpec("run_marble_sim needs model = marble".into()));
    }
    Simulation::new(scene, spec)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::sph::init_particles;

    fn pair_state(gap: f64, v: f64) -> SimState {
        let s = Scene::empty_divider(0);
        let mut st = init_particles(&s, 1);
        st.radius = 0.01;
        let mut b = st.particles[0];
        b.position.x += gap;
        st.particles[0].velocity = Vec2::new(v, 0.0);
        b.velocity = Vec2::new(-v, 0.0);
        st.particles.push(b);
        st
    }

    #[test]
    fn separated_pair_unchanged() {
        let mut st = pair_state(0.05, 0.0);
        let before = st.clone();
        resolve_particle_collisions(&mut st, 0.0);
        assert_eq!(st, before);
    }

    #[test]
    fn overlap_split_evenly() {
        let mut st = pair_state(0.015, 0.0);
        let (a, b) = (st.particles[0].position, st.particles[1].position);
        resolve_pairs(
            &mut st.particles,
            &[Pair {
                i: 0,
                j: 1,
                r: 0.015,
                xij: a - b,
            }],
            0.01,
            0.0,
            1,
        );
        let d = 0.02 - 0.015;
        assert!((st.particles[0].position.x - (a.x - d / 2.0)).abs() < 1e-15);
        assert!((st.particles[1].position.x - (b.x + d / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn head_on_collision_is_perfectly_inelastic() {
        let mut st = pair_state(0.019, 1.5);
        resolve_particle_collisions(&mut st, 0.0);
        assert_eq!(st.particles[0].velocity.x, 0.0);
        assert_eq!(st.particles[1].velocity.x, 0.0);
    }
}
