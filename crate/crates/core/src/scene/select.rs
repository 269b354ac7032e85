//! Coarse-simulation scene filtering and contrastive scene selection.

use serde::{Deserialize, Serialize};

use super::Scene;
use crate::analysis::pearson;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::predict::{deterministic_predict, ModelSpec};
use crate::sph::{run_simulation, FluidSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub probe: FluidSpec,
    /// Largest tolerated fraction of particles ending above the basins.
    pub trap_threshold: f64,
    /// Smallest fraction of particles that must touch an obstacle.
    pub interaction_threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            probe: FluidSpec::ife(15, 0.01, 0.0),
            trap_threshold: 0.1,
            interaction_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    NoInteraction,
    Trapped,
    Unstable,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RejectReason::NoInteraction => "no-interaction",
            RejectReason::Trapped => "trapped",
            RejectReason::Unstable => "unstable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict", content = "reason")]
pub enum FilterVerdict {
    Accept,
    Reject(RejectReason),
}

impl FilterVerdict {
    pub fn accepted(self) -> bool {
        self == FilterVerdict::Accept
    }
}

/// Runs the coarse probe and rejects scenes where the liquid mostly misses
/// the obstacles or stays caught above the basins.
pub fn filter_scene(scene: &Scene, config: &FilterConfig) -> Result<FilterVerdict> {
    let state = match run_simulation(scene, &config.probe) {
        Ok(s) => s,
        Err(Error::Divergence { step, reason }) => {
            log::debug!("scene {} unstable at step {step}: {reason}", scene.seed);
            return Ok(FilterVerdict::Reject(RejectReason::Unstable));
        }
        Err(e) => return Err(e),
    };
    let n = state.len() as f64;
    let touched = state.particles.iter().filter(|p| p.touched_obstacle).count() as f64;
    let top = scene.bottom.basin_top();
    let high = state.particles.iter().filter(|p| p.position.y > top).count() as f64;
    Ok(if touched / n < config.interaction_threshold {
        FilterVerdict::Reject(RejectReason::NoInteraction)
    } else if high / n > config.trap_threshold {
        FilterVerdict::Reject(RejectReason::Trapped)
    } else {
        FilterVerdict::Accept
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveSelection {
    /// Indices into the candidate list, most divergent first.
    pub indices: Vec<usize>,
    /// Judgments of every candidate under each spec.
    pub j_a: Vec<f64>,
    pub j_b: Vec<f64>,
    pub mean_divergence: f64,
    /// Correlation of the two specs over the selected scenes; `None` when
    /// undefined because one side has no variance.
    pub correlation: Option<f64>,
}

impl ContrastiveSelection {
    pub fn selected_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.indices.iter().map(|&i| (self.j_a[i], self.j_b[i]))
    }
}

/// Picks the `k` candidates whose judgments under the two specs differ the
/// most. Ties keep candidate order.
pub fn select_contrastive_scenes(
    scenes: &[Scene],
    spec_a: &ModelSpec,
    spec_b: &ModelSpec,
    k: usize,
    exec: Exec,
) -> Result<ContrastiveSelection> {
    if k > scenes.len() {
        return Err(Error::InvalidScene(format!(
            "cannot select {k} scenes from {} candidates",
            scenes.len()
        )));
    }
    let jobs: Vec<(usize, &ModelSpec)> = (0..scenes.len()).flat_map(|i| [(i, spec_a), (i, spec_b)]).collect();
    let js = exec
        .map(&jobs, |&(i, spec)| deterministic_predict(&scenes[i], spec).map(|j| j.j))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let j_a: Vec<f64> = js.iter().step_by(2).copied().collect();
    let j_b: Vec<f64> = js.iter().skip(1).step_by(2).copied().collect();
    select_from_judgments(j_a, j_b, k)
}

/// Selection from precomputed judgments.
pub fn select_from_judgments(j_a: Vec<f64>, j_b: Vec<f64>, k: usize) -> Result<ContrastiveSelection> {
    if j_a.len() != j_b.len() {
        return Err(Error::Data("judgment vectors differ in length".into()));
    }
    if k > j_a.len() {
        return Err(Error::InvalidScene(format!(
            "cannot select {k} scenes from {} candidates",
            j_a.len()
        )));
    }
    let mut order: Vec<usize> = (0..j_a.len()).collect();
    order.sort_by(|&x, &y| {
        let dx = (j_a[x] - j_b[x]).abs();
        let dy = (j_a[y] - j_b[y]).abs();
        dy.total_cmp(&dx)
    });
    order.truncate(k);
    let mean_divergence = if k == 0 {
        0.0
    } else {
        order.iter().map(|&i| (j_a[i] - j_b[i]).abs()).sum::<f64>() / k as f64
    };
    let xa: Vec<f64> = order.iter().map(|&i| j_a[i]).collect();
    let xb: Vec<f64> = order.iter().map(|&i| j_b[i]).collect();
    let correlation = pearson(&xa, &xb).ok();
    if correlation.is_none() {
        log::warn!("correlation over the selected scenes is undefined");
    }
    Ok(ContrastiveSelection {
        indices: order,
        j_a,
        j_b,
        mean_divergence,
        correlation,
    })
}
