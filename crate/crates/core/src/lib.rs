//! Particle-based liquid prediction: scene generation, SPH and marble
//! simulation, path-tracing heuristics, judgments and statistics.

pub mod analysis;
pub mod collide;
pub mod error;
pub mod exec;
pub mod geom;
pub mod heuristic;
pub mod marble;
pub mod predict;
pub mod scene;
pub mod sph;

pub use error::{Error, Result};
pub use exec::Exec;
