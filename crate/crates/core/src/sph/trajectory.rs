use std::io::Write;

use super::SimState;
use crate::error::Result;

/// Long-format trajectory CSV: one row per particle per sample.
pub struct TrajectoryWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut out = csv::Writer::from_writer(inner);
        out.write_record(["time", "particle", "x", "y", "vx", "vy"])?;
        Ok(TrajectoryWriter { out })
    }

    pub fn record(&mut self, state: &SimState) -> Result<()> {
        let t = state.time.to_string();
        for (i, p) in state.particles.iter().enumerate() {
            self.out.write_record([
                t.clone(),
                i.to_string(),
                p.position.x.to_string(),
                p.position.y.to_string(),
                p.velocity.x.to_string(),
                p.velocity.y.to_string(),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush().map_err(|e| crate::Error::io("trajectory", e))?;
        self.out
            .into_inner()
            .map_err(|e| crate::Error::Data(format!("flushing trajectory: {e}")))
    }
}
