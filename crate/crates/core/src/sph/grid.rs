//! Uniform-grid neighbor search producing an ordered pair list.

use crate::geom::Vec2;

/// Interacting pair `i < j` with separation `xij = x_i - x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: u32,
    pub j: u32,
    pub r: f64,
    pub xij: Vec2,
}

#[derive(Debug, Default, Clone)]
pub struct NeighborGrid {
    cell_start: Vec<u32>,
    sorted: Vec<u32>,
    cell_of: Vec<u32>,
}

impl NeighborGrid {
    pub fn new() -> Self {
        Self::default()
    }

    /// Collects all pairs closer than `cutoff` (strict), sorted by `(i, j)`.
    pub fn pairs(&mut self, positions: &[Vec2], cutoff: f64, out: &mut Vec<Pair>) {
        out.clear();
        let n = positions.len();
        if n < 2 {
            return;
        }
        let mut min = positions[0];
        let mut max = positions[0];
        for p in positions {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        let inv = 1.0 / cutoff;
        let nx = (((max.x - min.x) * inv) as usize + 1).min(1 << 15);
        let ny = (((max.y - min.y) * inv) as usize + 1).min(1 << 15);
        let ncell = nx * ny;
        let cell = |p: Vec2| -> (usize, usize) {
            let cx = (((p.x - min.x) * inv) as usize).min(nx - 1);
            let cy = (((p.y - min.y) * inv) as usize).min(ny - 1);
            (cx, cy)
        };

        self.cell_start.clear();
        self.cell_start.resize(ncell + 1, 0);
        self.cell_of.clear();
        for p in positions {
            let (cx, cy) = cell(*p);
            let c = cy * nx + cx;
            self.cell_of.push(c as u32);
            self.cell_start[c + 1] += 1;
        }
        for c in 0..ncell {
            self.cell_start[c + 1] += self.cell_start[c];
        }
        self.sorted.clear();
        self.sorted.resize(n, 0);
        let mut fill = self.cell_start.clone();
        for (i, &c) in self.cell_of.iter().enumerate() {
            let slot = &mut fill[c as usize];
            self.sorted[*slot as usize] = i as u32;
            *slot += 1;
        }

        let cut2 = cutoff * cutoff;
        for i in 0..n {
            let pi = positions[i];
            let (cx, cy) = cell(pi);
            let x0 = cx.saturating_sub(1);
            let x1 = (cx + 1).min(nx - 1);
            let y0 = cy.saturating_sub(1);
            let y1 = (cy + 1).min(ny - 1);
            let start = out.len();
            for yy in y0..=y1 {
                let row = yy * nx;
                let a = self.cell_start[row + x0] as usize;
                let b = self.cell_start[row + x1 + 1] as usize;
                for &j in &self.sorted[a..b] {
                    let j = j as usize;
                    if j <= i {
                        continue;
                    }
                    let xij = pi - positions[j];
                    let r2 = xij.length_squared();
                    if r2 < cut2 {
                        out.push(Pair {
                            i: i as u32,
                            j: j as u32,
                            r: r2.sqrt(),
                            xij,
                        });
                    }
                }
            }
            out[start..].sort_unstable_by_key(|p| p.j);
        }
    }
}
