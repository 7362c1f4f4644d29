//! Bi-parameter Haar system: tensor Haar functions, forward and inverse
//! transforms, and the coefficient container.
//!
//! A Haar rectangle R = I × J needs both component intervals one level above
//! the finest scale, so it carries h_R = h_I ⊗ h_J with
//! h_I = |I|^{-1/2}(1_{I_left} - 1_{I_right}). The transform projects onto
//! the cancellative span {h_R}; energy outside that span (the global mean
//! and the two per-variable average series) is reported, not kept. Two
//! implementations are provided: `analyze` does the literal cell-sum per
//! rectangle and serves as the correctness oracle, `analyze_fast` runs the
//! separable average-pyramid butterfly. They must agree to 1e-12.

use crate::dyadic::{DyadicInterval, DyadicRectangle, ProductGrid};
use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Finitely supported map from Haar rectangles to coefficients. Absent keys
/// are zero. Keys are validated against the owning grid's resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients {
    grid: ProductGrid,
    map: BTreeMap<DyadicRectangle, f64>,
    discarded_energy: f64,
}

impl HaarCoefficients {
    pub fn new(grid: ProductGrid) -> Self {
        HaarCoefficients { grid, map: BTreeMap::new(), discarded_energy: 0.0 }
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn insert(&mut self, r: DyadicRectangle, value: f64) -> Result<()> {
        self.grid.x.check_depth(r.x.depth as u32 + 1)?;
        self.grid.y.check_depth(r.y.depth as u32 + 1)?;
        if value == 0.0 {
            self.map.remove(&r);
        } else {
            self.map.insert(r, value);
        }
        Ok(())
    }

    pub fn get(&self, r: &DyadicRectangle) -> f64 {
        self.map.get(r).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Deterministic (BTreeMap-ordered) iteration.
    pub fn iter(&self) -> impl Iterator<Item = (&DyadicRectangle, &f64)> {
        self.map.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &DyadicRectangle> {
        self.map.keys()
    }

    /// Σ c(R)², the squared L² norm of the synthesized function (Parseval).
    pub fn energy(&self) -> f64 {
        self.map.values().map(|v| v * v).sum()
    }

    /// Energy of the analyzed input that fell outside the cancellative span.
    pub fn discarded_energy(&self) -> f64 {
        self.discarded_energy
    }

    pub fn scaled(&self, alpha: f64) -> HaarCoefficients {
        let mut out = self.clone();
        out.map.values_mut().for_each(|v| *v *= alpha);
        out.map.retain(|_, v| *v != 0.0);
        out
    }

    pub fn add(&self, other: &HaarCoefficients) -> Result<HaarCoefficients> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("coefficient addition".into()));
        }
        let mut out = self.clone();
        for (r, v) in &other.map {
            let e = out.map.entry(*r).or_insert(0.0);
            *e += v;
        }
        out.map.retain(|_, v| *v != 0.0);
        out.discarded_energy = 0.0;
        Ok(out)
    }

    /// Σ_R c(R) h_R evaluated cellwise.
    pub fn synthesize(&self) -> GridFunction {
        let mut f = GridFunction::zero(self.grid);
        let ny = self.grid.cells_y() as usize;
        for (r, &coeff) in &self.map {
            let mag = coeff * haar_magnitude(r);
            let (sx, lx) = self.grid.x.cell_span(&r.x);
            let (sy, ly) = self.grid.y.cell_span(&r.y);
            let nx = self.grid.cells_x();
            let nyc = self.grid.cells_y();
            for dx in 0..lx {
                let cx = (sx + dx) & (nx - 1);
                let sign_x = if dx < lx / 2 { 1.0 } else { -1.0 };
                for dy in 0..ly {
                    let cy = (sy + dy) & (nyc - 1);
                    let sign_y = if dy < ly / 2 { 1.0 } else { -1.0 };
                    f.values_mut()[cx as usize * ny + cy as usize] += mag * sign_x * sign_y;
                }
            }
        }
        f
    }
}

/// |I|^{-1/2} |J|^{-1/2} for the rectangle's component intervals.
fn haar_magnitude(r: &DyadicRectangle) -> f64 {
    2f64.powf((r.x.depth + r.y.depth) as f64 / 2.0)
}

/// The L²-normalized Haar function of a rectangle, as a grid function.
pub fn haar_function(grid: &ProductGrid, r: &DyadicRectangle) -> Result<GridFunction> {
    grid.x.check_depth(r.x.depth as u32 + 1)?;
    grid.y.check_depth(r.y.depth as u32 + 1)?;
    let mut c = HaarCoefficients::new(*grid);
    c.insert(*r, 1.0)?;
    Ok(c.synthesize())
}

/// Forward transform by literal Riemann sums of f · h_R per rectangle.
/// This is the correctness oracle for `analyze_fast`.
pub fn analyze(f: &GridFunction) -> HaarCoefficients {
    let grid = *f.grid();
    let mut out = HaarCoefficients::new(grid);
    let area = grid.cell_area().to_f64();
    let ny = grid.cells_y() as usize;
    for r in grid.haar_rectangles() {
        let mag = haar_magnitude(&r);
        let (sx, lx) = grid.x.cell_span(&r.x);
        let (sy, ly) = grid.y.cell_span(&r.y);
        let nx = grid.cells_x();
        let nyc = grid.cells_y();
        // Sum the four sign quadrants separately so equal quadrants cancel
        // exactly (constants and coarser Haar functions analyze to 0.0).
        let mut quad = [0.0f64; 4];
        for dx in 0..lx {
            let cx = (sx + dx) & (nx - 1);
            let qx = (dx >= lx / 2) as usize;
            for dy in 0..ly {
                let cy = (sy + dy) & (nyc - 1);
                let qy = (dy >= ly / 2) as usize;
                quad[2 * qx + qy] += f.values()[cx as usize * ny + cy as usize];
            }
        }
        let coeff = ((quad[0] - quad[1]) - (quad[2] - quad[3])) * mag * area;
        if coeff != 0.0 {
            out.map.insert(r, coeff);
        }
    }
    let l2sq = {
        let a = grid.cell_area().to_f64();
        f.values().iter().map(|v| v * v).sum::<f64>() * a
    };
    out.discarded_energy = (l2sq - out.energy()).max(0.0);
    out
}

/// Forward transform via the separable average pyramid: one butterfly pass
/// along x, then one along y on each x-coefficient row.
pub fn analyze_fast(f: &GridFunction) -> HaarCoefficients {
    let grid = *f.grid();
    let dx = grid.x.max_depth as usize;
    let dy = grid.y.max_depth as usize;
    let nx = grid.cells_x() as usize;
    let ny = grid.cells_y() as usize;

    // Stage 1: for every x-interval I, the row y ↦ ⟨f(·, y), h_I⟩_x.
    // Label-space pyramid over x; the shift only rotates the finest layer.
    let mut x_rows: Vec<(DyadicInterval, Vec<f64>)> = Vec::with_capacity(nx - 1);
    let mut level: Vec<Vec<f64>> = (0..nx)
        .map(|k| {
            let cx = (k as u32 + grid.x.shift_cells) & (grid.cells_x() - 1);
            (0..ny).map(|cy| f.values()[cx as usize * ny + cy]).collect()
        })
        .collect();
    for d in (0..dx).rev() {
        let half = 1usize << d;
        let mut coarser: Vec<Vec<f64>> = Vec::with_capacity(half);
        let scale = 2f64.powf(-(d as f64) / 2.0) / 2.0;
        for k in 0..half {
            let left = &level[2 * k];
            let right = &level[2 * k + 1];
            let avg: Vec<f64> =
                (0..ny).map(|c| 0.5 * (left[c] + right[c])).collect();
            let coef: Vec<f64> = (0..ny).map(|c| scale * (left[c] - right[c])).collect();
            x_rows.push((DyadicInterval::new(d as u8, k as u32), coef));
            coarser.push(avg);
        }
        level = coarser;
    }

    // Stage 2: 1-D pyramid over y applied to each x-coefficient row.
    let mut out = HaarCoefficients::new(grid);
    for (ix, row) in x_rows {
        let mut lvl: Vec<f64> = (0..ny)
            .map(|k| row[((k as u32 + grid.y.shift_cells) & (grid.cells_y() - 1)) as usize])
            .collect();
        for d in (0..dy).rev() {
            let half = 1usize << d;
            let scale = 2f64.powf(-(d as f64) / 2.0) / 2.0;
            let mut coarser = Vec::with_capacity(half);
            for k in 0..half {
                let coeff = scale * (lvl[2 * k] - lvl[2 * k + 1]);
                if coeff != 0.0 {
                    out.map.insert(
                        DyadicRectangle::new(ix, DyadicInterval::new(d as u8, k as u32)),
                        coeff,
                    );
                }
                coarser.push(0.5 * (lvl[2 * k] + lvl[2 * k + 1]));
            }
            lvl = coarser;
        }
    }
    let l2sq = {
        let a = grid.cell_area().to_f64();
        f.values().iter().map(|v| v * v).sum::<f64>() * a
    };
    out.discarded_energy = (l2sq - out.energy()).max(0.0);
    out
}

/// One JSON entry of the coefficient file format.
#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    x_depth: u8,
    x_index: u32,
    y_depth: u8,
    y_index: u32,
    value: f64,
}

impl HaarCoefficients {
    pub fn to_json(&self) -> String {
        let entries: Vec<CoeffEntry> = self
            .map
            .iter()
            .map(|(r, &v)| CoeffEntry {
                x_depth: r.x.depth,
                x_index: r.x.index,
                y_depth: r.y.depth,
                y_index: r.y.index,
                value: v,
            })
            .collect();
        serde_json::to_string(&entries).expect("coefficients serialize")
    }

    pub fn from_json(grid: ProductGrid, s: &str) -> Result<HaarCoefficients> {
        let entries: Vec<CoeffEntry> =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        let mut out = HaarCoefficients::new(grid);
        for e in entries {
            let r = DyadicRectangle::new(
                DyadicInterval::new(e.x_depth, e.x_index),
                DyadicInterval::new(e.y_depth, e.y_index),
            );
            let prior = out.get(&r);
            out.insert(r, prior + e.value)?;
        }
        Ok(out)
    }
}
