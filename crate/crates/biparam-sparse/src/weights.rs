//! Weights, their A_p and A_∞ characteristics, and weighted norms.
//!
//! The A_p characteristic is the literal sup over all grid rectangles of
//! (w)_R ((w^{1-p'})_R)^{p-1}. The bi-parameter A_∞ quantity is the largest
//! one-dimensional dyadic Fujii–Wilson constant over all rows and columns of
//! the grid, which is the uniformly-in-each-variable formulation.

use crate::dyadic::{AxisGrid, DyadicInterval, ProductGrid};
use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use std::collections::BTreeMap;
use std::sync::Mutex;

/// A strictly positive density on the grid cells, with computed A_p
/// characteristics cached per exponent.
#[derive(Debug)]
pub struct Weight {
    density: GridFunction,
    ap_cache: Mutex<BTreeMap<u64, f64>>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        Weight {
            density: self.density.clone(),
            ap_cache: Mutex::new(self.ap_cache.lock().expect("ap cache").clone()),
        }
    }
}

impl Weight {
    pub fn new(density: GridFunction) -> Result<Self> {
        for (i, &v) in density.values().iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidWeight { cell: i, value: v });
            }
        }
        Ok(Weight { density, ap_cache: Mutex::new(BTreeMap::new()) })
    }

    pub fn constant(grid: ProductGrid, c: f64) -> Result<Self> {
        Weight::new(GridFunction::constant(grid, c))
    }

    /// w(x, y) = x^{a1} y^{a2} sampled at cell centers.
    pub fn power(grid: ProductGrid, a1: f64, a2: f64) -> Result<Self> {
        Weight::new(GridFunction::from_cell_centers(grid, |x, y| {
            x.powf(a1) * y.powf(a2)
        }))
    }

    /// Two-valued step in x: `left` on [0, 1/2), `right` on [1/2, 1).
    pub fn step_x(grid: ProductGrid, left: f64, right: f64) -> Result<Self> {
        Weight::new(GridFunction::from_cell_centers(grid, |x, _| {
            if x < 0.5 {
                left
            } else {
                right
            }
        }))
    }

    /// Two-valued step in y.
    pub fn step_y(grid: ProductGrid, bottom: f64, top: f64) -> Result<Self> {
        Weight::new(GridFunction::from_cell_centers(grid, |_, y| {
            if y < 0.5 {
                bottom
            } else {
                top
            }
        }))
    }

    /// exp(uniform) per cell with dynamic range clamped to `range` (≥ 1).
    pub fn log_random(grid: ProductGrid, seed: u64, range: f64) -> Result<Self> {
        let half_log = range.max(1.0).ln() / 2.0;
        let mut gen = crate::rng::SplitMix64::new(seed);
        let values: Vec<f64> = (0..grid.cell_count())
            .map(|_| (gen.next_in(-half_log, half_log)).exp())
            .collect();
        Weight::new(GridFunction::from_values(grid, values)?)
    }

    pub fn density(&self) -> &GridFunction {
        &self.density
    }

    pub fn grid(&self) -> &ProductGrid {
        self.density.grid()
    }

    /// The same density on a grid refined by `extra` levels per axis: cell
    /// values replicate, so averages over existing rectangles are unchanged.
    pub fn refine(&self, extra: u8) -> Result<Weight> {
        let g = *self.grid();
        let fine = ProductGrid::new(
            g.x.max_depth + extra,
            g.y.max_depth + extra,
            g.x.shift_cells << extra,
            g.y.shift_cells << extra,
        )?;
        let factor = 1u32 << extra;
        let ny_old = g.cells_y();
        let mut values = Vec::with_capacity(fine.cell_count());
        for cx in 0..fine.cells_x() {
            for cy in 0..fine.cells_y() {
                let ox = cx / factor;
                let oy = cy / factor;
                values.push(self.density.values()[(ox * ny_old + oy) as usize]);
            }
        }
        Weight::new(GridFunction::from_values(fine, values)?)
    }

    /// `[w]_{A_p}` = sup_R (w)_R ((w^{1-p'})_R)^{p-1}, p > 1. Cached per p.
    pub fn ap_characteristic(&self, p: f64) -> Result<f64> {
        if p <= 1.0 {
            return Err(Error::InvalidParameter(format!("A_p needs p > 1, got {p}")));
        }
        if let Some(&hit) = self.ap_cache.lock().expect("ap cache").get(&p.to_bits()) {
            return Ok(hit);
        }
        // 1 - p' = -1/(p-1)
        let dual_exp = -1.0 / (p - 1.0);
        let grid = *self.grid();
        let w_table = self.density.prefix_sums();
        let sigma = self.density.map(|v| v.powf(dual_exp));
        let sigma_table = sigma.prefix_sums();
        let mut sup = 0.0f64;
        for r in grid.rectangles() {
            let aw = w_table.rect_average(&r);
            let asig = sigma_table.rect_average(&r);
            sup = sup.max(aw * asig.powf(p - 1.0));
        }
        self.ap_cache.lock().expect("ap cache").insert(p.to_bits(), sup);
        Ok(sup)
    }

    /// Largest 1-D dyadic Fujii–Wilson constant over rows and columns.
    pub fn ainfty_characteristic(&self) -> f64 {
        let grid = *self.grid();
        let mut sup = 0.0f64;
        // Rows: fix a y-cell, sweep x with the x-axis grid.
        for cy in 0..grid.cells_y() {
            let row: Vec<f64> =
                (0..grid.cells_x()).map(|cx| self.density.at(cx, cy)).collect();
            sup = sup.max(fujii_wilson_1d(&row, grid.x));
        }
        // Columns: fix an x-cell, sweep y.
        for cx in 0..grid.cells_x() {
            let col: Vec<f64> =
                (0..grid.cells_y()).map(|cy| self.density.at(cx, cy)).collect();
            sup = sup.max(fujii_wilson_1d(&col, grid.y));
        }
        sup
    }

    /// ‖f‖_{L^p(w)} = (Σ |f|^p w · cell_area)^{1/p}, p ≥ 1.
    pub fn weighted_norm(&self, f: &GridFunction, p: f64) -> Result<f64> {
        if p < 1.0 {
            return Err(Error::InvalidParameter(format!("L^p needs p ≥ 1, got {p}")));
        }
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch("weighted norm".into()));
        }
        let area = self.grid().cell_area().to_f64();
        let sum: f64 = f
            .values()
            .iter()
            .zip(self.density.values())
            .map(|(&v, &w)| v.abs().powf(p) * w)
            .sum();
        Ok((sum * area).powf(1.0 / p))
    }
}

/// 1-D dyadic Fujii–Wilson constant of a cell-value slice on `axis`:
/// sup_I (1/w(I)) Σ_{x∈I} M(w 1_I)(x), with M the dyadic maximal operator
/// over the same axis grid.
pub fn fujii_wilson_1d(values: &[f64], axis: AxisGrid) -> f64 {
    let n = axis.cells() as usize;
    debug_assert_eq!(values.len(), n);
    let mut sup = 0.0f64;
    for iv in axis.intervals() {
        let (start, len) = axis.cell_span(&iv);
        let cells: Vec<u32> =
            (0..len).map(|d| (start + d) & (axis.cells() - 1)).collect();
        let w_total: f64 = cells.iter().map(|&c| values[c as usize]).sum();
        if w_total <= 0.0 {
            continue;
        }
        // masked = w·1_I; dyadic maximal of masked at each cell of I.
        let mut maximal_sum = 0.0f64;
        for &c in &cells {
            let mut best = 0.0f64;
            for d in 0..=axis.max_depth {
                let j = axis.interval_containing(c, d);
                let (js, jl) = axis.cell_span(&j);
                let mut acc = 0.0;
                for t in 0..jl {
                    let cc = (js + t) & (axis.cells() - 1);
                    // membership of cc in I
                    let rel = (cc.wrapping_sub(start)) & (axis.cells() - 1);
                    if rel < len {
                        acc += values[cc as usize];
                    }
                }
                best = best.max(acc / jl as f64);
            }
            maximal_sum += best;
        }
        sup = sup.max(maximal_sum / w_total);
    }
    sup
}

/// The unique dyadic interval of `axis` at `depth` containing `cell`,
/// re-exported for slice diagnostics.
pub fn slice_interval(axis: AxisGrid, cell: u32, depth: u8) -> DyadicInterval {
    axis.interval_containing(cell, depth)
}
