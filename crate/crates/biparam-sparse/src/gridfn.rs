//! Piecewise-constant functions on the finest cells of a product grid.
//!
//! Storage is row-major with x as the slow axis: value of cell (cx, cy) sits
//! at `values[cx * cells_y + cy]`. Integrals against finest-scale indicators
//! are plain sums times the exact cell area. Rectangle averages go through a
//! prefix-sum table so sweeps over all rectangles stay cheap.

use crate::cells::CellSet;
use crate::dyadic::{DyadicRectangle, ProductGrid};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: ProductGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zero(grid: ProductGrid) -> Self {
        GridFunction { grid, values: vec![0.0; grid.cell_count()] }
    }

    pub fn constant(grid: ProductGrid, value: f64) -> Self {
        GridFunction { grid, values: vec![value; grid.cell_count()] }
    }

    pub fn from_values(grid: ProductGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} cell values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Evaluate a closure at every cell center.
    pub fn from_cell_centers(grid: ProductGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let nx = grid.cells_x();
        let ny = grid.cells_y();
        let hx = 1.0 / nx as f64;
        let hy = 1.0 / ny as f64;
        let mut values = Vec::with_capacity(grid.cell_count());
        for cx in 0..nx {
            let x = (cx as f64 + 0.5) * hx;
            for cy in 0..ny {
                let y = (cy as f64 + 0.5) * hy;
                values.push(f(x, y));
            }
        }
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, cx: u32, cy: u32) -> f64 {
        self.values[cx as usize * self.grid.cells_y() as usize + cy as usize]
    }

    #[inline]
    pub fn set(&mut self, cx: u32, cy: u32, v: f64) {
        self.values[cx as usize * self.grid.cells_y() as usize + cy as usize] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        debug_assert_eq!(self.grid, other.grid);
        GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// ∫ f over the whole square, exact Riemann sum over cells.
    pub fn integral(&self) -> f64 {
        let area = self.grid.cell_area().to_f64();
        self.values.iter().sum::<f64>() * area
    }

    /// L^p norm, p ≥ 1.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let area = self.grid.cell_area().to_f64();
        (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * area).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let area = self.grid.cell_area().to_f64();
        (self.values.iter().map(|v| v * v).sum::<f64>() * area).sqrt()
    }

    /// Exact measure of the strict super-level set {f > λ}.
    pub fn superlevel_set(&self, lambda: f64) -> CellSet {
        let mut s = CellSet::empty(self.grid);
        for (idx, &v) in self.values.iter().enumerate() {
            if v > lambda {
                s.insert_cell(idx);
            }
        }
        s
    }

    /// Prefix-sum table for O(1) unwrapped block sums.
    pub fn prefix_sums(&self) -> PrefixTable {
        PrefixTable::build(self)
    }
}

/// Inclusive 2-D prefix sums: `sum(cx_lo..cx_hi, cy_lo..cy_hi)` of cell
/// values, with torus-wrapped rectangle sums decomposed into ≤ 4 blocks.
pub struct PrefixTable {
    grid: ProductGrid,
    // (nx+1) x (ny+1), row-major with x slow.
    table: Vec<f64>,
}

impl PrefixTable {
    fn build(f: &GridFunction) -> Self {
        let nx = f.grid.cells_x() as usize;
        let ny = f.grid.cells_y() as usize;
        let mut table = vec![0.0; (nx + 1) * (ny + 1)];
        for cx in 0..nx {
            for cy in 0..ny {
                let v = f.values[cx * ny + cy];
                table[(cx + 1) * (ny + 1) + (cy + 1)] = v
                    + table[cx * (ny + 1) + (cy + 1)]
                    + table[(cx + 1) * (ny + 1) + cy]
                    - table[cx * (ny + 1) + cy];
            }
        }
        PrefixTable { grid: f.grid, table }
    }

    #[inline]
    fn block(&self, x0: u32, x1: u32, y0: u32, y1: u32) -> f64 {
        let ny1 = self.grid.cells_y() as usize + 1;
        let (x0, x1, y0, y1) = (x0 as usize, x1 as usize, y0 as usize, y1 as usize);
        self.table[x1 * ny1 + y1] - self.table[x0 * ny1 + y1] - self.table[x1 * ny1 + y0]
            + self.table[x0 * ny1 + y0]
    }

    /// Sum of cell values over a (possibly wrapped) rectangle.
    pub fn rect_sum(&self, r: &DyadicRectangle) -> f64 {
        let (sx, lx) = self.grid.x.cell_span(&r.x);
        let (sy, ly) = self.grid.y.cell_span(&r.y);
        let nx = self.grid.cells_x();
        let ny = self.grid.cells_y();
        let x_parts: [(u32, u32); 2] = if sx + lx <= nx {
            [(sx, sx + lx), (0, 0)]
        } else {
            [(sx, nx), (0, sx + lx - nx)]
        };
        let y_parts: [(u32, u32); 2] = if sy + ly <= ny {
            [(sy, sy + ly), (0, 0)]
        } else {
            [(sy, ny), (0, sy + ly - ny)]
        };
        let mut total = 0.0;
        for &(x0, x1) in &x_parts {
            if x0 == x1 {
                continue;
            }
            for &(y0, y1) in &y_parts {
                if y0 == y1 {
                    continue;
                }
                total += self.block(x0, x1, y0, y1);
            }
        }
        total
    }

    /// Integral of f over the rectangle (sum × cell area).
    pub fn rect_integral(&self, r: &DyadicRectangle) -> f64 {
        self.rect_sum(r) * self.grid.cell_area().to_f64()
    }

    /// Average of f over the rectangle.
    pub fn rect_average(&self, r: &DyadicRectangle) -> f64 {
        self.rect_sum(r) / self.grid.rect_cells(r) as f64
    }
}

/// JSON form of a grid function: shifts as exact dyadic values.
#[derive(Serialize, Deserialize)]
struct GridFunctionJson {
    max_depth_x: u8,
    max_depth_y: u8,
    shift_x: f64,
    shift_y: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn to_json(&self) -> String {
        let j = GridFunctionJson {
            max_depth_x: self.grid.x.max_depth,
            max_depth_y: self.grid.y.max_depth,
            shift_x: self.grid.x.shift().to_f64(),
            shift_y: self.grid.y.shift().to_f64(),
            values: self.values.clone(),
        };
        serde_json::to_string(&j).expect("grid function serializes")
    }

    pub fn from_json(s: &str) -> Result<GridFunction> {
        let j: GridFunctionJson =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        let sx = (j.shift_x * (1u64 << j.max_depth_x) as f64).round() as u32;
        let sy = (j.shift_y * (1u64 << j.max_depth_y) as f64).round() as u32;
        let grid = ProductGrid::new(j.max_depth_x, j.max_depth_y, sx, sy)?;
        GridFunction::from_values(grid, j.values)
    }

    /// Flat binary layout: two u32 depth headers, two u64 shift numerators,
    /// then the cell doubles, all little-endian.
    pub fn write_binary(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(&(self.grid.x.max_depth as u32).to_le_bytes())?;
        w.write_all(&(self.grid.y.max_depth as u32).to_le_bytes())?;
        w.write_all(&(self.grid.x.shift_cells as u64).to_le_bytes())?;
        w.write_all(&(self.grid.y.shift_cells as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<GridFunction> {
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let io = |e: std::io::Error| Error::Format(e.to_string());
        r.read_exact(&mut b4).map_err(io)?;
        let dx = u32::from_le_bytes(b4);
        r.read_exact(&mut b4).map_err(io)?;
        let dy = u32::from_le_bytes(b4);
        r.read_exact(&mut b8).map_err(io)?;
        let sx = u64::from_le_bytes(b8);
        r.read_exact(&mut b8).map_err(io)?;
        let sy = u64::from_le_bytes(b8);
        if dx > 24 || dy > 24 {
            return Err(Error::Format(format!("implausible depths ({dx},{dy})")));
        }
        let grid = ProductGrid::new(dx as u8, dy as u8, sx as u32, sy as u32)?;
        let n = grid.cell_count();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8).map_err(io)?;
            values.push(f64::from_le_bytes(b8));
        }
        GridFunction::from_values(grid, values)
    }
}
