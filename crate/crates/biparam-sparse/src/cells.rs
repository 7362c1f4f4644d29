//! Bitsets over finest grid cells, with exact measures.
//!
//! Cell index layout is x-major: cell (cx, cy) lives at `cx * cells_y + cy`,
//! matching the row-major layout of [`crate::gridfn::GridFunction`]. All set
//! measures are popcounts times the exact cell area, so sparsity checks never
//! touch floating point.

use crate::dyadic::{DyadicRectangle, ProductGrid};
use crate::exact::DyadicRat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    grid: ProductGrid,
    bits: Vec<u64>,
}

impl CellSet {
    pub fn empty(grid: ProductGrid) -> Self {
        let words = grid.cell_count().div_ceil(64);
        CellSet { grid, bits: vec![0; words] }
    }

    pub fn full(grid: ProductGrid) -> Self {
        let mut s = CellSet::empty(grid);
        let n = grid.cell_count();
        for (w, word) in s.bits.iter_mut().enumerate() {
            let lo = w * 64;
            if lo + 64 <= n {
                *word = u64::MAX;
            } else if lo < n {
                *word = (1u64 << (n - lo)) - 1;
            }
        }
        s
    }

    pub fn from_rect(grid: ProductGrid, r: &DyadicRectangle) -> Self {
        let mut s = CellSet::empty(grid);
        s.insert_rect(r);
        s
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    #[inline]
    pub fn cell_index(&self, cx: u32, cy: u32) -> usize {
        cx as usize * self.grid.cells_y() as usize + cy as usize
    }

    #[inline]
    pub fn contains_cell(&self, idx: usize) -> bool {
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn insert_cell(&mut self, idx: usize) {
        self.bits[idx / 64] |= 1u64 << (idx % 64);
    }

    /// Visit each (cx, cy) cell of a rectangle, honoring torus wrap.
    fn for_each_rect_cell(&self, r: &DyadicRectangle, mut f: impl FnMut(u32, u32)) {
        let (sx, lx) = self.grid.x.cell_span(&r.x);
        let (sy, ly) = self.grid.y.cell_span(&r.y);
        let nx = self.grid.cells_x();
        let ny = self.grid.cells_y();
        for dx in 0..lx {
            let cx = (sx + dx) & (nx - 1);
            for dy in 0..ly {
                let cy = (sy + dy) & (ny - 1);
                f(cx, cy);
            }
        }
    }

    pub fn insert_rect(&mut self, r: &DyadicRectangle) {
        let mut cells = Vec::new();
        self.for_each_rect_cell(r, |cx, cy| cells.push((cx, cy)));
        for (cx, cy) in cells {
            let idx = self.cell_index(cx, cy);
            self.insert_cell(idx);
        }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Exact measure: popcount × cell area.
    pub fn measure(&self) -> DyadicRat {
        DyadicRat::new(
            self.count(),
            (self.grid.x.max_depth + self.grid.y.max_depth) as u32,
        )
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        debug_assert_eq!(self.grid, other.grid);
        CellSet {
            grid: self.grid,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersect(&self, other: &CellSet) -> CellSet {
        debug_assert_eq!(self.grid, other.grid);
        CellSet {
            grid: self.grid,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn minus(&self, other: &CellSet) -> CellSet {
        debug_assert_eq!(self.grid, other.grid);
        CellSet {
            grid: self.grid,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn complement(&self) -> CellSet {
        CellSet::full(self.grid).minus(self)
    }

    pub fn union_in_place(&mut self, other: &CellSet) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersects(&self, other: &CellSet) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Number of cells of rectangle `r` lying in this set (exact).
    pub fn count_in_rect(&self, r: &DyadicRectangle) -> u64 {
        let mut n = 0u64;
        self.for_each_rect_cell(r, |cx, cy| {
            if self.contains_cell(cx as usize * self.grid.cells_y() as usize + cy as usize) {
                n += 1;
            }
        });
        n
    }

    /// Iterate set cell indices in increasing order.
    pub fn iter_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut rem = word;
            std::iter::from_fn(move || {
                if rem == 0 {
                    None
                } else {
                    let b = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicInterval;

    #[test]
    fn empty_and_full_measures() {
        let grid = ProductGrid::standard(3, 3);
        assert!(CellSet::empty(grid).measure().is_zero());
        assert_eq!(CellSet::full(grid).measure(), DyadicRat::ONE);
    }

    #[test]
    fn rect_measure_example() {
        // [0,1/2)×[0,1/4) at depth (3,3): 4×2 = 8 of 64 cells = 1/8.
        let grid = ProductGrid::standard(3, 3);
        let r = DyadicRectangle::new(DyadicInterval::new(1, 0), DyadicInterval::new(2, 0));
        let s = CellSet::from_rect(grid, &r);
        assert_eq!(s.count(), 8);
        assert_eq!(s.measure(), DyadicRat::new(1, 3));
    }

    #[test]
    fn inclusion_exclusion_exact() {
        let grid = ProductGrid::standard(4, 4);
        let a = CellSet::from_rect(
            grid,
            &DyadicRectangle::new(DyadicInterval::new(1, 0), DyadicInterval::new(0, 0)),
        );
        let b = CellSet::from_rect(
            grid,
            &DyadicRectangle::new(DyadicInterval::new(0, 0), DyadicInterval::new(1, 0)),
        );
        let lhs = a.union(&b).measure().add(&a.intersect(&b).measure());
        let rhs = a.measure().add(&b.measure());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn wrapped_rectangle_counts() {
        let grid = ProductGrid::new(3, 3, 6, 0).unwrap();
        // x-interval depth 1 index 1 starts at cell (4+6) mod 8 = 2 — no wrap;
        // index 0 starts at 6 and wraps to {6,7,0,1}.
        let r = DyadicRectangle::new(DyadicInterval::new(1, 0), DyadicInterval::new(0, 0));
        let s = CellSet::from_rect(grid, &r);
        assert_eq!(s.count(), 32);
        assert_eq!(s.count_in_rect(&r), 32);
        let full = CellSet::full(grid);
        assert_eq!(full.count_in_rect(&r), 32);
    }

    #[test]
    fn subset_and_iter() {
        let grid = ProductGrid::standard(2, 2);
        let r = DyadicRectangle::new(DyadicInterval::new(1, 1), DyadicInterval::new(1, 0));
        let s = CellSet::from_rect(grid, &r);
        assert!(s.is_subset_of(&CellSet::full(grid)));
        assert_eq!(s.iter_cells().count() as u64, s.count());
    }
}
