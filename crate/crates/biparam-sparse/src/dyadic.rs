//! Dyadic intervals, shifted grids, and product rectangles on the torus.
//!
//! The domain is the unit square [0,1)² (unit interval in one dimension),
//! discretized into 2^depth finest cells per axis. A grid may carry a shift
//! with denominator 2^max_depth; shifted intervals wrap circularly, so every
//! interval occupies a contiguous block of finest cells after torus unwrap.
//! Interval labels `(depth, index)` form the same binary tree as the
//! unshifted grid — only the label-to-cell map rotates.

use crate::error::{Error, Result};
use crate::exact::DyadicRat;
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

/// A dyadic interval of length 2^-depth, identified by its position index
/// within its grid. Geometry (cell span) comes from the owning [`AxisGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub depth: u8,
    pub index: u32,
}

impl DyadicInterval {
    pub fn new(depth: u8, index: u32) -> Self {
        debug_assert!(index < (1u32 << depth), "interval index out of range");
        DyadicInterval { depth, index }
    }

    pub fn root() -> Self {
        DyadicInterval { depth: 0, index: 0 }
    }

    /// Length as an exact dyadic rational.
    pub fn length(&self) -> DyadicRat {
        DyadicRat::new(1, self.depth as u32)
    }

    /// The 2^k children at level k below this interval.
    pub fn children(&self, k: u8) -> impl Iterator<Item = DyadicInterval> + '_ {
        let base = self.index << k;
        let depth = self.depth + k;
        (0..(1u32 << k)).map(move |i| DyadicInterval::new(depth, base + i))
    }

    /// The ancestor k levels up, if it exists.
    pub fn ancestor(&self, k: u8) -> Option<DyadicInterval> {
        if k > self.depth {
            None
        } else {
            Some(DyadicInterval::new(self.depth - k, self.index >> k))
        }
    }

    pub fn parent(&self) -> Option<DyadicInterval> {
        self.ancestor(1)
    }

    /// Whether `self` contains `other` (labels on a common grid).
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.depth >= self.depth && (other.index >> (other.depth - self.depth)) == self.index
    }
}

/// One axis of a product grid: a maximal depth and a circular shift in
/// finest-cell units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisGrid {
    pub max_depth: u8,
    pub shift_cells: u32,
}

impl AxisGrid {
    pub fn new(max_depth: u8, shift_cells: u32) -> Result<Self> {
        if max_depth == 0 || max_depth > 24 {
            return Err(Error::InvalidParameter(format!(
                "axis depth {max_depth} outside supported range 1..=24"
            )));
        }
        if shift_cells >= (1u32 << max_depth) {
            return Err(Error::InvalidParameter(format!(
                "shift numerator {shift_cells} not below 2^{max_depth}"
            )));
        }
        Ok(AxisGrid { max_depth, shift_cells })
    }

    pub fn standard(max_depth: u8) -> Self {
        AxisGrid::new(max_depth, 0).expect("valid depth")
    }

    /// Number of finest cells.
    pub fn cells(&self) -> u32 {
        1u32 << self.max_depth
    }

    /// Shift as a dyadic rational in [0, 1).
    pub fn shift(&self) -> DyadicRat {
        DyadicRat::new(self.shift_cells as u64, self.max_depth as u32)
    }

    /// First cell and cell length of an interval, before torus unwrap. The
    /// occupied cells are `start, start+1, …, start+len-1` modulo `cells()`.
    pub fn cell_span(&self, iv: &DyadicInterval) -> (u32, u32) {
        debug_assert!(iv.depth <= self.max_depth);
        let len = 1u32 << (self.max_depth - iv.depth);
        let start = (iv.index * len + self.shift_cells) & (self.cells() - 1);
        (start, len)
    }

    /// The unique depth-`depth` interval whose span contains `cell`.
    pub fn interval_containing(&self, cell: u32, depth: u8) -> DyadicInterval {
        debug_assert!(depth <= self.max_depth && cell < self.cells());
        let unshifted = (cell.wrapping_sub(self.shift_cells)) & (self.cells() - 1);
        DyadicInterval::new(depth, unshifted >> (self.max_depth - depth))
    }

    /// All intervals of the grid, coarse to fine.
    pub fn intervals(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        (0..=self.max_depth)
            .flat_map(|d| (0..(1u32 << d)).map(move |i| DyadicInterval::new(d, i)))
    }

    pub fn interval_count(&self) -> u64 {
        (1u64 << (self.max_depth as u32 + 1)) - 1
    }

    pub fn check_depth(&self, depth: u32) -> Result<()> {
        if depth > self.max_depth as u32 {
            Err(Error::ResolutionExceeded { requested: depth, max: self.max_depth as u32 })
        } else {
            Ok(())
        }
    }

    /// `children(I, k)` with resolution checking.
    pub fn children(&self, iv: &DyadicInterval, k: u8) -> Result<Vec<DyadicInterval>> {
        self.check_depth(iv.depth as u32 + k as u32)?;
        Ok(iv.children(k).collect())
    }
}

/// A product of two dyadic intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicRectangle {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
}

impl DyadicRectangle {
    pub fn new(x: DyadicInterval, y: DyadicInterval) -> Self {
        DyadicRectangle { x, y }
    }

    pub fn unit_square() -> Self {
        DyadicRectangle::new(DyadicInterval::root(), DyadicInterval::root())
    }

    /// Area as an exact dyadic rational.
    pub fn area(&self) -> DyadicRat {
        DyadicRat::new(1, self.x.depth as u32 + self.y.depth as u32)
    }

    pub fn contains(&self, other: &DyadicRectangle) -> bool {
        self.x.contains(&other.x) && self.y.contains(&other.y)
    }

    /// The ancestor rectangle `(k1, k2)` levels up, if both exist.
    pub fn ancestor(&self, k1: u8, k2: u8) -> Option<DyadicRectangle> {
        Some(DyadicRectangle::new(self.x.ancestor(k1)?, self.y.ancestor(k2)?))
    }
}

/// The bi-parameter grid: per-axis depth and circular shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductGrid {
    pub x: AxisGrid,
    pub y: AxisGrid,
}

impl ProductGrid {
    pub fn new(depth_x: u8, depth_y: u8, shift_x_cells: u32, shift_y_cells: u32) -> Result<Self> {
        Ok(ProductGrid {
            x: AxisGrid::new(depth_x, shift_x_cells)?,
            y: AxisGrid::new(depth_y, shift_y_cells)?,
        })
    }

    pub fn standard(depth_x: u8, depth_y: u8) -> Self {
        ProductGrid::new(depth_x, depth_y, 0, 0).expect("valid depths")
    }

    /// Random circular shifts with fair bits 2^-1 … 2^-max_depth per axis,
    /// drawn x-axis first from a SplitMix64 stream seeded with `seed`.
    pub fn random_shifted(depth_x: u8, depth_y: u8, seed: u64) -> Result<Self> {
        let mut gen = SplitMix64::new(seed);
        let mut draw = |depth: u8| -> u32 {
            let mut num = 0u32;
            for k in 1..=depth {
                // bit k contributes 2^-k, i.e. 2^(depth-k) cells
                num |= (gen.next_bit() as u32) << (depth - k);
            }
            num
        };
        let sx = draw(depth_x);
        let sy = draw(depth_y);
        ProductGrid::new(depth_x, depth_y, sx, sy)
    }

    pub fn cells_x(&self) -> u32 {
        self.x.cells()
    }

    pub fn cells_y(&self) -> u32 {
        self.y.cells()
    }

    pub fn cell_count(&self) -> usize {
        (self.cells_x() as usize) * (self.cells_y() as usize)
    }

    /// Exact area of one finest cell.
    pub fn cell_area(&self) -> DyadicRat {
        DyadicRat::new(1, (self.x.max_depth + self.y.max_depth) as u32)
    }

    /// Cell count of a rectangle (exact).
    pub fn rect_cells(&self, r: &DyadicRectangle) -> u64 {
        let (_, lx) = self.x.cell_span(&r.x);
        let (_, ly) = self.y.cell_span(&r.y);
        lx as u64 * ly as u64
    }

    /// All rectangles of the grid: (2^(dx+1)-1)(2^(dy+1)-1) of them.
    pub fn rectangles(&self) -> impl Iterator<Item = DyadicRectangle> + '_ {
        self.x
            .intervals()
            .flat_map(move |ix| self.y.intervals().map(move |iy| DyadicRectangle::new(ix, iy)))
    }

    pub fn rectangle_count(&self) -> u64 {
        self.x.interval_count() * self.y.interval_count()
    }

    /// Rectangles that can carry a Haar function: both component depths
    /// strictly below the axis maximum.
    pub fn haar_rectangles(&self) -> impl Iterator<Item = DyadicRectangle> + '_ {
        let dx = self.x.max_depth;
        let dy = self.y.max_depth;
        (0..dx)
            .flat_map(move |d| (0..(1u32 << d)).map(move |i| DyadicInterval::new(d, i)))
            .flat_map(move |ix| {
                (0..dy)
                    .flat_map(move |d| (0..(1u32 << d)).map(move |i| DyadicInterval::new(d, i)))
                    .map(move |iy| DyadicRectangle::new(ix, iy))
            })
    }

    /// Cartesian children `R_(i1,i2)` with resolution checking.
    pub fn rect_children(
        &self,
        r: &DyadicRectangle,
        i: (u8, u8),
    ) -> Result<Vec<DyadicRectangle>> {
        self.x.check_depth(r.x.depth as u32 + i.0 as u32)?;
        self.y.check_depth(r.y.depth as u32 + i.1 as u32)?;
        let mut out = Vec::with_capacity(1usize << (i.0 + i.1));
        for cx in r.x.children(i.0) {
            for cy in r.y.children(i.1) {
                out.push(DyadicRectangle::new(cx, cy));
            }
        }
        Ok(out)
    }

    /// The rectangle `(k1, k2)` levels above `r`, if it exists in this grid.
    pub fn rect_ancestor(&self, r: &DyadicRectangle, k1: u8, k2: u8) -> Option<DyadicRectangle> {
        r.ancestor(k1, k2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_level_zero_is_identity() {
        let root = DyadicInterval::root();
        let kids: Vec<_> = root.children(0).collect();
        assert_eq!(kids, [root]);
    }

    #[test]
    fn children_level_one_bisects() {
        let root = DyadicInterval::root();
        let kids: Vec<_> = root.children(1).collect();
        assert_eq!(kids, [DyadicInterval::new(1, 0), DyadicInterval::new(1, 1)]);
    }

    #[test]
    fn children_of_right_half_at_level_two() {
        // [1/2,1) at k=2 → indices 4..8 at depth 3, i.e. [1/2,5/8) … [7/8,1).
        let right = DyadicInterval::new(1, 1);
        let kids: Vec<_> = right.children(2).collect();
        let expect: Vec<_> = (4..8).map(|i| DyadicInterval::new(3, i)).collect();
        assert_eq!(kids, expect);
        // Disjoint union by cell counting on a depth-3 axis.
        let axis = AxisGrid::standard(3);
        let mut covered = [false; 8];
        for k in &kids {
            let (s, l) = axis.cell_span(k);
            for c in s..s + l {
                assert!(!covered[c as usize], "overlap");
                covered[c as usize] = true;
            }
        }
        let (ps, pl) = axis.cell_span(&right);
        assert_eq!(covered.iter().filter(|&&b| b).count() as u32, pl);
        assert!(covered[ps as usize]);
    }

    #[test]
    fn children_partition_parent_cell_counts() {
        let axis = AxisGrid::new(5, 11).unwrap();
        for iv in axis.intervals() {
            for k in 0..=(axis.max_depth - iv.depth) {
                let kids = axis.children(&iv, k).unwrap();
                assert_eq!(kids.len(), 1usize << k);
                let total: u32 = kids.iter().map(|c| axis.cell_span(c).1).sum();
                assert_eq!(total, axis.cell_span(&iv).1);
            }
        }
    }

    #[test]
    fn children_beyond_resolution_error() {
        let axis = AxisGrid::standard(3);
        let iv = DyadicInterval::new(2, 1);
        assert!(axis.children(&iv, 2).is_err());
        assert!(axis.children(&iv, 1).is_ok());
    }

    #[test]
    fn rect_children_tile() {
        let grid = ProductGrid::standard(3, 3);
        let q0 = DyadicRectangle::unit_square();
        assert_eq!(grid.rect_children(&q0, (0, 0)).unwrap(), vec![q0]);
        let halves = grid.rect_children(&q0, (1, 0)).unwrap();
        assert_eq!(halves.len(), 2);
        assert_eq!(halves[0].x, DyadicInterval::new(1, 0));
        assert_eq!(halves[1].x, DyadicInterval::new(1, 1));

        // [0,1/2)×[0,1) at (1,1): four rectangles, each of area 1/8.
        let r = DyadicRectangle::new(DyadicInterval::new(1, 0), DyadicInterval::root());
        let kids = grid.rect_children(&r, (1, 1)).unwrap();
        assert_eq!(kids.len(), 4);
        let total: u64 = kids.iter().map(|k| grid.rect_cells(k)).sum();
        assert_eq!(total, grid.rect_cells(&r));
        for k in &kids {
            assert_eq!(k.area(), DyadicRat::new(1, 3));
        }
    }

    #[test]
    fn rectangle_enumeration_count_and_uniqueness() {
        let grid = ProductGrid::standard(3, 2);
        let rects: Vec<_> = grid.rectangles().collect();
        assert_eq!(rects.len() as u64, grid.rectangle_count());
        assert_eq!(rects.len(), ((1 << 4) - 1) * ((1 << 3) - 1));
        let mut sorted = rects.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), rects.len());
    }

    #[test]
    fn shifted_grid_wraps_contiguously() {
        let axis = AxisGrid::new(3, 3).unwrap();
        // Depth-1 interval index 1: starts at cell (4 + 3) mod 8 = 7, length 4,
        // wrapping to cells {7, 0, 1, 2}.
        let (s, l) = axis.cell_span(&DyadicInterval::new(1, 1));
        assert_eq!((s, l), (7, 4));
        // Membership via interval_containing is consistent with the span.
        for c in 0..8u32 {
            let iv = axis.interval_containing(c, 1);
            let inside = (c.wrapping_sub(s)) & 7 < l;
            assert_eq!(iv == DyadicInterval::new(1, 1), inside, "cell {c}");
        }
    }

    #[test]
    fn zero_seeded_bits_reproduce_standard_grid() {
        // Seed 698's first eight bit draws are all zero, so the shifted grid
        // it produces at depth (4, 4) is the standard grid.
        let mut probe = SplitMix64::new(698);
        for _ in 0..8 {
            assert_eq!(probe.next_bit(), 0);
        }
        let g = ProductGrid::random_shifted(4, 4, 698).unwrap();
        assert_eq!(g, ProductGrid::standard(4, 4));
    }

    #[test]
    fn random_shift_reproduces_documented_bitstream() {
        // Shift = Σ b_k 2^-k for the first bits of the seed-42 stream, x first.
        let grid = ProductGrid::random_shifted(4, 4, 42).unwrap();
        let mut gen = SplitMix64::new(42);
        let mut num_x = 0u32;
        for k in 1..=4u8 {
            num_x |= (gen.next_bit() as u32) << (4 - k);
        }
        let mut num_y = 0u32;
        for k in 1..=4u8 {
            num_y |= (gen.next_bit() as u32) << (4 - k);
        }
        assert_eq!(grid.x.shift_cells, num_x);
        assert_eq!(grid.y.shift_cells, num_y);
        // Determinism.
        assert_eq!(grid, ProductGrid::random_shifted(4, 4, 42).unwrap());
    }
}
