//! The weighted covering algorithm on rectangle families and its two
//! verification targets.
//!
//! Input rectangles are put in the canonical order (decreasing y-sidelength,
//! ties by decreasing x-sidelength, then lexicographic). Selection is greedy:
//! a rectangle survives when its overlap with the union of the *dilates*
//! I × 3J of everything selected so far is below (1−ε) of its area, by exact
//! cell count. Dilates wrap on the torus.

use crate::cells::CellSet;
use crate::dyadic::{DyadicRectangle, ProductGrid};
use crate::error::{Error, Result};
use crate::exact::{cmp_frac_vs_f64, frac_ge, frac_lt};
use crate::weights::Weight;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A completed covering selection with enough detail to replay it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringRun {
    /// Inputs in the canonical order the selection consumed them.
    pub rects: Vec<DyadicRectangle>,
    pub epsilon: f64,
    /// Indices into `rects` of the selected subfamily, in selection order.
    pub selected: Vec<usize>,
    /// Per input rectangle: overlap cells against the dilated union at its
    /// decision moment, and its own cell count.
    pub overlap_fractions: Vec<(u64, u64)>,
    grid: ProductGrid,
}

impl CoveringRun {
    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn is_selected(&self, idx: usize) -> bool {
        self.selected.contains(&idx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("covering run serializes")
    }

    /// The full record: the run plus the observed covering constants.
    pub fn to_json_with_constants(&self, c1_observed: f64, c2_observed: f64) -> String {
        let mut v = serde_json::to_value(self).expect("covering run serializes");
        let obj = v.as_object_mut().expect("run is an object");
        obj.insert("c1_observed".into(), c1_observed.into());
        obj.insert("c2_observed".into(), c2_observed.into());
        serde_json::to_string(&v).expect("augmented run serializes")
    }
}

/// The canonical input order.
pub fn covering_order(a: &DyadicRectangle, b: &DyadicRectangle) -> Ordering {
    // decreasing y-length ⇔ increasing y-depth; ties by decreasing x-length.
    a.y.depth
        .cmp(&b.y.depth)
        .then(a.x.depth.cmp(&b.x.depth))
        .then(a.x.index.cmp(&b.x.index))
        .then(a.y.index.cmp(&b.y.index))
}

/// Cell set of the dilate I × 3J, clipped (wrapped) to the torus.
pub fn dilate_y3(grid: &ProductGrid, r: &DyadicRectangle) -> CellSet {
    let (sx, lx) = grid.x.cell_span(&r.x);
    let (sy, ly) = grid.y.cell_span(&r.y);
    let nx = grid.cells_x();
    let ny = grid.cells_y();
    let mut s = CellSet::empty(*grid);
    let (dy_start, dy_len) = if 3 * ly >= ny {
        (0, ny)
    } else {
        ((sy + ny - ly) & (ny - 1), 3 * ly)
    };
    for dx in 0..lx {
        let cx = (sx + dx) & (nx - 1);
        for dy in 0..dy_len {
            let cy = (dy_start + dy) & (ny - 1);
            s.insert_cell(cx as usize * ny as usize + cy as usize);
        }
    }
    s
}

/// Greedy selection against dilated unions; deterministic in the canonical
/// order. Empty input yields an empty run.
pub fn covering_select(
    grid: &ProductGrid,
    rects: &[DyadicRectangle],
    epsilon: f64,
) -> Result<CoveringRun> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {epsilon} outside (0, 1)")));
    }
    let threshold = 1.0 - epsilon;
    let mut ordered = rects.to_vec();
    ordered.sort_by(covering_order);
    let mut dilated_union = CellSet::empty(*grid);
    let mut selected = Vec::new();
    let mut overlaps = Vec::with_capacity(ordered.len());
    for (idx, r) in ordered.iter().enumerate() {
        let cells = grid.rect_cells(r);
        let overlap = dilated_union.count_in_rect(r);
        overlaps.push((overlap, cells));
        if frac_lt(overlap, cells, threshold) {
            selected.push(idx);
            dilated_union.union_in_place(&dilate_y3(grid, r));
        }
    }
    Ok(CoveringRun {
        rects: ordered,
        epsilon,
        selected,
        overlap_fractions: overlaps,
        grid: *grid,
    })
}

/// Observed constants of the two covering inequalities:
/// c1 = w(⋃ selected) / w(⋃ all) and
/// c2 = ‖Σ_j 1_{selected}‖_{L^{p'}(w)} / w(⋃ all)^{1/p'}.
pub fn verify_covering(run: &CoveringRun, w: &Weight, p: f64) -> Result<(f64, f64)> {
    if p <= 1.0 {
        return Err(Error::InvalidParameter(format!("need p > 1, got {p}")));
    }
    if run.grid() != w.grid() {
        return Err(Error::GridMismatch("covering verification".into()));
    }
    let grid = *run.grid();
    let p_dual = p / (p - 1.0);
    let area = grid.cell_area().to_f64();

    let mut all_union = CellSet::empty(grid);
    for r in &run.rects {
        all_union.union_in_place(&CellSet::from_rect(grid, r));
    }
    let mut sel_union = CellSet::empty(grid);
    let mut counts = vec![0u32; grid.cell_count()];
    for &idx in &run.selected {
        let set = CellSet::from_rect(grid, &run.rects[idx]);
        for cell in set.iter_cells() {
            counts[cell] += 1;
        }
        sel_union.union_in_place(&set);
    }
    let wsum = |s: &CellSet| -> f64 {
        s.iter_cells().map(|i| w.density().values()[i]).sum::<f64>() * area
    };
    let w_all = wsum(&all_union);
    if w_all == 0.0 {
        return Ok((1.0, 0.0));
    }
    let c1 = wsum(&sel_union) / w_all;
    let overlap_norm = (counts
        .iter()
        .zip(w.density().values())
        .map(|(&n, &wv)| (n as f64).powf(p_dual) * wv)
        .sum::<f64>()
        * area)
        .powf(1.0 / p_dual);
    let c2 = overlap_norm / w_all.powf(1.0 / p_dual);
    Ok((c1, c2))
}

/// Exact slice diagnostics at every grid height.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceReport {
    /// For every unselected rectangle and every height it spans, the slice of
    /// the dilated selected union covers at least (1−ε) of its x-slice.
    pub slice_identity_ok: bool,
    /// The per-height residual sets E_j are pairwise disjoint.
    pub e_disjoint_ok: bool,
    /// Every E_j occupies more than ε of its slice.
    pub e_fraction_ok: bool,
    pub min_e_fraction: f64,
    pub checked_slices: usize,
}

/// Check the slice identity for rejected rectangles and the E_j structure for
/// selected ones, with exact 1-D cell counting at every height.
pub fn verify_slices(run: &CoveringRun) -> SliceReport {
    let grid = *run.grid();
    let nx = grid.cells_x();
    let ny = grid.cells_y();
    let threshold = 1.0 - run.epsilon;

    // Per selected rectangle: x-span, undilated y membership, dilated y
    // membership (as boolean masks over heights).
    struct Sel {
        x_cells: Vec<u32>,
        y_mask: Vec<bool>,
        y3_mask: Vec<bool>,
    }
    let mut sels = Vec::with_capacity(run.selected.len());
    for &idx in &run.selected {
        let r = &run.rects[idx];
        let (sx, lx) = grid.x.cell_span(&r.x);
        let (sy, ly) = grid.y.cell_span(&r.y);
        let x_cells: Vec<u32> = (0..lx).map(|d| (sx + d) & (nx - 1)).collect();
        let mut y_mask = vec![false; ny as usize];
        for d in 0..ly {
            y_mask[((sy + d) & (ny - 1)) as usize] = true;
        }
        let mut y3_mask = vec![false; ny as usize];
        let (d_start, d_len) = if 3 * ly >= ny {
            (0, ny)
        } else {
            ((sy + ny - ly) & (ny - 1), 3 * ly)
        };
        for d in 0..d_len {
            y3_mask[((d_start + d) & (ny - 1)) as usize] = true;
        }
        sels.push(Sel { x_cells, y_mask, y3_mask });
    }

    let mut slice_identity_ok = true;
    let mut checked = 0usize;
    // Rejected rectangles: slice identity at every height they span.
    for (idx, r) in run.rects.iter().enumerate() {
        if run.is_selected(idx) {
            continue;
        }
        let (sx, lx) = grid.x.cell_span(&r.x);
        let (sy, ly) = grid.y.cell_span(&r.y);
        for dy in 0..ly {
            let h = ((sy + dy) & (ny - 1)) as usize;
            let mut covered = vec![false; nx as usize];
            for s in &sels {
                if s.y3_mask[h] {
                    for &cx in &s.x_cells {
                        covered[cx as usize] = true;
                    }
                }
            }
            let count =
                (0..lx).filter(|d| covered[((sx + d) & (nx - 1)) as usize]).count() as u64;
            checked += 1;
            if !frac_ge(count, lx as u64, threshold) {
                slice_identity_ok = false;
            }
        }
    }

    // Selected rectangles: E_j per height, disjointness and fraction.
    let mut e_disjoint_ok = true;
    let mut e_fraction_ok = true;
    let mut min_e_fraction = 1.0f64;
    for h in 0..ny as usize {
        let mut prior_dilated = vec![false; nx as usize];
        let mut e_union = vec![false; nx as usize];
        for s in &sels {
            if s.y_mask[h] {
                // E_j = x-span minus dilated slices of earlier-selected.
                let e_cells: Vec<u32> = s
                    .x_cells
                    .iter()
                    .copied()
                    .filter(|&cx| !prior_dilated[cx as usize])
                    .collect();
                checked += 1;
                let frac_num = e_cells.len() as u64;
                let len = s.x_cells.len() as u64;
                min_e_fraction = min_e_fraction.min(frac_num as f64 / len as f64);
                if cmp_frac_vs_f64(frac_num, len, run.epsilon) != Ordering::Greater {
                    e_fraction_ok = false;
                }
                for &cx in &e_cells {
                    if e_union[cx as usize] {
                        e_disjoint_ok = false;
                    }
                    e_union[cx as usize] = true;
                }
            }
            if s.y3_mask[h] {
                for &cx in &s.x_cells {
                    prior_dilated[cx as usize] = true;
                }
            }
        }
    }

    SliceReport {
        slice_identity_ok,
        e_disjoint_ok,
        e_fraction_ok,
        min_e_fraction,
        checked_slices: checked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicInterval;
    use crate::rng::SplitMix64;

    fn grid() -> ProductGrid {
        ProductGrid::standard(4, 4)
    }

    #[test]
    fn disjoint_dilates_all_selected() {
        let g = grid();
        // Two thin rectangles far apart in x; equal y-intervals so dilates
        // stay disjoint in x.
        let r1 = DyadicRectangle::new(DyadicInterval::new(2, 0), DyadicInterval::new(2, 0));
        let r2 = DyadicRectangle::new(DyadicInterval::new(2, 2), DyadicInterval::new(2, 0));
        let run = covering_select(&g, &[r1, r2], 0.1).unwrap();
        assert_eq!(run.selected.len(), 2);
        let rep = verify_slices(&run);
        assert!(rep.e_disjoint_ok && rep.e_fraction_ok && rep.slice_identity_ok);
    }

    #[test]
    fn repeated_rectangle_only_first_selected() {
        let g = grid();
        let r = DyadicRectangle::new(DyadicInterval::new(1, 0), DyadicInterval::new(1, 1));
        let run = covering_select(&g, &[r, r, r], 0.1).unwrap();
        assert_eq!(run.selected, vec![0]);
        // Overlap at the second decision is full.
        assert_eq!(run.overlap_fractions[1].0, run.overlap_fractions[1].1);
    }

    #[test]
    fn selection_replay_against_bruteforce() {
        // Three overlapping rectangles of decreasing heights; replay the
        // criterion from scratch and compare decisions.
        let g = grid();
        let rects = vec![
            DyadicRectangle::new(DyadicInterval::new(2, 1), DyadicInterval::new(0, 0)),
            DyadicRectangle::new(DyadicInterval::new(1, 0), DyadicInterval::new(1, 0)),
            DyadicRectangle::new(DyadicInterval::new(0, 0), DyadicInterval::new(2, 1)),
        ];
        let run = covering_select(&g, &rects, 0.1).unwrap();
        let mut union = CellSet::empty(g);
        let mut expect_selected = Vec::new();
        for (idx, r) in run.rects.iter().enumerate() {
            let overlap = union.count_in_rect(r);
            let cells = g.rect_cells(r);
            assert_eq!(run.overlap_fractions[idx], (overlap, cells));
            if frac_lt(overlap, cells, 1.0 - 0.1) {
                expect_selected.push(idx);
                union.union_in_place(&dilate_y3(&g, r));
            }
        }
        assert_eq!(run.selected, expect_selected);
    }

    #[test]
    fn canonical_order_is_decreasing_y_then_x() {
        let g = grid();
        let tall = DyadicRectangle::new(DyadicInterval::new(3, 0), DyadicInterval::new(0, 0));
        let short = DyadicRectangle::new(DyadicInterval::new(0, 0), DyadicInterval::new(3, 0));
        let run = covering_select(&g, &[short, tall], 0.5).unwrap();
        assert_eq!(run.rects[0], tall);
        assert_eq!(run.rects[1], short);
    }

    #[test]
    fn verify_covering_trivial_cases() {
        let g = grid();
        let w = Weight::constant(g, 1.0).unwrap();
        let r = DyadicRectangle::new(DyadicInterval::new(1, 0), DyadicInterval::new(1, 0));
        let run = covering_select(&g, &[r], 0.05).unwrap();
        let (c1, c2) = verify_covering(&run, &w, 2.0).unwrap();
        assert!((c1 - 1.0).abs() < 1e-12);
        // Single rectangle: ‖1_R‖_{L²(w)} = w(R)^{1/2}, so c2 = 1.
        assert!((c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_selected_gives_c1_one() {
        let g = grid();
        let w = Weight::power(g, 0.5, -0.25).unwrap();
        let rects = vec![
            DyadicRectangle::new(DyadicInterval::new(2, 0), DyadicInterval::new(1, 0)),
            DyadicRectangle::new(DyadicInterval::new(2, 3), DyadicInterval::new(1, 1)),
        ];
        let run = covering_select(&g, &rects, 0.05).unwrap();
        assert_eq!(run.selected.len(), 2);
        let (c1, _) = verify_covering(&run, &w, 2.0).unwrap();
        assert!((c1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_families_pass_slice_invariants() {
        let g = ProductGrid::standard(5, 5);
        let mut gen = SplitMix64::new(91);
        let all: Vec<DyadicRectangle> = g.rectangles().collect();
        for trial in 0..5u64 {
            let rects: Vec<DyadicRectangle> = (0..40)
                .map(|_| all[gen.next_below(all.len() as u64) as usize])
                .collect();
            let run = covering_select(&g, &rects, 0.05).unwrap();
            let rep = verify_slices(&run);
            assert!(rep.slice_identity_ok, "slice identity failed on trial {trial}");
            assert!(rep.e_disjoint_ok, "E_j disjointness failed on trial {trial}");
            assert!(rep.e_fraction_ok, "E_j fraction failed on trial {trial}");
            assert!(rep.min_e_fraction > run.epsilon);
        }
    }

    #[test]
    fn c2_bounded_by_epsilon_power_times_a2() {
        let g = ProductGrid::standard(5, 5);
        let mut gen = SplitMix64::new(17);
        let all: Vec<DyadicRectangle> = g.rectangles().collect();
        let rects: Vec<DyadicRectangle> =
            (0..50).map(|_| all[gen.next_below(all.len() as u64) as usize]).collect();
        let eps = 0.05;
        let run = covering_select(&g, &rects, eps).unwrap();
        for w in [
            Weight::constant(g, 1.0).unwrap(),
            Weight::power(g, 0.5, 0.5).unwrap(),
            Weight::step_x(g, 10.0, 1.0).unwrap(),
        ] {
            let (_, c2) = verify_covering(&run, &w, 2.0).unwrap();
            let bound = eps.powi(-2) * w.ap_characteristic(2.0).unwrap();
            assert!(c2 <= bound, "c2 = {c2} exceeded ε^-p [w]_Ap = {bound}");
        }
    }
}
