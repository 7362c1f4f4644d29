//! The operator zoo: martingale transforms, cancellative bi-parameter dyadic
//! shifts, square functions (plain and shifted), strong and weighted-strong
//! maximal functions, and the bilinear pairing.
//!
//! Shift coefficients are never materialized as a table unless user-supplied:
//! the seeded generators evaluate a_{PQR} as a pure hash of the triple, so
//! operators are replayable and order-independent.

use crate::cells::CellSet;
use crate::dyadic::{DyadicRectangle, ProductGrid};
use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::haar::HaarCoefficients;
use crate::rng::sign_hash;
use crate::weights::Weight;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Bounded symbol ε_R for the martingale transform.
#[derive(Debug, Clone)]
pub enum EpsilonSymbol {
    /// ε_R = c for every rectangle.
    Constant(f64),
    /// ε_R = ±magnitude, the sign a seeded hash of the rectangle.
    RandomSigns { seed: u64, magnitude: f64 },
    /// Explicit table; absent rectangles take the default value.
    Table { map: BTreeMap<DyadicRectangle, f64>, default: f64 },
}

impl EpsilonSymbol {
    pub fn identity() -> Self {
        EpsilonSymbol::Constant(1.0)
    }

    pub fn value(&self, r: &DyadicRectangle) -> f64 {
        match self {
            EpsilonSymbol::Constant(c) => *c,
            EpsilonSymbol::RandomSigns { seed, magnitude } => {
                magnitude
                    * sign_hash(
                        *seed,
                        &[
                            r.x.depth as u64,
                            r.x.index as u64,
                            r.y.depth as u64,
                            r.y.index as u64,
                        ],
                    )
            }
            EpsilonSymbol::Table { map, default } => map.get(r).copied().unwrap_or(*default),
        }
    }

    /// sup_R |ε_R| over all rectangles the symbol can produce.
    pub fn sup_bound(&self) -> f64 {
        match self {
            EpsilonSymbol::Constant(c) => c.abs(),
            EpsilonSymbol::RandomSigns { magnitude, .. } => magnitude.abs(),
            EpsilonSymbol::Table { map, default } => map
                .values()
                .map(|v| v.abs())
                .fold(default.abs(), f64::max),
        }
    }
}

/// Tf = Σ ε_R ⟨f, h_R⟩ h_R, acting entrywise on coefficients.
pub fn martingale_transform(c: &HaarCoefficients, eps: &EpsilonSymbol) -> HaarCoefficients {
    let mut out = HaarCoefficients::new(*c.grid());
    for (r, &v) in c.iter() {
        out.insert(*r, eps.value(r) * v).expect("key was valid in input");
    }
    out
}

/// Shift complexity: P ranges over level-i children and Q over level-j
/// children of the common ancestor R, per axis. Serializes as
/// `[[i1, i2], [j1, j2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "[[u8; 2]; 2]", from = "[[u8; 2]; 2]")]
pub struct Complexity {
    pub i: (u8, u8),
    pub j: (u8, u8),
}

impl From<Complexity> for [[u8; 2]; 2] {
    fn from(c: Complexity) -> Self {
        [[c.i.0, c.i.1], [c.j.0, c.j.1]]
    }
}

impl From<[[u8; 2]; 2]> for Complexity {
    fn from(v: [[u8; 2]; 2]) -> Self {
        Complexity { i: (v[0][0], v[0][1]), j: (v[1][0], v[1][1]) }
    }
}

impl Complexity {
    pub fn new(i1: u8, i2: u8, j1: u8, j2: u8) -> Self {
        Complexity { i: (i1, i2), j: (j1, j2) }
    }

    /// i1 + i2 + j1 + j2.
    pub fn total(&self) -> u32 {
        self.i.0 as u32 + self.i.1 as u32 + self.j.0 as u32 + self.j.1 as u32
    }

    /// The coefficient magnitude cap 2^{-(i1+j1+i2+j2)/2}.
    pub fn magnitude_bound(&self) -> f64 {
        2f64.powf(-(self.total() as f64) / 2.0)
    }

    /// The sparse-form prefactor 2^{-(i1+i2+j1+j2)}.
    pub fn prefactor(&self) -> f64 {
        2f64.powi(-(self.total() as i32))
    }

    /// Complexity with the roles of i and j swapped (used for the g-side
    /// square function).
    pub fn swapped(&self) -> Complexity {
        Complexity { i: self.j, j: self.i }
    }
}

/// How a_{PQR} values are produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum ShiftGenerator {
    /// a_{PQR} = ±2^{-(i1+j1+i2+j2)/2}, sign a seeded hash of the triple.
    MaxMagnitudeRandomSign { seed: u64 },
    /// Deterministic diagonal-alignment coefficients at the magnitude cap:
    /// a_{PQR} is nonzero only when P and Q occupy the same relative slot of
    /// R at the coarser of the two complexities per axis, so complexity
    /// ((0,0),(0,0)) is the identity pairing.
    HaarOfIdentity,
    /// Explicit user-supplied table keyed by (P, Q); R is implied. Entries
    /// must respect the magnitude bound.
    UserTable { entries: Vec<ShiftTableEntry> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftTableEntry {
    pub p: DyadicRectangle,
    pub q: DyadicRectangle,
    pub value: f64,
}

/// The coefficient family of one cancellative shift, with its complexity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftCoefficients {
    pub complexity: Complexity,
    #[serde(flatten)]
    pub generator: ShiftGenerator,
}

impl ShiftCoefficients {
    pub fn max_magnitude_random_sign(complexity: Complexity, seed: u64) -> Self {
        ShiftCoefficients { complexity, generator: ShiftGenerator::MaxMagnitudeRandomSign { seed } }
    }

    pub fn user_table(complexity: Complexity, entries: Vec<ShiftTableEntry>) -> Result<Self> {
        let bound = complexity.magnitude_bound();
        for e in &entries {
            if e.value.abs() > bound * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "table entry {} exceeds magnitude bound {bound}",
                    e.value
                )));
            }
        }
        Ok(ShiftCoefficients { complexity, generator: ShiftGenerator::UserTable { entries } })
    }

    /// Same relative-slot test used by the identity-style generator.
    fn aligned(&self, p: &DyadicRectangle, q: &DyadicRectangle) -> bool {
        let align_axis = |pi: u32, qi: u32, i: u8, j: u8| -> bool {
            let m = i.min(j);
            (pi >> (i - m)) == (qi >> (j - m))
        };
        let rel = |idx: u32, levels: u8| idx & ((1u32 << levels) - 1);
        align_axis(
            rel(p.x.index, self.complexity.i.0),
            rel(q.x.index, self.complexity.j.0),
            self.complexity.i.0,
            self.complexity.j.0,
        ) && align_axis(
            rel(p.y.index, self.complexity.i.1),
            rel(q.y.index, self.complexity.j.1),
            self.complexity.i.1,
            self.complexity.j.1,
        )
    }

    pub fn value(&self, p: &DyadicRectangle, q: &DyadicRectangle, r: &DyadicRectangle) -> f64 {
        let bound = self.complexity.magnitude_bound();
        match &self.generator {
            ShiftGenerator::MaxMagnitudeRandomSign { seed } => {
                bound
                    * sign_hash(
                        *seed,
                        &[
                            r.x.depth as u64,
                            r.x.index as u64,
                            r.y.depth as u64,
                            r.y.index as u64,
                            p.x.index as u64,
                            p.y.index as u64,
                            q.x.index as u64,
                            q.y.index as u64,
                        ],
                    )
            }
            ShiftGenerator::HaarOfIdentity => {
                if self.aligned(p, q) {
                    bound
                } else {
                    0.0
                }
            }
            ShiftGenerator::UserTable { entries } => entries
                .iter()
                .find(|e| e.p == *p && e.q == *q)
                .map(|e| e.value)
                .unwrap_or(0.0),
        }
    }
}

/// Output of a shift application: coefficients plus the number of input keys
/// whose ancestor rectangle was not resolvable at this grid depth.
#[derive(Debug, Clone)]
pub struct ShiftOutput {
    pub coeffs: HaarCoefficients,
    pub dropped_keys: usize,
}

/// T^{i,j}f: move each coefficient at P up to its ancestor R (offset i) and
/// redistribute over the level-j children Q of R, weighted by a_{PQR}.
pub fn dyadic_shift(c: &HaarCoefficients, a: &ShiftCoefficients) -> ShiftOutput {
    let grid = *c.grid();
    let (i1, i2) = a.complexity.i;
    let (j1, j2) = a.complexity.j;
    let max_rx = grid.x.max_depth as i32 - 1 - i32::from(i1.max(j1));
    let max_ry = grid.y.max_depth as i32 - 1 - i32::from(i2.max(j2));
    let mut out: BTreeMap<DyadicRectangle, f64> = BTreeMap::new();
    let mut dropped = 0usize;
    for (p, &fp) in c.iter() {
        let r = match p.ancestor(i1, i2) {
            Some(r) if (r.x.depth as i32) <= max_rx && (r.y.depth as i32) <= max_ry => r,
            _ => {
                dropped += 1;
                continue;
            }
        };
        for qx in r.x.children(j1) {
            for qy in r.y.children(j2) {
                let q = DyadicRectangle::new(qx, qy);
                let coef = a.value(p, &q, &r);
                if coef != 0.0 {
                    *out.entry(q).or_insert(0.0) += coef * fp;
                }
            }
        }
    }
    let mut coeffs = HaarCoefficients::new(grid);
    for (q, v) in out {
        if v != 0.0 {
            coeffs.insert(q, v).expect("children stay resolvable");
        }
    }
    ShiftOutput { coeffs, dropped_keys: dropped }
}

/// Adjoint of `dyadic_shift` (same coefficients, P and Q roles swapped);
/// used by the operator-norm power iteration in tests.
pub fn dyadic_shift_adjoint(c: &HaarCoefficients, a: &ShiftCoefficients) -> ShiftOutput {
    let grid = *c.grid();
    let (i1, i2) = a.complexity.i;
    let (j1, j2) = a.complexity.j;
    let max_rx = grid.x.max_depth as i32 - 1 - i32::from(i1.max(j1));
    let max_ry = grid.y.max_depth as i32 - 1 - i32::from(i2.max(j2));
    let mut out: BTreeMap<DyadicRectangle, f64> = BTreeMap::new();
    let mut dropped = 0usize;
    for (q, &gq) in c.iter() {
        let r = match q.ancestor(j1, j2) {
            Some(r) if (r.x.depth as i32) <= max_rx && (r.y.depth as i32) <= max_ry => r,
            _ => {
                dropped += 1;
                continue;
            }
        };
        for px in r.x.children(i1) {
            for py in r.y.children(i2) {
                let p = DyadicRectangle::new(px, py);
                let coef = a.value(&p, q, &r);
                if coef != 0.0 {
                    *out.entry(p).or_insert(0.0) += coef * gq;
                }
            }
        }
    }
    let mut coeffs = HaarCoefficients::new(grid);
    for (p, v) in out {
        if v != 0.0 {
            coeffs.insert(p, v).expect("children stay resolvable");
        }
    }
    ShiftOutput { coeffs, dropped_keys: dropped }
}

/// Sf(x) = (Σ_R c(R)² 1_R(x)/|R|)^{1/2}.
pub fn square_function(c: &HaarCoefficients) -> GridFunction {
    let grid = *c.grid();
    let mut sq = GridFunction::zero(grid);
    let ny = grid.cells_y() as usize;
    for (r, &v) in c.iter() {
        let density = v * v * 2f64.powi((r.x.depth + r.y.depth) as i32);
        add_on_rect(&grid, &mut sq, r, density, ny);
    }
    sq.map(f64::sqrt)
}

fn add_on_rect(grid: &ProductGrid, f: &mut GridFunction, r: &DyadicRectangle, v: f64, ny: usize) {
    let (sx, lx) = grid.x.cell_span(&r.x);
    let (sy, ly) = grid.y.cell_span(&r.y);
    let nx = grid.cells_x();
    let nyc = grid.cells_y();
    for dx in 0..lx {
        let cx = (sx + dx) & (nx - 1);
        for dy in 0..ly {
            let cy = (sy + dy) & (nyc - 1);
            f.values_mut()[cx as usize * ny + cy as usize] += v;
        }
    }
}

/// (S^{i,j}f)² = Σ_R (Σ_{P∈R_i} |f̂(P)|)² Σ_{Q∈R_j} 1_{Q1}/|Q1| ⊗ 1_{Q2}/|Q2|.
/// Since the Q-children tile R, the second factor is 2^{j1+j2} 1_R / |R|.
pub fn shifted_square_function(c: &HaarCoefficients, i: (u8, u8), j: (u8, u8)) -> GridFunction {
    let grid = *c.grid();
    let ny = grid.cells_y() as usize;
    // Group |coefficients| by the ancestor rectangle at offset i.
    let mut group: BTreeMap<DyadicRectangle, f64> = BTreeMap::new();
    for (p, &v) in c.iter() {
        if let Some(r) = p.ancestor(i.0, i.1) {
            *group.entry(r).or_insert(0.0) += v.abs();
        }
    }
    let max_rx = grid.x.max_depth as i32 - i32::from(j.0);
    let max_ry = grid.y.max_depth as i32 - i32::from(j.1);
    let mut sq = GridFunction::zero(grid);
    for (r, s) in group {
        if (r.x.depth as i32) > max_rx || (r.y.depth as i32) > max_ry {
            // Q-children of R are unresolvable; R is outside this grid's sum.
            continue;
        }
        let density = s
            * s
            * 2f64.powi((j.0 + j.1) as i32)
            * 2f64.powi((r.x.depth + r.y.depth) as i32);
        add_on_rect(&grid, &mut sq, &r, density, ny);
    }
    sq.map(f64::sqrt)
}

/// Dyadic strong maximal function: sup over grid rectangles containing the
/// point of the average of |f|.
pub fn strong_maximal(f: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    let absf = f.map(f64::abs);
    let table = absf.prefix_sums();
    let mut out = GridFunction::zero(grid);
    for cx in 0..grid.cells_x() {
        for cy in 0..grid.cells_y() {
            // The finest rectangle is the cell itself; seeding with the cell
            // value keeps M_S f ≥ |f| exact instead of up to table rounding.
            let mut best = absf.at(cx, cy);
            for dx in 0..=grid.x.max_depth {
                let ix = grid.x.interval_containing(cx, dx);
                for dy in 0..=grid.y.max_depth {
                    if dx == grid.x.max_depth && dy == grid.y.max_depth {
                        continue;
                    }
                    let iy = grid.y.interval_containing(cy, dy);
                    let r = DyadicRectangle::new(ix, iy);
                    best = best.max(table.rect_average(&r));
                }
            }
            out.set(cx, cy, best);
        }
    }
    out
}

/// Weighted strong maximal function: sup over grid rectangles of
/// (1/w(R)) ∫_R |f| w.
pub fn weighted_strong_maximal(f: &GridFunction, w: &Weight) -> Result<GridFunction> {
    let grid = *f.grid();
    if grid != *w.density().grid() {
        return Err(Error::GridMismatch("weighted maximal function".into()));
    }
    let fw = f.zip(w.density(), |a, b| a.abs() * b);
    let fw_table = fw.prefix_sums();
    let w_table = w.density().prefix_sums();
    let mut out = GridFunction::zero(grid);
    for cx in 0..grid.cells_x() {
        for cy in 0..grid.cells_y() {
            // Finest rectangle: (|f| w)/w collapses to |f| at the cell.
            let mut best = f.at(cx, cy).abs();
            for dx in 0..=grid.x.max_depth {
                let ix = grid.x.interval_containing(cx, dx);
                for dy in 0..=grid.y.max_depth {
                    if dx == grid.x.max_depth && dy == grid.y.max_depth {
                        continue;
                    }
                    let iy = grid.y.interval_containing(cy, dy);
                    let r = DyadicRectangle::new(ix, iy);
                    best = best.max(fw_table.rect_sum(&r) / w_table.rect_sum(&r));
                }
            }
            out.set(cx, cy, best);
        }
    }
    Ok(out)
}

/// ⟨f, g⟩ = Σ_R c_f(R) c_g(R), requiring a common grid.
pub fn bilinear_form(cf: &HaarCoefficients, cg: &HaarCoefficients) -> Result<f64> {
    if cf.grid() != cg.grid() {
        return Err(Error::GridMismatch("bilinear form".into()));
    }
    let mut acc = 0.0;
    for (r, &v) in cf.iter() {
        let w = cg.get(r);
        if w != 0.0 {
            acc += v * w;
        }
    }
    Ok(acc)
}

/// Exact verification of the indicator identity
/// 1_R(y)/|R| = 2^{-(i1+i2+j1+j2)/2} (Σ_P 1_P(y))^{1/2} (Σ_Q 1_Q(y))^{1/2}
///              / [(|P1||P2|)^{1/2} (|Q1||Q2|)^{1/2}]
/// at every cell, with zero floating point. The per-cell claim is equivalent
/// to: the P-children tile R exactly, the Q-children tile R exactly (so both
/// indicator sums equal 1_R cellwise), and the doubled base-2 exponents of
/// the two sides agree as integers; all three parts are checked exactly.
pub fn indicator_identity_exact(
    grid: &ProductGrid,
    r: &DyadicRectangle,
    i: (u8, u8),
    j: (u8, u8),
) -> Result<bool> {
    grid.x.check_depth(r.x.depth as u32 + i.0.max(j.0) as u32)?;
    grid.y.check_depth(r.y.depth as u32 + i.1.max(j.1) as u32)?;
    let r_cells = CellSet::from_rect(*grid, r);

    // Σ_children 1 = 1_R cellwise ⇔ disjoint (counts add up) and the union
    // is exactly R's set.
    let tiles = |children: Vec<DyadicRectangle>| -> bool {
        let mut union = CellSet::empty(*grid);
        let mut total = 0u64;
        for c in &children {
            union.union_in_place(&CellSet::from_rect(*grid, c));
            total += grid.rect_cells(c);
        }
        total == r_cells.count() && union == r_cells
    };
    if !tiles(grid.rect_children(r, i)?) || !tiles(grid.rect_children(r, j)?) {
        return Ok(false);
    }

    // Inside R both indicator sums are 1, so the identity reduces to equality
    // of doubled exponents: LHS = 2^{dx+dy}, RHS = 2^{-total/2} / 2^{-(dx+dy)
    // - total/2}. Outside R both sides are zero.
    let total = (i.0 + i.1 + j.0 + j.1) as i64;
    let depth_sum = (r.x.depth + r.y.depth) as i64;
    let lhs_exp2 = 2 * depth_sum;
    let denom_exp2 = -(2 * depth_sum + total);
    let rhs_exp2 = -total - denom_exp2;
    Ok(lhs_exp2 == rhs_exp2)
}
