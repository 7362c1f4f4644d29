//! Experiment kinds: one trial function per kind, a shared row schema, and
//! the sweep driver.
//!
//! Per-trial seeds derive from the master seed by a stateless hash, so trials
//! parallelize without losing replay: every row embeds everything needed to
//! re-run it alone.

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::corpus;
use crate::parallel::parallel_map;
use biparam_sparse::dyadic::{AxisGrid, DyadicRectangle, ProductGrid};
use biparam_sparse::operators::{Complexity, EpsilonSymbol, ShiftCoefficients};
use biparam_sparse::oneparam;
use biparam_sparse::rng::{hash_words, trial_seed, SplitMix64};
use biparam_sparse::sparse::{domination_experiment, DominationParams, DominationReport, OperatorSpec};
use biparam_sparse::stopping;
use biparam_sparse::covering;
use biparam_sparse::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Fixed CSV column set, versioned in the file header.
pub const CSV_SCHEMA: &str = "v1";
pub const CSV_COLUMNS: &[&str] = &[
    "trial", "kind", "depth_x", "depth_y", "seed", "c", "beta", "c1", "c2", "epsilon", "p",
    "i1", "i2", "j1", "j2", "generator", "weight", "lhs", "rhs", "ratio", "prefactor",
    "collection_size", "eta_actual", "carleson_estimate", "sparsity_ok", "omega0_measure",
    "omega0_half_ok", "dropped_keys", "good_part_actual", "good_part_bound", "a2",
    "weighted_bound", "observed_exponent", "c1_observed", "c2_observed", "slice_ok",
    "tree_nodes", "tree_sparse_ok",
];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SweepRow {
    pub trial: usize,
    pub kind: String,
    pub depth_x: u8,
    pub depth_y: u8,
    pub seed: u64,
    pub c: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub p: f64,
    pub i1: u8,
    pub i2: u8,
    pub j1: u8,
    pub j2: u8,
    pub generator: String,
    pub weight: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub prefactor: Option<f64>,
    pub collection_size: Option<usize>,
    pub eta_actual: Option<f64>,
    pub carleson_estimate: Option<f64>,
    pub sparsity_ok: Option<bool>,
    pub omega0_measure: Option<f64>,
    pub omega0_half_ok: Option<bool>,
    pub dropped_keys: Option<usize>,
    pub good_part_actual: Option<f64>,
    pub good_part_bound: Option<f64>,
    pub a2: Option<f64>,
    pub weighted_bound: Option<f64>,
    pub observed_exponent: Option<f64>,
    pub c1_observed: Option<f64>,
    pub c2_observed: Option<f64>,
    pub slice_ok: Option<bool>,
    pub tree_nodes: Option<usize>,
    pub tree_sparse_ok: Option<bool>,
}

fn fmt_opt_f64(v: &Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| format!("{x}")).unwrap_or_default()
}

impl SweepRow {
    /// One CSV line in the fixed column order.
    pub fn to_csv(&self) -> String {
        [
            self.trial.to_string(),
            self.kind.clone(),
            self.depth_x.to_string(),
            self.depth_y.to_string(),
            self.seed.to_string(),
            format!("{}", self.c),
            format!("{}", self.beta),
            format!("{}", self.c1),
            format!("{}", self.c2),
            format!("{}", self.epsilon),
            format!("{}", self.p),
            self.i1.to_string(),
            self.i2.to_string(),
            self.j1.to_string(),
            self.j2.to_string(),
            self.generator.clone(),
            self.weight.clone(),
            fmt_opt_f64(&self.lhs),
            fmt_opt_f64(&self.rhs),
            fmt_opt_f64(&self.ratio),
            fmt_opt_f64(&self.prefactor),
            fmt_opt(&self.collection_size),
            fmt_opt_f64(&self.eta_actual),
            fmt_opt_f64(&self.carleson_estimate),
            fmt_opt(&self.sparsity_ok),
            fmt_opt_f64(&self.omega0_measure),
            fmt_opt(&self.omega0_half_ok),
            fmt_opt(&self.dropped_keys),
            fmt_opt_f64(&self.good_part_actual),
            fmt_opt_f64(&self.good_part_bound),
            fmt_opt_f64(&self.a2),
            fmt_opt_f64(&self.weighted_bound),
            fmt_opt_f64(&self.observed_exponent),
            fmt_opt_f64(&self.c1_observed),
            fmt_opt_f64(&self.c2_observed),
            fmt_opt(&self.slice_ok),
            fmt_opt(&self.tree_nodes),
            fmt_opt(&self.tree_sparse_ok),
        ]
        .join(",")
    }

    /// Exact hard-invariant failures in this row (float-free checks only).
    pub fn invariant_failed(&self) -> bool {
        self.sparsity_ok == Some(false)
            || self.omega0_half_ok == Some(false)
            || self.slice_ok == Some(false)
            || self.tree_sparse_ok == Some(false)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub min_eta: f64,
    pub invariant_failures: usize,
    /// Kind-specific extras (e.g. best A₂ exponent fit).
    pub extra: BTreeMap<String, f64>,
}

impl Aggregates {
    fn from_rows(rows: &[SweepRow]) -> Self {
        let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        let mean_ratio = if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        };
        let min_eta = rows.iter().filter_map(|r| r.eta_actual).fold(1.0, f64::min);
        let invariant_failures = rows.iter().filter(|r| r.invariant_failed()).count();
        let mut extra = BTreeMap::new();
        let best_exp = rows
            .iter()
            .filter_map(|r| r.observed_exponent)
            .fold(f64::NEG_INFINITY, f64::max);
        if best_exp.is_finite() {
            extra.insert("best_exponent_fit".to_string(), best_exp);
        }
        Aggregates {
            trials: rows.len(),
            max_ratio,
            mean_ratio,
            min_eta,
            invariant_failures,
            extra,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    /// Section label used for baseline keys (kind plus distinguishing params).
    pub label: String,
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    pub aggregates: Aggregates,
}

fn base_row(config: &ExperimentConfig, trial: usize, seed: u64) -> SweepRow {
    SweepRow {
        trial,
        kind: config.kind.as_str().to_string(),
        depth_x: config.depth_x,
        depth_y: config.depth_y,
        seed,
        c: config.c,
        beta: config.beta,
        c1: config.c1,
        c2: config.c2,
        epsilon: config.epsilon,
        p: config.p,
        ..Default::default()
    }
}

fn fill_domination(row: &mut SweepRow, rep: &DominationReport) {
    row.lhs = Some(rep.lhs);
    row.rhs = Some(rep.rhs);
    row.ratio = Some(rep.ratio);
    row.prefactor = Some(rep.prefactor);
    row.collection_size = Some(rep.collection_size);
    row.eta_actual = Some(rep.eta_actual);
    row.carleson_estimate = Some(rep.carleson_estimate);
    row.sparsity_ok = Some(rep.sparsity_ok);
    row.omega0_measure = Some(rep.omega0_measure);
    row.omega0_half_ok = Some(rep.omega0_half_ok);
    row.dropped_keys = Some(rep.dropped_keys);
    row.good_part_actual = Some(rep.good_part_actual);
    row.good_part_bound = Some(rep.good_part_bound);
}

/// The 81 complexities (i, j) ∈ {0,1,2}⁴, entrywise, in lexicographic order.
pub fn complexity_sweep() -> Vec<Complexity> {
    let mut out = Vec::with_capacity(81);
    for i1 in 0..=2u8 {
        for i2 in 0..=2u8 {
            for j1 in 0..=2u8 {
                for j2 in 0..=2u8 {
                    out.push(Complexity::new(i1, i2, j1, j2));
                }
            }
        }
    }
    out
}

fn martingale_trial(config: &ExperimentConfig, trial: usize) -> Result<SweepRow> {
    let seed = trial_seed(config.seed, trial as u64);
    let grid = ProductGrid::standard(config.depth_x, config.depth_y);
    let cf = corpus::generate_test_function(grid, &config.test_function, hash_words(seed, &[1]))?;
    let cg = corpus::generate_test_function(grid, &config.test_function, hash_words(seed, &[2]))?;
    let eps = EpsilonSymbol::RandomSigns { seed: hash_words(seed, &[3]), magnitude: 1.0 };
    let params = DominationParams { c: config.c, beta: config.beta, seed };
    let rep = domination_experiment(&cf, &cg, &OperatorSpec::Martingale(eps), &params)?;
    let mut row = base_row(config, trial, seed);
    fill_domination(&mut row, &rep);
    Ok(row)
}

fn shift_trial(config: &ExperimentConfig, trial: usize, sweep: bool) -> Result<SweepRow> {
    let seed = trial_seed(config.seed, trial as u64);
    let grid = ProductGrid::standard(config.depth_x, config.depth_y);
    let complexity = if sweep {
        let combos = complexity_sweep();
        combos[trial % combos.len()]
    } else {
        config.complexity
    };
    let cf = corpus::generate_test_function(grid, &config.test_function, hash_words(seed, &[1]))?;
    let cg = corpus::generate_test_function(grid, &config.test_function, hash_words(seed, &[2]))?;
    let shift = match config.generator.as_str() {
        "max_magnitude_random_sign" => {
            ShiftCoefficients::max_magnitude_random_sign(complexity, hash_words(seed, &[3]))
        }
        "haar_of_identity" => ShiftCoefficients {
            complexity,
            generator: biparam_sparse::operators::ShiftGenerator::HaarOfIdentity,
        },
        other => return Err(Error::InvalidParameter(format!("generator '{other}'"))),
    };
    let params = DominationParams { c: config.c, beta: config.beta, seed };
    let rep = domination_experiment(&cf, &cg, &OperatorSpec::Shift(shift), &params)?;
    let mut row = base_row(config, trial, seed);
    row.i1 = complexity.i.0;
    row.i2 = complexity.i.1;
    row.j1 = complexity.j.0;
    row.j2 = complexity.j.1;
    row.generator = config.generator.clone();
    fill_domination(&mut row, &rep);
    Ok(row)
}

fn weighted_norm_trial(config: &ExperimentConfig, trial: usize) -> Result<SweepRow> {
    let seed = trial_seed(config.seed, trial as u64);
    let grid = ProductGrid::standard(config.depth_x, config.depth_y);
    let (wname, w) = corpus::resolve_weight(grid, &config.weight, trial)?;
    let cf = corpus::generate_test_function(grid, &config.test_function, hash_words(seed, &[1]))?;
    let eps = EpsilonSymbol::RandomSigns { seed: hash_words(seed, &[3]), magnitude: 1.0 };
    let tf = biparam_sparse::operators::martingale_transform(&cf, &eps);
    let f = cf.synthesize();
    let tf_fn = tf.synthesize();
    let norm_f = w.weighted_norm(&f, config.p)?;
    let norm_tf = w.weighted_norm(&tf_fn, config.p)?;
    let a2 = w.ap_characteristic(2.0)?;
    let bound = a2.powi(8);
    let ratio = if norm_f == 0.0 { 0.0 } else { norm_tf / norm_f };
    let mut row = base_row(config, trial, seed);
    row.weight = wname;
    row.lhs = Some(norm_tf);
    row.rhs = Some(bound * norm_f);
    row.ratio = Some(ratio);
    row.a2 = Some(a2);
    row.weighted_bound = Some(bound);
    row.observed_exponent = if a2 > 1.0 + 1e-9 && ratio > 0.0 {
        Some(ratio.ln() / a2.ln())
    } else {
        None
    };
    Ok(row)
}

fn weak_type_trial(config: &ExperimentConfig, trial: usize) -> Result<SweepRow> {
    let seed = trial_seed(config.seed, trial as u64);
    let axis = AxisGrid::standard(config.depth_1d);
    // Cycle (i, j) over {0..=3}² by trial index.
    let i = ((trial / 4) % 4) as u8;
    let j = (trial % 4) as u8;
    let c = corpus::generate_test_function_1d(axis, 16, hash_words(seed, &[1]))?;
    let sup = oneparam::weak_type_sup_exact(&c, i, j)?;
    let mut row = base_row(config, trial, seed);
    row.i1 = i;
    row.j1 = j;
    row.ratio = Some(sup);
    Ok(row)
}

fn oneparam_sparse_trial(config: &ExperimentConfig, trial: usize) -> Result<SweepRow> {
    let seed = trial_seed(config.seed, trial as u64);
    let axis = AxisGrid::standard(config.depth_1d);
    // Cycle (i, j) over {0,1,2}².
    let i = ((trial / 3) % 3) as u8;
    let j = (trial % 3) as u8;
    let c = corpus::generate_test_function_1d(axis, 14, hash_words(seed, &[1]))?;
    let (wname, w) = corpus::resolve_weight_1d(axis, &config.weight, trial)?;
    let tree = stopping::stopping_select(&c, &w, i, j, config.c1, config.c2)?;
    let ratio = stopping::verify_shift_sparse_bound(&c, &w, i, j, &tree)?;
    let mut row = base_row(config, trial, seed);
    row.i1 = i;
    row.j1 = j;
    row.weight = wname;
    row.ratio = Some(ratio);
    row.tree_nodes = Some(tree.nodes().len());
    row.tree_sparse_ok = Some(tree.sparsity_holds());
    Ok(row)
}

fn covering_trial(config: &ExperimentConfig, trial: usize) -> Result<SweepRow> {
    let seed = trial_seed(config.seed, trial as u64);
    let grid = ProductGrid::standard(config.depth_x, config.depth_y);
    let (wname, w) = corpus::resolve_weight(grid, &config.weight, trial)?;
    let mut gen = SplitMix64::new(hash_words(seed, &[1]));
    let all: Vec<DyadicRectangle> = grid.rectangles().collect();
    let rects: Vec<DyadicRectangle> = (0..config.rect_count)
        .map(|_| all[gen.next_below(all.len() as u64) as usize])
        .collect();
    let run = covering::covering_select(&grid, &rects, config.epsilon)?;
    let (c1_obs, c2_obs) = covering::verify_covering(&run, &w, config.p)?;
    let slices = covering::verify_slices(&run);
    let ap = w.ap_characteristic(config.p)?;
    let bound = config.epsilon.powf(-config.p) * ap;
    let mut row = base_row(config, trial, seed);
    row.weight = wname;
    row.a2 = Some(ap);
    row.c1_observed = Some(c1_obs);
    row.c2_observed = Some(c2_obs);
    row.ratio = Some(c2_obs / bound);
    row.rhs = Some(bound);
    row.lhs = Some(c2_obs);
    row.slice_ok =
        Some(slices.slice_identity_ok && slices.e_disjoint_ok && slices.e_fraction_ok);
    row.collection_size = Some(run.selected.len());
    Ok(row)
}

fn grid_average_trial(config: &ExperimentConfig, trial: usize) -> Result<SweepRow> {
    // One trial per shifted grid; the function/symbol seeds are shared across
    // grids so only the grid changes.
    let grid_seed = hash_words(config.seed, &[5, trial as u64]);
    let grid = ProductGrid::random_shifted(config.depth_x, config.depth_y, grid_seed)?;
    let cf =
        corpus::generate_test_function(grid, &config.test_function, hash_words(config.seed, &[1]))?;
    let cg =
        corpus::generate_test_function(grid, &config.test_function, hash_words(config.seed, &[2]))?;
    let eps =
        EpsilonSymbol::RandomSigns { seed: hash_words(config.seed, &[3]), magnitude: 1.0 };
    let params = DominationParams { c: config.c, beta: config.beta, seed: grid_seed };
    let rep = domination_experiment(&cf, &cg, &OperatorSpec::Martingale(eps), &params)?;
    let mut row = base_row(config, trial, grid_seed);
    fill_domination(&mut row, &rep);
    Ok(row)
}

/// Run every trial of the configured experiment, in parallel, and assemble
/// rows in trial order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SweepReport> {
    run_experiment_labeled(config, config.kind.as_str())
}

pub fn run_experiment_labeled(config: &ExperimentConfig, label: &str) -> Result<SweepReport> {
    config.validate()?;
    let trials = match config.kind {
        ExperimentKind::GridAverage => config.grid_count,
        _ => config.trials,
    };
    let sweep = matches!(config.kind, ExperimentKind::ShiftDomination);
    let results: Vec<Result<SweepRow>> = parallel_map(trials, |t| match config.kind {
        ExperimentKind::MartingaleDomination => martingale_trial(config, t),
        ExperimentKind::ShiftDomination => shift_trial(config, t, sweep),
        ExperimentKind::WeightedNorm => weighted_norm_trial(config, t),
        ExperimentKind::WeakType => weak_type_trial(config, t),
        ExperimentKind::OneparamSparse => oneparam_sparse_trial(config, t),
        ExperimentKind::Covering => covering_trial(config, t),
        ExperimentKind::GridAverage => grid_average_trial(config, t),
    });
    let mut rows = Vec::with_capacity(trials);
    for r in results {
        rows.push(r?);
    }
    let aggregates = Aggregates::from_rows(&rows);
    Ok(SweepReport {
        label: label.to_string(),
        config: config.clone(),
        rows,
        aggregates,
    })
}
