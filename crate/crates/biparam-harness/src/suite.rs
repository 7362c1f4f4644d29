//! The standard full battery: every experiment kind with its reference
//! parameters, used for baseline freezing and for the determinism check.

use crate::baseline::Baselines;
use crate::config::{ExperimentConfig, ExperimentKind, TestFunctionSpec};
use crate::corpus::generate_test_function;
use crate::experiments::{run_experiment_labeled, SweepReport};
use biparam_sparse::{ProductGrid, Result};

/// The labeled sections of a full-suite run, in execution order.
pub fn suite_configs(seed: u64) -> Vec<(String, ExperimentConfig)> {
    let mut out = Vec::new();
    for depth in [4u8, 5, 6] {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::MartingaleDomination);
        cfg.depth_x = depth;
        cfg.depth_y = depth;
        cfg.trials = 100;
        cfg.seed = seed;
        out.push((format!("martingale_d{depth}"), cfg));
    }
    {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::ShiftDomination);
        cfg.depth_x = 5;
        cfg.depth_y = 5;
        cfg.trials = 8100; // one hundred passes over the 81 complexities
        cfg.seed = seed;
        out.push(("shift_sweep_d5".to_string(), cfg));
    }
    {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::WeightedNorm);
        cfg.depth_x = 4;
        cfg.depth_y = 4;
        cfg.trials = 44; // two passes over the 22-member weight corpus
        cfg.seed = seed;
        out.push(("weighted_norm".to_string(), cfg));
    }
    {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::WeakType);
        cfg.depth_1d = 8;
        cfg.trials = 50;
        cfg.seed = seed;
        out.push(("weak_type".to_string(), cfg));
    }
    {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::OneparamSparse);
        cfg.depth_1d = 8;
        cfg.trials = 54; // six passes over the nine (i,j) pairs
        cfg.seed = seed;
        out.push(("oneparam_sparse".to_string(), cfg));
    }
    {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::Covering);
        cfg.depth_x = 5;
        cfg.depth_y = 5;
        cfg.trials = 20;
        cfg.rect_count = 50;
        cfg.seed = seed;
        out.push(("covering".to_string(), cfg));
    }
    {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::GridAverage);
        cfg.depth_x = 4;
        cfg.depth_y = 4;
        cfg.grid_count = 16;
        cfg.seed = seed;
        out.push(("grid_average".to_string(), cfg));
    }
    out
}

pub fn run_suite(seed: u64) -> Result<Vec<SweepReport>> {
    let mut reports = Vec::new();
    for (label, cfg) in suite_configs(seed) {
        reports.push(run_experiment_labeled(&cfg, &label)?);
    }
    Ok(reports)
}

/// Freeze aggregates of every section plus the reference coefficient list
/// (20 seeded entries at depth (5,5), seed 7).
pub fn freeze_suite(reports: &[SweepReport], baselines: &mut Baselines) -> Result<()> {
    for rep in reports {
        baselines.freeze(rep);
    }
    let grid = ProductGrid::standard(5, 5);
    let reference =
        generate_test_function(grid, &TestFunctionSpec::RandomSparse { entries: 20 }, 7)?;
    baselines
        .artifacts
        .insert("random_sparse_20_seed7_d5x5".to_string(), reference.to_json());
    Ok(())
}
