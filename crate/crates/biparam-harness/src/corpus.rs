//! Seeded test-function and weight corpora, plus the weights manifest.

use crate::config::{TestFunctionSpec, WeightSpec};
use biparam_sparse::dyadic::{AxisGrid, DyadicInterval, DyadicRectangle, ProductGrid};
use biparam_sparse::gridfn::GridFunction;
use biparam_sparse::haar::HaarCoefficients;
use biparam_sparse::oneparam::{HaarCoefficients1, Weight1};
use biparam_sparse::rng::SplitMix64;
use biparam_sparse::{Error, Result, Weight};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

/// Seeded coefficient value in [-1, -0.1] ∪ [0.1, 1]; bounded away from zero
/// so frozen baselines never hinge on near-cancellations.
fn draw_value(gen: &mut SplitMix64) -> f64 {
    gen.next_sign() * (0.1 + 0.9 * gen.next_f64())
}

/// Deterministic test-function coefficients for (spec, seed).
pub fn generate_test_function(
    grid: ProductGrid,
    spec: &TestFunctionSpec,
    seed: u64,
) -> Result<HaarCoefficients> {
    let mut gen = SplitMix64::new(seed);
    let mut c = HaarCoefficients::new(grid);
    match spec {
        TestFunctionSpec::RandomSparse { entries } => {
            let rects: Vec<DyadicRectangle> = grid.haar_rectangles().collect();
            if *entries > rects.len() {
                return Err(Error::InvalidParameter(format!(
                    "{entries} entries exceed {} rectangles",
                    rects.len()
                )));
            }
            let mut used = BTreeSet::new();
            while used.len() < *entries {
                let r = rects[gen.next_below(rects.len() as u64) as usize];
                if used.insert(r) {
                    c.insert(r, draw_value(&mut gen))?;
                }
            }
        }
        TestFunctionSpec::SingleHaar { x_depth, x_index, y_depth, y_index } => {
            c.insert(
                DyadicRectangle::new(
                    DyadicInterval::new(*x_depth, *x_index),
                    DyadicInterval::new(*y_depth, *y_index),
                ),
                1.0,
            )?;
        }
        TestFunctionSpec::Tensor { entries_x, entries_y } => {
            let px = profile_1d(grid.x, *entries_x, &mut gen)?;
            let py = profile_1d(grid.y, *entries_y, &mut gen)?;
            for &(ix, vx) in &px {
                for &(iy, vy) in &py {
                    c.insert(DyadicRectangle::new(ix, iy), vx * vy)?;
                }
            }
        }
        TestFunctionSpec::AdversarialNested { chain } => {
            let mut rect = DyadicRectangle::unit_square();
            let max_len = (grid.x.max_depth.min(grid.y.max_depth)) as usize;
            for step in 0..(*chain).min(max_len) {
                let sign = if step % 2 == 0 { 1.0 } else { -1.0 };
                c.insert(rect, sign)?;
                let pick_x = gen.next_bit() as u32;
                let pick_y = gen.next_bit() as u32;
                rect = DyadicRectangle::new(
                    DyadicInterval::new(rect.x.depth + 1, 2 * rect.x.index + pick_x),
                    DyadicInterval::new(rect.y.depth + 1, 2 * rect.y.index + pick_y),
                );
            }
        }
    }
    Ok(c)
}

fn profile_1d(
    axis: AxisGrid,
    entries: usize,
    gen: &mut SplitMix64,
) -> Result<Vec<(DyadicInterval, f64)>> {
    let intervals: Vec<DyadicInterval> = (0..axis.max_depth)
        .flat_map(|d| (0..(1u32 << d)).map(move |k| DyadicInterval::new(d, k)))
        .collect();
    if entries > intervals.len() {
        return Err(Error::InvalidParameter(format!(
            "{entries} profile entries exceed {} intervals",
            intervals.len()
        )));
    }
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < entries {
        let iv = intervals[gen.next_below(intervals.len() as u64) as usize];
        if used.insert(iv) {
            out.push((iv, draw_value(gen)));
        }
    }
    Ok(out)
}

/// 1-D test functions for the one-parameter experiments.
pub fn generate_test_function_1d(
    axis: AxisGrid,
    entries: usize,
    seed: u64,
) -> Result<HaarCoefficients1> {
    let mut gen = SplitMix64::new(seed);
    let mut c = HaarCoefficients1::new(axis);
    for (iv, v) in profile_1d(axis, entries, &mut gen)? {
        c.insert(iv, v)?;
    }
    Ok(c)
}

/// Power-weight exponents used throughout: valid for A_2 on both axes.
pub const POWER_EXPONENTS: [f64; 4] = [-0.5, 0.0, 0.5, 0.9];

/// The named weight corpus: the unit weight, power weights with exponents
/// from [`POWER_EXPONENTS`] per axis, two-valued steps in each variable, and
/// seeded log-random weights with dynamic range capped at 10³.
pub fn weight_corpus(grid: ProductGrid) -> Vec<(String, Weight)> {
    let mut out = Vec::new();
    out.push(("const_1".to_string(), Weight::constant(grid, 1.0).unwrap()));
    for &a1 in &POWER_EXPONENTS {
        for &a2 in &POWER_EXPONENTS {
            if a1 == 0.0 && a2 == 0.0 {
                continue; // already the constant weight
            }
            out.push((format!("power_{a1}_{a2}"), Weight::power(grid, a1, a2).unwrap()));
        }
    }
    out.push(("step_x_2_1".to_string(), Weight::step_x(grid, 2.0, 1.0).unwrap()));
    out.push(("step_y_2_1".to_string(), Weight::step_y(grid, 2.0, 1.0).unwrap()));
    out.push(("step_x_10_1".to_string(), Weight::step_x(grid, 10.0, 1.0).unwrap()));
    for seed in [101u64, 102, 103] {
        out.push((
            format!("logrand_{seed}"),
            Weight::log_random(grid, seed, 1000.0).unwrap(),
        ));
    }
    out
}

/// 1-D corpus mirroring the 2-D one.
pub fn weight_corpus_1d(axis: AxisGrid) -> Vec<(String, Weight1)> {
    let mut out = Vec::new();
    out.push(("const_1".to_string(), Weight1::constant(axis, 1.0).unwrap()));
    for &a in &POWER_EXPONENTS {
        if a == 0.0 {
            continue;
        }
        out.push((format!("power_{a}"), Weight1::power(axis, a).unwrap()));
    }
    out.push(("step_2_1".to_string(), Weight1::step(axis, 2.0, 1.0).unwrap()));
    out.push(("step_10_1".to_string(), Weight1::step(axis, 10.0, 1.0).unwrap()));
    for seed in [201u64, 202, 203] {
        out.push((format!("logrand_{seed}"), Weight1::log_random(axis, seed, 1000.0).unwrap()));
    }
    out
}

#[derive(Serialize)]
struct ManifestEntry {
    name: String,
    kind: String,
    params: Vec<f64>,
    seed: Option<u64>,
}

/// The weights manifest: named corpus members with their parameters and
/// seeds, as a JSON document.
pub fn weights_manifest_json() -> String {
    let mut entries = vec![ManifestEntry {
        name: "const_1".into(),
        kind: "constant".into(),
        params: vec![1.0],
        seed: None,
    }];
    for &a1 in &POWER_EXPONENTS {
        for &a2 in &POWER_EXPONENTS {
            if a1 == 0.0 && a2 == 0.0 {
                continue;
            }
            entries.push(ManifestEntry {
                name: format!("power_{a1}_{a2}"),
                kind: "power".into(),
                params: vec![a1, a2],
                seed: None,
            });
        }
    }
    entries.push(ManifestEntry {
        name: "step_x_2_1".into(),
        kind: "step_x".into(),
        params: vec![2.0, 1.0],
        seed: None,
    });
    entries.push(ManifestEntry {
        name: "step_y_2_1".into(),
        kind: "step_y".into(),
        params: vec![2.0, 1.0],
        seed: None,
    });
    entries.push(ManifestEntry {
        name: "step_x_10_1".into(),
        kind: "step_x".into(),
        params: vec![10.0, 1.0],
        seed: None,
    });
    for seed in [101u64, 102, 103] {
        entries.push(ManifestEntry {
            name: format!("logrand_{seed}"),
            kind: "log_random".into(),
            params: vec![1000.0],
            seed: Some(seed),
        });
    }
    serde_json::to_string_pretty(&entries).expect("manifest serializes")
}

/// Resolve a weight spec for one trial: the corpus cycles by trial index,
/// names look up the corpus, paths load grid-function files (.json or flat
/// binary by extension).
pub fn resolve_weight(grid: ProductGrid, spec: &WeightSpec, trial: usize) -> Result<(String, Weight)> {
    match spec {
        WeightSpec::Corpus => {
            let corpus = weight_corpus(grid);
            let (name, w) = corpus[trial % corpus.len()].clone();
            Ok((name, w))
        }
        WeightSpec::Named(name) => {
            let corpus = weight_corpus(grid);
            corpus
                .into_iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown weight '{name}'")))
        }
        WeightSpec::File(path) => {
            let f = load_grid_function(path)?;
            if f.grid() != &grid {
                return Err(Error::GridMismatch(format!(
                    "weight file {} has grid {:?}, expected {:?}",
                    path.display(),
                    f.grid(),
                    grid
                )));
            }
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            Ok((name.unwrap_or_else(|| "file".into()), Weight::new(f)?))
        }
    }
}

pub fn resolve_weight_1d(axis: AxisGrid, spec: &WeightSpec, trial: usize) -> Result<(String, Weight1)> {
    match spec {
        WeightSpec::Corpus => {
            let corpus = weight_corpus_1d(axis);
            let (name, w) = corpus[trial % corpus.len()].clone();
            Ok((name, w))
        }
        WeightSpec::Named(name) => {
            let corpus = weight_corpus_1d(axis);
            corpus
                .into_iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown 1-D weight '{name}'")))
        }
        WeightSpec::File(path) => Err(Error::InvalidParameter(format!(
            "1-D experiments take corpus or named weights, not files ({})",
            path.display()
        ))),
    }
}

/// Load a grid function from JSON (".json") or the flat binary layout.
pub fn load_grid_function(path: &Path) -> Result<GridFunction> {
    if path.extension().map(|e| e == "json").unwrap_or(false) {
        let text = fs::read_to_string(path).map_err(|e| Error::Format(e.to_string()))?;
        GridFunction::from_json(&text)
    } else {
        let bytes = fs::read(path).map_err(|e| Error::Format(e.to_string()))?;
        GridFunction::read_binary(&mut bytes.as_slice())
    }
}

/// The calibration corpus for C₁: seeded 1-D functions and weights across the
/// complexity range used by the one-parameter experiments.
pub fn calibration_corpus_1d(axis: AxisGrid) -> Vec<(HaarCoefficients1, Weight1, u8, u8)> {
    let weights = weight_corpus_1d(axis);
    let mut out = Vec::new();
    let mut widx = 0usize;
    for seed in 0..10u64 {
        for (i, j) in [(0u8, 0u8), (1, 1), (2, 1), (1, 2), (3, 3)] {
            let c = generate_test_function_1d(axis, 12, 1000 + seed * 7 + (i as u64) * 101 + j as u64)
                .unwrap();
            let (_, w) = &weights[widx % weights.len()];
            out.push((c, w.clone(), i, j));
            widx += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_haar_is_one_unit_coefficient() {
        let grid = ProductGrid::standard(4, 4);
        let spec =
            TestFunctionSpec::SingleHaar { x_depth: 0, x_index: 0, y_depth: 0, y_index: 0 };
        let c = generate_test_function(grid, &spec, 9).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(&DyadicRectangle::unit_square()), 1.0);
    }

    #[test]
    fn random_sparse_zero_is_empty_and_deterministic() {
        let grid = ProductGrid::standard(5, 5);
        let empty =
            generate_test_function(grid, &TestFunctionSpec::RandomSparse { entries: 0 }, 7)
                .unwrap();
        assert!(empty.is_empty());
        let a = generate_test_function(grid, &TestFunctionSpec::RandomSparse { entries: 20 }, 7)
            .unwrap();
        let b = generate_test_function(grid, &TestFunctionSpec::RandomSparse { entries: 20 }, 7)
            .unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.len(), 20);
    }

    #[test]
    fn oversized_request_errors() {
        let grid = ProductGrid::standard(2, 2);
        assert!(generate_test_function(
            grid,
            &TestFunctionSpec::RandomSparse { entries: 100 },
            1
        )
        .is_err());
    }

    #[test]
    fn tensor_products_have_product_structure() {
        let grid = ProductGrid::standard(4, 4);
        let c = generate_test_function(
            grid,
            &TestFunctionSpec::Tensor { entries_x: 3, entries_y: 2 },
            11,
        )
        .unwrap();
        assert_eq!(c.len(), 6);
    }

    #[test]
    fn nested_chain_is_nested() {
        let grid = ProductGrid::standard(5, 5);
        let c = generate_test_function(grid, &TestFunctionSpec::AdversarialNested { chain: 4 }, 3)
            .unwrap();
        let keys: Vec<_> = c.keys().copied().collect();
        assert_eq!(keys.len(), 4);
        // BTreeMap order puts shallower rectangles first; each contains the next.
        for pair in keys.windows(2) {
            assert!(pair[0].contains(&pair[1]) || pair[1].contains(&pair[0]));
        }
    }

    #[test]
    fn corpus_members_are_valid_and_named_lookup_works() {
        let grid = ProductGrid::standard(4, 4);
        let corpus = weight_corpus(grid);
        assert!(corpus.len() > 15);
        let (name, _) =
            resolve_weight(grid, &WeightSpec::Named("power_0.5_0".into()), 0).unwrap();
        assert_eq!(name, "power_0.5_0");
        assert!(resolve_weight(grid, &WeightSpec::Named("nope".into()), 0).is_err());
        let manifest = weights_manifest_json();
        for (name, _) in &corpus {
            assert!(manifest.contains(name.as_str()), "manifest missing {name}");
        }
    }
}
