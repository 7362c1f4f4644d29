//! Property tests for the structural invariants: exact measure arithmetic,
//! partition-of-unity for children, Parseval, transform linearity, and
//! unitarity of sign martingale transforms.

use biparam_sparse::cells::CellSet;
use biparam_sparse::dyadic::{AxisGrid, DyadicInterval, DyadicRectangle, ProductGrid};
use biparam_sparse::haar::{analyze, HaarCoefficients};
use biparam_sparse::operators::{martingale_transform, square_function, EpsilonSymbol};
use biparam_sparse::sparse::build_level_sets;
use proptest::prelude::*;

fn arb_grid() -> impl Strategy<Value = ProductGrid> {
    (2u8..=5, 2u8..=5, 0u32..32, 0u32..32).prop_map(|(dx, dy, sx, sy)| {
        ProductGrid::new(dx, dy, sx & ((1 << dx) - 1), sy & ((1 << dy) - 1)).unwrap()
    })
}

fn arb_cellset(grid: ProductGrid) -> impl Strategy<Value = CellSet> {
    proptest::collection::vec(any::<bool>(), grid.cell_count()).prop_map(move |bits| {
        let mut s = CellSet::empty(grid);
        for (i, b) in bits.iter().enumerate() {
            if *b {
                s.insert_cell(i);
            }
        }
        s
    })
}

fn arb_coeffs(grid: ProductGrid) -> impl Strategy<Value = HaarCoefficients> {
    let rects: Vec<DyadicRectangle> = grid.haar_rectangles().collect();
    proptest::collection::vec(
        (0..rects.len(), -2.0f64..2.0),
        0..12,
    )
    .prop_map(move |entries| {
        let mut c = HaarCoefficients::new(grid);
        for (idx, v) in entries {
            let prior = c.get(&rects[idx]);
            c.insert(rects[idx], prior + v).unwrap();
        }
        c
    })
}

proptest! {
    #[test]
    fn measure_inclusion_exclusion(
        (_grid, seeds) in arb_grid().prop_flat_map(|g| {
            (Just(g), (arb_cellset(g), arb_cellset(g)))
        })
    ) {
        let (a, b) = seeds;
        let lhs = a.union(&b).measure().add(&a.intersect(&b).measure());
        let rhs = a.measure().add(&b.measure());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn children_partition_parent(depth in 0u8..5, index in 0u32..32, k in 0u8..3) {
        let axis = AxisGrid::standard((depth + k).max(1));
        let iv = DyadicInterval::new(depth, index & ((1 << depth) - 1));
        let kids = axis.children(&iv, k).unwrap();
        prop_assert_eq!(kids.len(), 1usize << k);
        let total: u32 = kids.iter().map(|c| axis.cell_span(c).1).sum();
        prop_assert_eq!(total, axis.cell_span(&iv).1);
        // Pairwise disjoint in cell space.
        let mut seen = vec![false; axis.cells() as usize];
        for c in &kids {
            let (s, l) = axis.cell_span(c);
            for d in 0..l {
                let cell = ((s + d) & (axis.cells() - 1)) as usize;
                prop_assert!(!seen[cell]);
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn parseval_for_synthesized_functions(
        (_grid, c) in arb_grid().prop_flat_map(|g| (Just(g), arb_coeffs(g)))
    ) {
        let f = c.synthesize();
        let lhs = f.l2_norm().powi(2);
        let rhs = c.energy();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn transform_linearity(
        (grid, cf, cg) in arb_grid().prop_flat_map(|g| {
            (Just(g), arb_coeffs(g), arb_coeffs(g))
        }),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let f = cf.synthesize();
        let g2 = cg.synthesize();
        let combo = f.zip(&g2, |a, b| alpha * a + beta * b);
        let analyzed = analyze(&combo);
        for r in grid.haar_rectangles() {
            let expect = alpha * cf.get(&r) + beta * cg.get(&r);
            prop_assert!((analyzed.get(&r) - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn sign_martingale_is_unitary(
        (grid, c) in arb_grid().prop_flat_map(|g| (Just(g), arb_coeffs(g))),
        seed in any::<u64>(),
    ) {
        let t = martingale_transform(&c, &EpsilonSymbol::RandomSigns { seed, magnitude: 1.0 });
        // Entrywise ±1 multiplication preserves Σ c² exactly.
        prop_assert_eq!(t.energy(), c.energy());
        let _ = grid;
    }

    #[test]
    fn square_function_l2_matches_energy(
        (_grid, c) in arb_grid().prop_flat_map(|g| (Just(g), arb_coeffs(g)))
    ) {
        let s = square_function(&c);
        prop_assert!((s.l2_norm().powi(2) - c.energy()).abs() <= 1e-9 * c.energy().max(1.0));
    }

    #[test]
    fn level_sets_nest(
        (_grid, cf, cg) in arb_grid().prop_flat_map(|g| {
            (Just(g), arb_coeffs(g), arb_coeffs(g))
        })
    ) {
        let sf = square_function(&cf);
        let sg = square_function(&cg);
        let l = build_level_sets(&sf, &sg, 4.0).unwrap();
        for k in 0..l.omegas().len().saturating_sub(1) {
            prop_assert!(l.omega(k + 1).is_subset_of(&l.omega(k)));
        }
        let grid = sf.grid();
        prop_assert!(2 * l.omega(0).count() <= grid.cell_count() as u64);
    }
}
