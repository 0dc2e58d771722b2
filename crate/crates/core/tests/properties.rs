use proptest::prelude::*;

use geomatch_core::graph::build_graph_all_pairs;
use geomatch_core::matching::{algebraic_matching_on_graph, AlgebraicConfig};
use geomatch_core::matrix::{lu, mat_mul, partial_eliminate};
use geomatch_core::sparsify::{combine_matchings, sparsify, union_pierced, StructureChoice};
use geomatch_core::{
    blossom_maximum_matching, build_graph, exhaustive_matching_size, gen_prime, induced_subgraph, Field, FieldMatrix,
    GeomObject, Point,
};

fn disks(max: usize, spread: f64) -> impl Strategy<Value = Vec<GeomObject>> {
    prop::collection::vec((0.0..spread, 0.0..spread), 1..=max)
        .prop_map(|cs| cs.into_iter().enumerate().map(|(i, (x, y))| GeomObject::unit_disk(i, x, y)).collect())
}

fn mixed(max: usize, spread: f64) -> impl Strategy<Value = Vec<GeomObject>> {
    prop::collection::vec((0.0..spread, 0.0..spread, 0.0..1.0f64, any::<bool>()), 1..=max).prop_map(|cs| {
        cs.into_iter()
            .enumerate()
            .map(|(i, (x, y, s, round))| {
                if round {
                    GeomObject::disk(i, x, y, 0.71 + 0.29 * s)
                } else {
                    GeomObject::rect(i, x, y, x + 1.0 + s, y + 1.0)
                }
            })
            .collect()
    })
}

fn sparsified_size(objs: &[GeomObject], psi: f64, structure: StructureChoice) -> (usize, usize, bool) {
    let g = build_graph(objs);
    let s = sparsify(objs, psi, structure).unwrap();
    let mw = blossom_maximum_matching(&induced_subgraph(&g, &s.kept)).mapped(&s.kept);
    let all = combine_matchings(&mw, &s.residuals);
    let even = s.residuals.iter().all(|r| r.1.len() % 2 == 0);
    (all.len(), usize::from(all.validate(&g).is_err()) + s.bound_violations().len(), even)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shoup_matches_wide_product(p_seed in 0usize..5000, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let f = gen_prime(p_seed);
        let p = f.p();
        let (a, b, c) = (a % p, b % p, c % p);
        let wide = (a as u128 * b as u128 % p as u128) as u64;
        prop_assert_eq!(f.mul(a, b), wide);
        prop_assert_eq!(f.shoup(b).mul(a), wide);
        prop_assert_eq!(f.shoup(b).mul_sub_from(c, a), f.sub(c, wide));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }

    #[test]
    fn grid_graph_equals_all_pairs(objs in mixed(60, 12.0)) {
        let (g, h) = (build_graph(&objs), build_graph_all_pairs(&objs));
        prop_assert_eq!(g.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
    }

    #[test]
    fn algebraic_matching_is_maximum(objs in disks(40, 9.0), seed in any::<u64>()) {
        let g = build_graph(&objs);
        let want = blossom_maximum_matching(&g).len();
        let out = algebraic_matching_on_graph(&objs, &g, &AlgebraicConfig { seed, ..Default::default() }).unwrap();
        prop_assert!(out.matching.validate(&g).is_ok());
        prop_assert_eq!(out.matching.len(), want);
    }

    #[test]
    fn sparsify_keeps_matching_size(objs in disks(80, 4.0)) {
        let want = blossom_maximum_matching(&build_graph(&objs)).len();
        for structure in [StructureChoice::Naive, StructureChoice::UnitDisk] {
            let (got, faults, even) = sparsified_size(&objs, 2.0, structure);
            prop_assert_eq!(got, want);
            prop_assert_eq!(faults, 0);
            prop_assert!(even);
        }
    }

    #[test]
    fn structures_keep_the_same_family(objs in disks(120, 5.0)) {
        let a = sparsify(&objs, 2.0, StructureChoice::Naive).unwrap();
        let b = sparsify(&objs, 2.0, StructureChoice::UnitDisk).unwrap();
        prop_assert_eq!(a.kept, b.kept);
        prop_assert_eq!(a.residuals, b.residuals);
    }

    #[test]
    fn small_families_agree_with_exhaustive_search(objs in mixed(14, 3.0)) {
        let g = build_graph(&objs);
        let (got, faults, even) = sparsified_size(&objs, 2.0, StructureChoice::Naive);
        prop_assert_eq!(got, exhaustive_matching_size(&g).unwrap());
        prop_assert_eq!(faults, 0);
        prop_assert!(even);
    }

    #[test]
    fn union_membership(
        raw in prop::collection::vec((0.0..std::f64::consts::TAU, 0.0..0.95f64, 0.2..3.0f64), 1..40),
        probes in prop::collection::vec((-7.0..7.0f64, -7.0..7.0f64), 200),
    ) {
        let objs: Vec<GeomObject> = raw
            .iter()
            .enumerate()
            .map(|(i, &(a, t, r))| GeomObject::disk(i, t * r * a.cos(), t * r * a.sin(), r))
            .collect();
        let u = union_pierced(&objs, Point::new(0.0, 0.0)).unwrap();
        for (x, y) in probes {
            let p = Point::new(x, y);
            // Skip points within rounding distance of some circle.
            let near = raw.iter().any(|&(a, t, r)| {
                let (cx, cy) = (t * r * a.cos(), t * r * a.sin());
                ((p.x - cx).hypot(p.y - cy) - r).abs() < 1e-9
            });
            if !near {
                prop_assert_eq!(u.contains(p), objs.iter().any(|o| o.contains_point(p)));
            }
        }
    }

    #[test]
    fn elimination_recomposes(n in 1usize..24, k_frac in 0.0..=1.0f64, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f: Field = gen_prime(n);
        let a = FieldMatrix::from_fn(n, n, f, |_, _| f.random(&mut rng));
        let k = ((n as f64) * k_frac) as usize;
        let pe = partial_eliminate(&a, k).unwrap();
        prop_assert!(pe.recompose().unwrap() == a);
        let full = lu(&a).unwrap();
        prop_assert!(mat_mul(&full.l, &full.u).unwrap() == a);
    }
}
