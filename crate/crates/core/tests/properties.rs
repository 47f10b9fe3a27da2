use std::collections::BTreeSet;

use coarse_cut_core::graph::k_components;
use coarse_cut_core::group::FiniteGroup;
use coarse_cut_core::invariants::{cut, cut_lower_from_cheeger, is_cut, CutMode};
use coarse_cut_core::quasimedian::{
    metric_checks, pc_build, pc_checks, qm_ball, structure_checks, GraphProductSpec, NormalForm,
};
use coarse_cut_core::{GraphWindow, Rational, VertexSet};
use proptest::prelude::*;

fn window(n: u32, tree: &[u32], extra: &[(u32, u32)]) -> GraphWindow {
    let mut edges: Vec<(u32, u32)> = (1..n).map(|v| (tree[v as usize] % v, v)).collect();
    edges.extend(extra.iter().map(|&(a, b)| (a % n, b % n)).filter(|(a, b)| a != b));
    let labels = (0..n).map(|i| vec![i64::from(i)]).collect();
    GraphWindow::new(labels, edges, 0, n).unwrap().with_isometric(true)
}

fn arb_window() -> impl Strategy<Value = GraphWindow> {
    (6u32..14).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec(0u32..1000, n as usize),
            proptest::collection::vec((0u32..100, 0u32..100), 0..5),
        )
            .prop_map(|(n, t, e)| window(n, &t, &e))
    })
}

fn arb_subset(n: usize) -> impl Strategy<Value = VertexSet> {
    proptest::collection::btree_set(0..n as u32, 1..n.min(10)).prop_map(|s| s.into_iter().collect())
}

fn path_spec() -> GraphProductSpec {
    GraphProductSpec::new(
        vec![FiniteGroup::cyclic_pm1(2), FiniteGroup::cyclic_pm1(3), FiniteGroup::cyclic_pm1(2)],
        &[(0, 1), (1, 2)],
    )
    .unwrap()
}

fn arb_word() -> impl Strategy<Value = Vec<(u32, u32)>> {
    proptest::collection::vec((0u32..3, 1u32..3), 0..8)
        .prop_map(|w| w.into_iter().map(|(u, a)| if u == 1 { (u, a) } else { (u, 1) }).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn set_algebra_matches_btreeset(a in proptest::collection::btree_set(0u32..50, 0..20),
                                    b in proptest::collection::btree_set(0u32..50, 0..20)) {
        let (sa, sb): (VertexSet, VertexSet) = (a.iter().copied().collect(), b.iter().copied().collect());
        prop_assert_eq!(sa.union(&sb).into_vec(), a.union(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.intersection(&sb).into_vec(), a.intersection(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.difference(&sb).into_vec(), a.difference(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
        prop_assert_eq!(sa.intersection_len(&sb), a.intersection(&b).count());
    }

    #[test]
    fn coarse_components_partition_the_set(w in arb_window(), k in 1u32..3) {
        let a = w.all_vertices();
        let comps = k_components(&w, &a, k).unwrap();
        let mut seen = BTreeSet::new();
        for c in &comps {
            for v in c.iter() {
                prop_assert!(seen.insert(v));
            }
        }
        prop_assert_eq!(seen.len(), a.len());
    }

    #[test]
    fn cut_is_monotone_and_above_the_cheeger_bound(
        (w, a) in arb_window().prop_flat_map(|w| { let n = w.len(); (Just(w), arb_subset(n)) }),
        r in 1u32..3,
    ) {
        let mut previous = None;
        for delta in [Rational::new(1, 3), Rational::new(1, 2), Rational::new(3, 4)] {
            let rep = cut(&w, &a, r, delta, CutMode::default()).unwrap();
            let value = rep.exact.unwrap();
            prop_assert!(is_cut(&w, &a, rep.witness_set().unwrap(), r, delta).unwrap());
            let bound = cut_lower_from_cheeger(&w, &a, r, delta).unwrap();
            prop_assert!(value >= bound.value);
            if let Some(p) = previous {
                prop_assert!(value <= p);
            }
            previous = Some(value);
        }
    }

    #[test]
    fn normal_forms_form_a_group(x in arb_word(), y in arb_word(), z in arb_word()) {
        let s = path_spec();
        let (a, b, c) = (s.normal_form(&x).unwrap(), s.normal_form(&y).unwrap(), s.normal_form(&z).unwrap());
        prop_assert_eq!(a.mul(&s, &b).mul(&s, &c), a.mul(&s, &b.mul(&s, &c)));
        prop_assert!(a.mul(&s, &a.inverse(&s)).is_identity());
        let concat: Vec<_> = x.iter().chain(&y).copied().collect();
        prop_assert_eq!(s.normal_form(&concat).unwrap(), a.mul(&s, &b));
        let (rep, tail) = a.strip(&s, |u| u != 0);
        prop_assert_eq!(rep.mul(&s, &tail), a.clone());
        prop_assert!(rep.len() <= a.len());
        prop_assert_eq!(NormalForm::identity().mul(&s, &a), a);
    }

    #[test]
    fn small_graph_products_are_quasi_median(
        n in 1u32..4,
        mask in 0u32..8,
        order in 2u32..4,
        radius in 1u32..3,
    ) {
        let pairs = [(0, 1), (1, 2), (0, 2)];
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|&(i, &(a, b))| mask & (1 << i) != 0 && a < n && b < n)
            .map(|(_, &e)| e)
            .collect();
        let spec = GraphProductSpec::uniform(n, FiniteGroup::cyclic_pm1(order), &edges).unwrap();
        let w = qm_ball(&spec, radius).unwrap();
        let rep = structure_checks(&w, 4).unwrap();
        prop_assert!(rep.passes(), "{:?}", rep);
        let metrics = metric_checks(&w, 3).unwrap();
        prop_assert!(metrics.passes(), "{:?}", metrics);
        let pc = pc_build(&w).unwrap();
        let pcr = pc_checks(&pc, &w).unwrap();
        prop_assert!(pcr.passes(), "{:?}", pcr);
    }
}
