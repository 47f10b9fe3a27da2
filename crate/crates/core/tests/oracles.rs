//! Brute-force oracles against the optimised implementations.

use std::collections::{BTreeMap, BTreeSet};

use coarse_cut_core::generators::{dl_vset, dl_window, tree_annulus, tree_window, TreeProduct};
use coarse_cut_core::graph::{bfs_distances, sphere, Distance};
use coarse_cut_core::group::FiniteGroup;
use coarse_cut_core::invariants::{
    cheeger, cut, is_cut, net_sandwich, poincare_l1, separated_net, CheegerMode, CutMode, MetricMeasureSet,
    PoincareMode,
};
use coarse_cut_core::quasimedian::{qm_ball, GraphProductSpec, NormalForm};
use coarse_cut_core::{GraphWindow, Rational, VertexId, VertexSet};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

fn random_window(rng: &mut SmallRng, n: u32, extra: u32) -> GraphWindow {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((a, b));
        }
    }
    let labels = (0..n).map(|i| vec![i64::from(i)]).collect();
    GraphWindow::new(labels, edges, 0, n).unwrap().with_isometric(true)
}

fn random_subset(rng: &mut SmallRng, n: u32, size: usize) -> VertexSet {
    let mut chosen = BTreeSet::new();
    while chosen.len() < size {
        chosen.insert(rng.gen_range(0..n));
    }
    chosen.into_iter().collect()
}

fn pairwise(w: &GraphWindow, a: &VertexSet) -> Vec<Vec<u32>> {
    a.iter()
        .map(|x| {
            let d = bfs_distances(w, x).unwrap();
            a.iter().map(|y| d[y as usize].finite().unwrap_or(u32::MAX)).collect()
        })
        .collect()
}

/// Largest `r`-coarse component of the indices in `keep`.
fn largest_component(dist: &[Vec<u32>], keep: &[usize], r: u32) -> usize {
    let mut seen = BTreeSet::new();
    let mut best = 0;
    for &s in keep {
        if !seen.insert(s) {
            continue;
        }
        let mut stack = vec![s];
        let mut size = 1;
        while let Some(x) = stack.pop() {
            for &y in keep {
                if dist[x][y] <= r && seen.insert(y) {
                    size += 1;
                    stack.push(y);
                }
            }
        }
        best = best.max(size);
    }
    best
}

fn brute_cut(dist: &[Vec<u32>], r: u32, delta: Rational) -> usize {
    let n = dist.len();
    let limit = delta * Rational::from_integer(n as i64);
    (0..1u32 << n)
        .filter(|mask| {
            let keep: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
            Rational::from_integer(largest_component(dist, &keep, r) as i64) <= limit
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

fn brute_cheeger(dist: &[Vec<u32>], r: u32) -> Rational {
    let n = dist.len();
    let mut best: Option<Rational> = None;
    for mask in 1u32..1 << n {
        let size = mask.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let boundary = (0..n)
            .filter(|&j| mask & (1 << j) == 0 && (0..n).any(|i| mask & (1 << i) != 0 && dist[i][j] <= r))
            .count();
        let value = Rational::new(boundary as i64, size as i64);
        best = Some(best.map_or(value, |b: Rational| b.min(value)));
    }
    best.unwrap_or_else(|| Rational::from_integer(0))
}

#[test]
fn branch_and_bound_cut_matches_brute_force() {
    let mut rng = SmallRng::seed_from_u64(7);
    for trial in 0..50 {
        let w = random_window(&mut rng, 18, 6);
        let size = rng.gen_range(4..=12);
        let a = random_subset(&mut rng, 18, size);
        let r = rng.gen_range(1..=2);
        let delta = [Rational::new(1, 2), Rational::new(2, 3), Rational::new(3, 4)][trial % 3];
        let rep = cut(&w, &a, r, delta, CutMode::default()).unwrap();
        let expected = brute_cut(&pairwise(&w, &a), r, delta);
        assert_eq!(rep.exact, Some(Rational::from_integer(expected as i64)), "trial {trial}");
        assert!(is_cut(&w, &a, rep.witness_set().unwrap(), r, delta).unwrap());
        let heuristic = cut(&w, &a, r, delta, CutMode::Heuristic).unwrap();
        assert!(heuristic.upper >= rep.upper);
    }
}

#[test]
fn exhaustive_cheeger_matches_brute_force() {
    let mut rng = SmallRng::seed_from_u64(11);
    for trial in 0..40 {
        let w = random_window(&mut rng, 16, 5);
        let size = rng.gen_range(2..=12);
        let a = random_subset(&mut rng, 16, size);
        let r = rng.gen_range(1..=2);
        let rep = cheeger(&w, &a, r, CheegerMode::default()).unwrap();
        assert_eq!(rep.exact, Some(brute_cheeger(&pairwise(&w, &a), r)), "trial {trial}");
    }
}

#[test]
fn nets_satisfy_the_volume_sandwich() {
    let mut rng = SmallRng::seed_from_u64(3);
    for _ in 0..50 {
        let w = random_window(&mut rng, 20, 8);
        let a = w.all_vertices();
        let eps = rng.gen_range(1..=2);
        let z = separated_net(&w, &a, eps).unwrap().value;
        let size = rng.gen_range(1..=12);
        let b = random_subset(&mut rng, 20, size);
        let s = net_sandwich(&w, &z, &b, eps).unwrap();
        assert!(s.holds(), "{s:?}");
    }
}

#[test]
fn poincare_value_is_never_beaten_by_random_functions() {
    let mut rng = SmallRng::seed_from_u64(5);
    for _ in 0..10 {
        let w = random_window(&mut rng, 9, 3);
        let ms = MetricMeasureSet::from_window(&w, &w.all_vertices()).unwrap();
        let k = rng.gen_range(1..=2);
        let rep = poincare_l1(&ms, k, PoincareMode::Enumerate).unwrap();
        let value = rep.exact.unwrap();
        assert!(rep.two_level.unwrap() >= value);
        for _ in 0..200 {
            let mut f: Vec<Rational> = (0..ms.len()).map(|_| Rational::from_integer(rng.gen_range(-5..=5))).collect();
            let mean = f.iter().sum::<Rational>() / Rational::from_integer(f.len() as i64);
            f.iter_mut().for_each(|x| *x -= mean);
            if f.iter().all(|x| *x == Rational::from_integer(0)) {
                continue;
            }
            let ratio = coarse_cut_core::invariants::gradient_norm(&ms, k, &f).unwrap();
            assert!(ratio >= value);
        }
    }
}

#[test]
fn tree_annuli_have_the_predicted_sphere_share() {
    let t = || tree_window(3, -4, 0, 0).unwrap();
    let tp = TreeProduct::new(t(), t()).unwrap();
    let x = tp.basepoint();
    for k in 1..=4u32 {
        let a = tree_annulus(&tp, x, k).unwrap();
        let s = sphere(tp.graph(), x, k).unwrap().value;
        assert_eq!(a.intersection_len(&s), ((k + 1) << k) as usize, "k = {k}");
    }
}

#[test]
fn dl_sets_have_the_predicted_size() {
    let dw = dl_window(2, 2, 6, 6).unwrap();
    let x = dw.graph().basepoint();
    let (x1, x2) = dw.coords(x);
    for r in 1..=5u32 {
        let o1 = dw.tree1().ancestor(x1, r).unwrap();
        let v = dl_vset(&dw, o1, x2, r).unwrap();
        assert_eq!(v.len(), ((r + 1) << r) as usize, "r = {r}");
    }
}

/// Tits representation of the right-angled Coxeter group on a path: faithful,
/// so it decides equality of words independently of normal forms.
fn tits_matrix(word: &[(u32, u32)]) -> [[i64; 3]; 3] {
    let form = |i: usize, j: usize| -> i64 {
        match (i as i64 - j as i64).abs() {
            0 => 1,
            1 => 0,
            _ => -1,
        }
    };
    let mut m = [[0i64; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    for &(u, _) in word {
        let u = u as usize;
        // m <- m * sigma_u, sigma_u(e_j) = e_j - 2 B(e_u, e_j) e_u
        let mut next = m;
        for row in 0..3 {
            for j in 0..3 {
                next[row][j] = m[row][j] - 2 * form(u, j) * m[row][u];
            }
        }
        m = next;
    }
    m
}

#[test]
fn normal_forms_agree_with_the_tits_representation() {
    let spec = GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(2), &[(0, 1), (1, 2)]).unwrap();
    let mut words: Vec<Vec<(u32, u32)>> = vec![vec![]];
    for _ in 0..5 {
        let longer: Vec<_> = words
            .iter()
            .filter(|w| w.len() == words.last().unwrap().len())
            .flat_map(|w| {
                (0..3).map(move |u| {
                    let mut w = w.clone();
                    w.push((u, 1));
                    w
                })
            })
            .collect();
        words.extend(longer);
    }
    let mut by_matrix: BTreeMap<[[i64; 3]; 3], NormalForm> = BTreeMap::new();
    let mut forms = BTreeSet::new();
    for w in &words {
        let nf = spec.normal_form(w).unwrap();
        forms.insert(nf.clone());
        let prev = by_matrix.entry(tits_matrix(w)).or_insert_with(|| nf.clone());
        assert_eq!(*prev, nf, "word {w:?}");
    }
    assert_eq!(forms.len(), by_matrix.len());
    // the ball of radius 3 holds exactly the elements of words of length <= 3
    let ball = qm_ball(&spec, 3).unwrap();
    let short: BTreeSet<_> = words.iter().filter(|w| w.len() <= 3).map(|w| tits_matrix(w)).collect();
    assert_eq!(ball.graph().len(), short.len());
}

#[test]
fn normal_forms_of_a_direct_product_match_its_table() {
    let spec = GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(3), &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let mut rng = SmallRng::seed_from_u64(1);
    for _ in 0..200 {
        let len = rng.gen_range(0..10);
        let word: Vec<(u32, u32)> = (0..len).map(|_| (rng.gen_range(0..3), rng.gen_range(1..3))).collect();
        let mut exponents = [0u32; 3];
        for &(u, a) in &word {
            exponents[u as usize] = (exponents[u as usize] + a) % 3;
        }
        let expected: Vec<(i64, u32)> = (0..3)
            .filter(|&u| exponents[u] != 0)
            .map(|u| (u as i64, exponents[u]))
            .collect();
        assert_eq!(spec.normal_form(&word).unwrap().syllables(), expected.as_slice());
    }
    assert_eq!(qm_ball(&spec, 3).unwrap().graph().len(), 27);
}

#[test]
fn windows_report_distances_from_bfs() {
    let mut rng = SmallRng::seed_from_u64(2);
    let w = random_window(&mut rng, 12, 0);
    let d = bfs_distances(&w, 0).unwrap();
    for v in 0..12 as VertexId {
        assert!(matches!(d[v as usize], Distance::Finite(_)));
    }
}
