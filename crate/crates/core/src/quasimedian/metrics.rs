use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Distance, Flagged, VertexId, VertexSet};

use super::normal_form::{NormalForm, ProductStructure};
use super::qm::{gate, CliqueId, QmWindow};

/// `δ(g, h)`: the sum over the syllables `(u, r)` of `g⁻¹h` of `|r|_u`, which
/// is the word length of `g⁻¹h` for the union of the designated generators.
pub fn delta<P: ProductStructure + ?Sized>(p: &P, g: &NormalForm, h: &NormalForm) -> u32 {
    g.inverse(p)
        .mul(p, h)
        .syllables()
        .iter()
        .map(|&(u, r)| p.group(u).word_length(r))
        .sum()
}

/// `δ_C(x, y) = |r⁻¹s|_u` for `x = g r`, `y = g s` in the clique `C = g G_u`.
pub fn clique_delta(w: &QmWindow, c: CliqueId, x: VertexId, y: VertexId) -> Result<u32> {
    let clique = w.clique(c);
    for v in [x, y] {
        if clique.members.binary_search(&v).is_err() {
            return Err(Error::InvalidParameter(format!("vertex {v} is not in clique {c}")));
        }
    }
    let u = i64::from(clique.vertex);
    let group = w.spec().vertex_group(clique.vertex);
    let (_, r) = w.element(x).split_at(w.spec(), u);
    let (_, s) = w.element(y).split_at(w.spec(), u);
    Ok(group.word_length(group.mul(group.inv(r), s)))
}

/// Sum of `δ_J(x, y)` over the hyperplanes separating `x` and `y`, each term
/// read off the gates of `x` and `y` on an unclipped clique of `J`. The flag
/// is false when some term could not be read from trusted distances.
pub fn delta_by_hyperplanes(w: &QmWindow, x: VertexId, y: VertexId) -> Result<Flagged<u32>> {
    let mut total = 0;
    let mut trusted = true;
    for j in 0..w.hyperplanes().len() {
        let sectors = w.sector_labels(j);
        if sectors[x as usize] == sectors[y as usize] {
            continue;
        }
        let mut term = None;
        for &c in &w.hyperplane(j).cliques {
            let clique = w.clique(c);
            if clique.clipped {
                continue;
            }
            let target: VertexSet = clique.members.iter().copied().collect();
            let (gx, gy) = (gate(w.graph(), &target, x)?, gate(w.graph(), &target, y)?);
            if gx.trusted && gy.trusted {
                term = Some(clique_delta(w, c, gx.value, gy.value)?);
                break;
            }
        }
        match term {
            Some(t) => total += t,
            None => trusted = false,
        }
    }
    Ok(Flagged::new(total, trusted))
}

/// `Σ δ_{K_i}(a_i, a_{i+1})` along a path, `K_i` the clique of the `i`-th edge.
pub fn delta_along(w: &QmWindow, path: &[VertexId]) -> Result<u32> {
    let mut total = 0;
    for pair in path.windows(2) {
        let e = w
            .edge_id(pair[0], pair[1])
            .ok_or_else(|| Error::InvalidParameter(format!("{} and {} are not adjacent", pair[0], pair[1])))?;
        total += clique_delta(w, w.edge_clique(e), pair[0], pair[1])?;
    }
    Ok(total)
}

/// Outcome of the coherence and extended-metric checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetricReport {
    pub clique_pairs_checked: usize,
    pub clique_pairs_skipped: usize,
    pub incoherent_pairs: usize,
    pub vertex_pairs_checked: usize,
    pub below_graph_distance: usize,
    pub hyperplane_route_mismatches: usize,
    pub hyperplane_route_skipped: usize,
    pub geodesics_checked: usize,
    pub broken_geodesic_mismatches: usize,
}

impl MetricReport {
    pub fn passes(&self) -> bool {
        self.incoherent_pairs == 0
            && self.below_graph_distance == 0
            && self.hyperplane_route_mismatches == 0
            && self.broken_geodesic_mismatches == 0
    }
}

/// Verifies that gate projections between unclipped cliques of one
/// hyperplane are `δ_C`-isometric bijections, that `δ >= d`, that the
/// hyperplane sum and the algebraic value of `δ` agree, and that every
/// geodesic of length `<= max_len` is a `δ`-geodesic once its steps are
/// measured in their cliques.
pub fn metric_checks(w: &QmWindow, max_len: u32) -> Result<MetricReport> {
    let mut rep = MetricReport::default();
    let g = w.graph();
    for hp in w.hyperplanes() {
        let whole: Vec<CliqueId> = hp.cliques.iter().copied().filter(|&c| !w.clique(c).clipped).collect();
        for &a in &whole {
            for &b in &whole {
                if a == b {
                    continue;
                }
                let target: VertexSet = w.clique(b).members.iter().copied().collect();
                let mut image = Vec::new();
                let mut trusted = true;
                for &x in &w.clique(a).members {
                    let p = gate(g, &target, x)?;
                    trusted &= p.trusted;
                    image.push(p.value);
                }
                if !trusted {
                    rep.clique_pairs_skipped += 1;
                    continue;
                }
                rep.clique_pairs_checked += 1;
                let members = &w.clique(a).members;
                let mut sorted = image.clone();
                sorted.sort_unstable();
                sorted.dedup();
                let mut ok = sorted.len() == members.len();
                for i in 0..members.len() {
                    for k in 0..members.len() {
                        ok &= clique_delta(w, a, members[i], members[k])? == clique_delta(w, b, image[i], image[k])?;
                    }
                }
                if !ok {
                    rep.incoherent_pairs += 1;
                }
            }
        }
    }
    let n = g.len() as VertexId;
    for x in 0..n {
        let dist = bfs_distances(g, x)?;
        for y in x + 1..n {
            let d = dist[y as usize];
            if !g.distance_is_trusted(x, y, d) {
                continue;
            }
            let Distance::Finite(d) = d else { continue };
            rep.vertex_pairs_checked += 1;
            let value = delta(w.spec(), w.element(x), w.element(y));
            if value < d {
                rep.below_graph_distance += 1;
            }
            let route = delta_by_hyperplanes(w, x, y)?;
            if !route.trusted {
                rep.hyperplane_route_skipped += 1;
            } else if route.value != value {
                rep.hyperplane_route_mismatches += 1;
            }
        }
        let mut path = alloc::vec![x];
        broken_geodesics(w, &dist, &mut path, max_len, &mut rep)?;
    }
    Ok(rep)
}

fn broken_geodesics(
    w: &QmWindow,
    dist: &[Distance],
    path: &mut Vec<VertexId>,
    max_len: u32,
    rep: &mut MetricReport,
) -> Result<()> {
    let last = *path.last().expect("non-empty path");
    let len = path.len() as u32 - 1;
    if len > 0 && w.graph().distance_is_trusted(path[0], last, Distance::Finite(len)) {
        rep.geodesics_checked += 1;
        if delta_along(w, path)? != delta(w.spec(), w.element(path[0]), w.element(last)) {
            rep.broken_geodesic_mismatches += 1;
        }
    }
    if len == max_len {
        return Ok(());
    }
    for &y in w.graph().neighbours(last) {
        if dist[y as usize] == Distance::Finite(len + 1) {
            path.push(y);
            broken_geodesics(w, dist, path, max_len, rep)?;
            path.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::quasimedian::{qm_ball, GraphProductSpec};

    #[test]
    fn z4_clique_has_two_distances() {
        let spec = GraphProductSpec::uniform(1, FiniteGroup::cyclic_pm1(4), &[]).unwrap();
        let w = qm_ball(&spec, 1).unwrap();
        assert_eq!(w.cliques().len(), 1);
        let members = w.clique(0).members.clone();
        assert_eq!(members.len(), 4);
        let mut seen = alloc::collections::BTreeSet::new();
        for &x in &members {
            for &y in &members {
                if x != y {
                    seen.insert(clique_delta(&w, 0, x, y).unwrap());
                }
            }
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), [1, 2]);
    }

    #[test]
    fn delta_in_one_clique_is_the_clique_metric() {
        let spec = GraphProductSpec::uniform(2, FiniteGroup::cyclic_pm1(5), &[(0, 1)]).unwrap();
        let w = qm_ball(&spec, 2).unwrap();
        for c in 0..w.cliques().len() {
            let m = &w.clique(c).members;
            for &x in m {
                for &y in m {
                    assert_eq!(clique_delta(&w, c, x, y).unwrap(), delta(&spec, w.element(x), w.element(y)));
                }
            }
        }
    }

    #[test]
    fn metric_checks_pass_on_fixtures() {
        let specs = [
            GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(3), &[(0, 1), (1, 2), (0, 2)]).unwrap(),
            GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(2), &[(0, 1), (1, 2)]).unwrap(),
            GraphProductSpec::uniform(2, FiniteGroup::cyclic_pm1(5), &[]).unwrap(),
        ];
        for spec in specs {
            let w = qm_ball(&spec, 3).unwrap();
            let rep = metric_checks(&w, 4).unwrap();
            assert!(rep.passes(), "{rep:?}");
            assert!(rep.clique_pairs_checked > 0 || w.hyperplanes().iter().all(|h| h.cliques.len() < 2));
        }
    }
}
