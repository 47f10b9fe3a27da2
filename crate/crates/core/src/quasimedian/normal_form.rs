use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

/// A graph product `ΓG` seen through its vertex groups and commutation graph.
/// Vertices of `Γ` are `i64` so that infinite graphs (Cayley graphs of `Z`)
/// fit the same interface.
pub trait ProductStructure {
    fn group(&self, u: i64) -> &FiniteGroup;
    /// Adjacency in `Γ`. Never true for `u == v`.
    fn commute(&self, u: i64, v: i64) -> bool;
}

/// A finite simplicial graph with a finite group at every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphProductSpec {
    groups: Vec<FiniteGroup>,
    adjacent: Vec<Vec<bool>>,
    edges: Vec<(u32, u32)>,
}

impl GraphProductSpec {
    /// Rejects loops, out-of-range endpoints and duplicate edges.
    pub fn new(groups: Vec<FiniteGroup>, edges: &[(u32, u32)]) -> Result<Self> {
        let n = groups.len();
        if n == 0 {
            return Err(Error::InvalidParameter("graph product needs a vertex".into()));
        }
        let mut adjacent = alloc::vec![alloc::vec![false; n]; n];
        let mut list = Vec::new();
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::MalformedGraph(format!("edge ({a}, {b}) leaves the vertex set")));
            }
            if a == b {
                return Err(Error::MalformedGraph(format!("loop at {a}")));
            }
            if adjacent[a as usize][b as usize] {
                return Err(Error::MalformedGraph(format!("duplicate edge ({a}, {b})")));
            }
            adjacent[a as usize][b as usize] = true;
            adjacent[b as usize][a as usize] = true;
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        Ok(Self {
            groups,
            adjacent,
            edges: list,
        })
    }

    /// The same group at every vertex.
    pub fn uniform(n: u32, group: FiniteGroup, edges: &[(u32, u32)]) -> Result<Self> {
        Self::new(alloc::vec![group; n as usize], edges)
    }

    pub fn vertex_count(&self) -> u32 {
        self.groups.len() as u32
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn vertex_group(&self, u: u32) -> &FiniteGroup {
        &self.groups[u as usize]
    }

    pub fn is_adjacent(&self, u: u32, v: u32) -> bool {
        self.adjacent[u as usize][v as usize]
    }

    /// Size of a largest complete subgraph of `Γ`.
    pub fn clique_number(&self) -> usize {
        let n = self.groups.len();
        let mut best = 0;
        fn grow(spec: &GraphProductSpec, chosen: &mut Vec<usize>, next: usize, best: &mut usize) {
            *best = (*best).max(chosen.len());
            for v in next..spec.groups.len() {
                if chosen.iter().all(|&c| spec.adjacent[c][v]) {
                    chosen.push(v);
                    grow(spec, chosen, v + 1, best);
                    chosen.pop();
                }
            }
        }
        grow(self, &mut Vec::with_capacity(n), 0, &mut best);
        best
    }

    /// `star(u)`: `u` and its neighbours.
    pub fn star(&self, u: u32) -> BTreeSet<i64> {
        (0..self.vertex_count())
            .filter(|&v| v == u || self.is_adjacent(u, v))
            .map(i64::from)
            .collect()
    }

    /// Normal form of a word whose letters are `(vertex, non-trivial element)`.
    pub fn normal_form(&self, word: &[(u32, u32)]) -> Result<NormalForm> {
        let mut g = NormalForm::identity();
        for &(u, a) in word {
            if u >= self.vertex_count() {
                return Err(Error::UnknownGenerator(format!("vertex {u}")));
            }
            let group = self.vertex_group(u);
            if a as usize >= group.order() || a == group.identity() {
                return Err(Error::UnknownGenerator(format!("({u}, {a})")));
            }
            g = g.mul_syllable(self, i64::from(u), a);
        }
        Ok(g)
    }
}

impl ProductStructure for GraphProductSpec {
    fn group(&self, u: i64) -> &FiniteGroup {
        &self.groups[u as usize]
    }

    fn commute(&self, u: i64, v: i64) -> bool {
        self.adjacent[u as usize][v as usize]
    }
}

/// A reduced word of syllables `(vertex, non-trivial element)`, listed as the
/// lexicographically least linear extension of its commutation order. Two
/// words give equal `NormalForm`s iff they represent the same element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NormalForm {
    syllables: Vec<(i64, u32)>,
}

impl NormalForm {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn syllables(&self) -> &[(i64, u32)] {
        &self.syllables
    }

    /// Syllable length, the word length for `⋃ G_u ∖ {1}`.
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// `[u_1, a_1, u_2, a_2, ..]`.
    pub fn label(&self) -> Vec<i64> {
        self.syllables.iter().flat_map(|&(u, a)| [u, i64::from(a)]).collect()
    }

    /// Right multiplication by one letter of `G_u`.
    pub fn mul_syllable<P: ProductStructure + ?Sized>(&self, p: &P, u: i64, a: u32) -> Self {
        let group = p.group(u);
        if a == group.identity() {
            return self.clone();
        }
        let mut syl = self.syllables.clone();
        let mut merged = false;
        for j in (0..syl.len()).rev() {
            let (v, b) = syl[j];
            if v == u {
                let c = group.mul(b, a);
                if c == group.identity() {
                    syl.remove(j);
                } else {
                    syl[j].1 = c;
                }
                merged = true;
                break;
            }
            if !p.commute(v, u) {
                break;
            }
        }
        if !merged {
            syl.push((u, a));
        }
        Self {
            syllables: canonical_order(p, syl),
        }
    }

    pub fn mul<P: ProductStructure + ?Sized>(&self, p: &P, other: &NormalForm) -> Self {
        other
            .syllables
            .iter()
            .fold(self.clone(), |g, &(u, a)| g.mul_syllable(p, u, a))
    }

    pub fn inverse<P: ProductStructure + ?Sized>(&self, p: &P) -> Self {
        let syl = self
            .syllables
            .iter()
            .rev()
            .map(|&(u, a)| (u, p.group(u).inv(a)))
            .collect();
        Self {
            syllables: canonical_order(p, syl),
        }
    }

    /// Minimal-length representative of the coset `g⟨Λ⟩`, where `Λ` is the
    /// set of vertices accepted by `inside`. Also returns the stripped part,
    /// so that `g = rep · tail`.
    pub fn strip<P: ProductStructure + ?Sized>(&self, p: &P, inside: impl Fn(i64) -> bool) -> (Self, Self) {
        let n = self.syllables.len();
        let mut removed = alloc::vec![false; n];
        for j in (0..n).rev() {
            let u = self.syllables[j].0;
            removed[j] = inside(u)
                && (j + 1..n).all(|k| removed[k] || p.commute(self.syllables[k].0, u));
        }
        let keep = (0..n).filter(|&j| !removed[j]).map(|j| self.syllables[j]).collect();
        let tail = (0..n).filter(|&j| removed[j]).map(|j| self.syllables[j]).collect();
        (
            Self {
                syllables: canonical_order(p, keep),
            },
            Self {
                syllables: canonical_order(p, tail),
            },
        )
    }

    /// Splits `g` as `rep · (u, r)` with `rep` minimal in `g G_u`; `r` is the
    /// identity of `G_u` when `g` is itself minimal.
    pub fn split_at<P: ProductStructure + ?Sized>(&self, p: &P, u: i64) -> (Self, u32) {
        let (rep, tail) = self.strip(p, |v| v == u);
        let r = tail.syllables.first().map_or(p.group(u).identity(), |&(_, a)| a);
        (rep, r)
    }
}

/// Lexicographically least linear extension of the order in which two
/// syllables keep their relative position unless their vertices commute.
fn canonical_order<P: ProductStructure + ?Sized>(p: &P, syl: Vec<(i64, u32)>) -> Vec<(i64, u32)> {
    let n = syl.len();
    let mut placed = alloc::vec![false; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pick: Option<usize> = None;
        for j in 0..n {
            if placed[j] {
                continue;
            }
            let free = (0..j).all(|i| placed[i] || p.commute(syl[i].0, syl[j].0));
            if free && pick.is_none_or(|k| syl[j] < syl[k]) {
                pick = Some(j);
            }
        }
        let j = pick.expect("the commutation order is acyclic");
        placed[j] = true;
        out.push(syl[j]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_path() -> GraphProductSpec {
        GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(2), &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        assert!(z2_path().normal_form(&[]).unwrap().is_identity());
    }

    #[test]
    fn adjacent_letters_commute() {
        let s = z2_path();
        assert_eq!(s.normal_form(&[(0, 1), (1, 1)]), s.normal_form(&[(1, 1), (0, 1)]));
        assert_ne!(s.normal_form(&[(0, 1), (2, 1)]), s.normal_form(&[(2, 1), (0, 1)]));
    }

    #[test]
    fn letters_cancel_across_commuting_ones() {
        let s = z2_path();
        let g = s.normal_form(&[(0, 1), (1, 1), (0, 1)]).unwrap();
        assert_eq!(g.syllables(), &[(1, 1)]);
        let g = s.normal_form(&[(0, 1), (2, 1), (0, 1)]).unwrap();
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn inverse_cancels() {
        let s = GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(3), &[(0, 1)]).unwrap();
        let g = s.normal_form(&[(0, 1), (2, 2), (1, 1), (0, 2)]).unwrap();
        assert!(g.mul(&s, &g.inverse(&s)).is_identity());
        assert!(g.inverse(&s).mul(&s, &g).is_identity());
    }

    #[test]
    fn strip_gives_minimal_coset_representative() {
        let s = z2_path();
        let g = s.normal_form(&[(0, 1), (2, 1), (1, 1)]).unwrap();
        let (rep, tail) = g.strip(&s, |u| u == 1 || u == 2);
        assert_eq!(rep.syllables(), &[(0, 1)]);
        assert_eq!(rep.mul(&s, &tail), g);
        let (rep, r) = g.split_at(&s, 0);
        assert_eq!(rep, g);
        assert_eq!(r, 0);
    }

    #[test]
    fn rejects_unknown_letters() {
        let s = z2_path();
        assert!(matches!(s.normal_form(&[(3, 1)]), Err(Error::UnknownGenerator(_))));
        assert!(matches!(s.normal_form(&[(0, 0)]), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn clique_number_of_a_triangle() {
        let s = GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(3), &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(s.clique_number(), 3);
        assert_eq!(z2_path().clique_number(), 2);
    }
}
