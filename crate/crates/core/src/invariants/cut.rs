use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{k_components, window_growth, Flagged, GraphWindow, VertexSet};
use crate::Rational;

use super::{
    cheeger, closeness, set_trusted, CheegerMode, InvariantKind, InvariantReport, Method, Parameters, Witness,
    DEFAULT_EXHAUSTIVE_CAP,
};

/// Search nodes allowed before the exact search gives up with an interval.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutMode {
    /// Iterative deepening on `|S|`; exact unless the node budget runs out,
    /// in which case the report carries the certified interval.
    BranchAndBound { node_budget: u64 },
    /// Greedy removal followed by pruning; an upper bound only.
    Heuristic,
}

impl Default for CutMode {
    fn default() -> Self {
        CutMode::BranchAndBound {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

fn check_delta(delta: Rational) -> Result<()> {
    if delta <= Rational::zero() || delta >= Rational::from_integer(1) {
        return Err(Error::InvalidParameter("cut parameter delta must lie in (0, 1)".into()));
    }
    Ok(())
}

/// Largest component size `floor(δ |A|)` an `(r, δ)`-cut may leave.
fn size_limit(delta: Rational, n: usize) -> usize {
    (delta * Rational::from_integer(n as i64)).floor().to_integer() as usize
}

/// Independent check that every `r`-coarse component of `A \ S` has at most
/// `δ |A|` points.
pub fn is_cut(w: &GraphWindow, a: &VertexSet, s: &VertexSet, r: u32, delta: Rational) -> Result<bool> {
    check_delta(delta)?;
    if !s.is_subset(a) {
        return Err(Error::InvalidParameter("separator must be a subset of A".into()));
    }
    let rest = a.difference(s);
    if rest.is_empty() {
        return Ok(true);
    }
    let limit = delta * Rational::from_integer(a.len() as i64);
    Ok(k_components(w, &rest, r)?
        .iter()
        .all(|c| Rational::from_integer(c.len() as i64) <= limit))
}

/// `λ h_r(A) |A|` with `λ = min(1/4, (1-δ)/2) / β_X(r)`, using the exact
/// Cheeger constant when `|A|` is within the exhaustive cap and zero
/// otherwise.
pub fn cut_lower_from_cheeger(w: &GraphWindow, a: &VertexSet, r: u32, delta: Rational) -> Result<Flagged<Rational>> {
    check_delta(delta)?;
    if a.len() > DEFAULT_EXHAUSTIVE_CAP {
        return Ok(Flagged::new(Rational::zero(), true));
    }
    let h = cheeger(w, a, r, CheegerMode::default())?;
    let beta = window_growth(w, r);
    let quarter = Rational::new(1, 4);
    let half_gap = (Rational::from_integer(1) - delta) / 2;
    let lambda = quarter.min(half_gap) / Rational::from_integer(beta.value as i64);
    let bound = lambda * h.lower * Rational::from_integer(a.len() as i64);
    Ok(Flagged::new(bound, h.trusted && beta.trusted))
}

/// `cut^δ_r(A)`: the least `|S|`, `S ⊆ A`, such that every `r`-coarse
/// component of `A \ S` has at most `δ |A|` points. `S = A` always
/// qualifies, so the value is at most `|A|`.
pub fn cut(w: &GraphWindow, a: &VertexSet, r: u32, delta: Rational, mode: CutMode) -> Result<InvariantReport> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if r == 0 {
        return Err(Error::InvalidParameter("cut scale r must be >= 1".into()));
    }
    check_delta(delta)?;
    w.check_set(a)?;
    let params = Parameters {
        r: Some(r),
        delta: Some(delta),
        k: None,
    };
    let lower_bound = cut_lower_from_cheeger(w, a, r, delta)?;
    let problem = CutProblem::new(&closeness(w, a, r), size_limit(delta, a.len()));
    let heuristic = problem.greedy();

    let method = match mode {
        CutMode::BranchAndBound { .. } => Method::BranchAndBound,
        CutMode::Heuristic => Method::Sweep,
    };
    let mut report = InvariantReport::new(InvariantKind::Cut, params, method);
    report.trusted = set_trusted(w, a, r) && lower_bound.trusted;
    report.beta = Some(window_growth(w, r).value);
    report.cheeger_lower = Some(lower_bound.value);

    // the Cheeger bound relies on a global growth estimate, so the exact
    // search does not use it to skip depths
    let (lower, best) = match mode {
        CutMode::Heuristic => (0, heuristic),
        CutMode::BranchAndBound { node_budget } => {
            let mut search = Search {
                problem: &problem,
                budget: node_budget,
                nodes: 0,
                aborted: false,
                found: None,
            };
            let mut result = None;
            for depth in 0..heuristic.len() {
                if search.run(depth) {
                    let s = search.found.take().expect("search records its witness");
                    result = Some((s.len(), s, true));
                    break;
                }
                if search.aborted {
                    result = Some((depth, heuristic.clone(), false));
                    break;
                }
            }
            report.nodes = search.nodes;
            let (lower, s, exact) = result.unwrap_or((heuristic.len(), heuristic, true));
            if exact {
                report.exact = Some(Rational::from_integer(s.len() as i64));
            }
            (lower, s)
        }
    };
    report.lower = Rational::from_integer(lower as i64);
    report.upper = Rational::from_integer(best.len() as i64);
    let witness: VertexSet = best.iter().map(|&i| a.as_slice()[i]).collect();
    if !is_cut(w, a, &witness, r, delta)? {
        return Err(Error::Structure("cut witness failed independent verification".into()));
    }
    report.witness = Witness::Set(witness);
    Ok(report)
}

/// The coarse graph on `A` (`i ~ j` iff `0 < d(a_i, a_j) <= r`) and the size
/// limit of a valid cut.
struct CutProblem {
    n: usize,
    adjacency: Vec<FixedBitSet>,
    limit: usize,
}

impl CutProblem {
    fn new(close: &[Vec<bool>], limit: usize) -> Self {
        let n = close.len();
        let adjacency = close
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut bits = FixedBitSet::with_capacity(n);
                for (j, &c) in row.iter().enumerate() {
                    if c && i != j {
                        bits.insert(j);
                    }
                }
                bits
            })
            .collect();
        Self { n, adjacency, limit }
    }

    /// Components of the coarse graph restricted to `alive`, ordered by
    /// smallest member.
    fn components(&self, alive: &FixedBitSet) -> Vec<Vec<usize>> {
        let mut seen = FixedBitSet::with_capacity(self.n);
        let mut out = Vec::new();
        for start in alive.ones() {
            if seen.contains(start) {
                continue;
            }
            seen.insert(start);
            let mut comp = alloc::vec![start];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for u in self.adjacency[v].ones() {
                    if alive.contains(u) && !seen.contains(u) {
                        seen.insert(u);
                        comp.push(u);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    fn oversized(&self, removed: &FixedBitSet) -> Vec<Vec<usize>> {
        let mut alive = FixedBitSet::with_capacity(self.n);
        alive.insert_range(..);
        alive.difference_with(removed);
        self.components(&alive)
            .into_iter()
            .filter(|c| c.len() > self.limit)
            .collect()
    }

    fn largest_component_without(&self, comp: &[usize], v: usize) -> usize {
        let mut alive = FixedBitSet::with_capacity(self.n);
        for &u in comp {
            if u != v {
                alive.insert(u);
            }
        }
        self.components(&alive).iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Cut vertices of the coarse graph induced on `comp`.
    fn articulation_points(&self, comp: &[usize]) -> FixedBitSet {
        let mut index = alloc::vec![usize::MAX; self.n];
        let mut low = alloc::vec![0usize; self.n];
        let mut members = FixedBitSet::with_capacity(self.n);
        for &v in comp {
            members.insert(v);
        }
        let mut out = FixedBitSet::with_capacity(self.n);
        let mut counter = 0;
        let root = comp[0];
        // iterative DFS: (vertex, parent, neighbour iterator position)
        let neighbours: Vec<Vec<usize>> = (0..self.n)
            .map(|v| {
                if members.contains(v) {
                    self.adjacency[v].ones().filter(|&u| members.contains(u)).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let mut stack = alloc::vec![(root, usize::MAX, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        let mut root_children = 0;
        while let Some(&mut (v, parent, ref mut pos)) = stack.last_mut() {
            if *pos < neighbours[v].len() {
                let u = neighbours[v][*pos];
                *pos += 1;
                if index[u] == usize::MAX {
                    index[u] = counter;
                    low[u] = counter;
                    counter += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((u, v, 0));
                } else if u != parent {
                    low[v] = low[v].min(index[u]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if parent != root && low[v] >= index[parent] {
                        out.insert(parent);
                    }
                }
            }
        }
        if root_children > 1 {
            out.insert(root);
        }
        out
    }

    /// Branching order inside an oversized component: cut vertices first,
    /// then by coarse degree within the component, then by index.
    fn candidates(&self, comp: &[usize], excluded: &FixedBitSet) -> Vec<usize> {
        let cut_vertices = self.articulation_points(comp);
        let mut members = FixedBitSet::with_capacity(self.n);
        for &v in comp {
            members.insert(v);
        }
        let mut list: Vec<usize> = comp.iter().copied().filter(|&v| !excluded.contains(v)).collect();
        list.sort_by_key(|&v| {
            let degree = self.adjacency[v].intersection(&members).count();
            (!cut_vertices.contains(v), usize::MAX - degree, v)
        });
        list
    }

    /// Greedy separator: repeatedly delete the vertex of the largest
    /// oversized component that leaves its largest piece smallest, then drop
    /// redundant members.
    fn greedy(&self) -> Vec<usize> {
        let mut removed = FixedBitSet::with_capacity(self.n);
        loop {
            let over = self.oversized(&removed);
            let Some(comp) = over.iter().max_by_key(|c| (c.len(), usize::MAX - c[0])) else {
                break;
            };
            let v = comp
                .iter()
                .copied()
                .min_by_key(|&v| (self.largest_component_without(comp, v), v))
                .expect("components are nonempty");
            removed.insert(v);
        }
        let members: Vec<usize> = removed.ones().collect();
        for v in members.into_iter().rev() {
            removed.set(v, false);
            if !self.oversized(&removed).is_empty() {
                removed.insert(v);
            }
        }
        removed.ones().collect()
    }
}

struct Search<'a> {
    problem: &'a CutProblem,
    budget: u64,
    nodes: u64,
    aborted: bool,
    found: Option<Vec<usize>>,
}

impl Search<'_> {
    /// Looks for a cut with at most `depth` members.
    fn run(&mut self, depth: usize) -> bool {
        let mut removed = FixedBitSet::with_capacity(self.problem.n);
        let mut excluded = FixedBitSet::with_capacity(self.problem.n);
        self.go(&mut removed, &mut excluded, depth)
    }

    fn go(&mut self, removed: &mut FixedBitSet, excluded: &mut FixedBitSet, left: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return false;
        }
        let over = self.problem.oversized(removed);
        if over.is_empty() {
            self.found = Some(removed.ones().collect());
            return true;
        }
        // each oversized component needs its own deletion
        if over.len() > left {
            return false;
        }
        let comp = over
            .iter()
            .max_by_key(|c| (c.len(), usize::MAX - c[0]))
            .expect("nonempty");
        let candidates = self.problem.candidates(comp, excluded);
        let mut banned = Vec::new();
        let mut success = false;
        for v in candidates {
            removed.insert(v);
            let hit = self.go(removed, excluded, left - 1);
            removed.set(v, false);
            if hit {
                success = true;
                break;
            }
            if self.aborted {
                break;
            }
            excluded.insert(v);
            banned.push(v);
        }
        for v in banned {
            excluded.set(v, false);
        }
        success
    }
}
