//! Finite windows of infinite vertex-labelled graphs.
//!
//! A [`GraphWindow`] is a finite induced subgraph of some ambient graph,
//! stamped with a basepoint and a *trusted radius* `T`: every vertex at
//! distance `< T` from the basepoint has all of its ambient neighbours in the
//! window. Consequently a ball `B(x, r)` computed in the window equals the
//! ambient ball whenever `d(basepoint, x) + r <= T`, and every operation below
//! reports whether its result touched the untrusted rim.
//!
//! Volume is the counting measure on vertices throughout.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::union_find::UnionFind;

pub type VertexId = u32;

/// Graph distance with an explicit unreachable sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn is_within(self, r: u32) -> bool {
        matches!(self, Distance::Finite(d) if d <= r)
    }
}

/// A value together with whether it is guaranteed to agree with the ambient
/// (infinite) graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flagged<T> {
    pub value: T,
    pub trusted: bool,
}

impl<T> Flagged<T> {
    pub fn new(value: T, trusted: bool) -> Self {
        Self { value, trusted }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Flagged<U> {
        Flagged {
            value: f(self.value),
            trusted: self.trusted,
        }
    }
}

/// A sorted, duplicate-free set of window vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet {
    members: Vec<VertexId>,
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: VertexId) -> Self {
        Self { members: alloc::vec![v] }
    }

    pub fn from_sorted_unchecked(members: Vec<VertexId>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Position of `v` inside the sorted member list.
    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.members
    }

    pub fn into_vec(self) -> Vec<VertexId> {
        self.members
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.members, &other.members);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                core::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                core::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        VertexSet { members: out }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.iter().filter(|&v| other.contains(v)).collect()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.iter().filter(|&v| !other.contains(v)).collect()
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().filter(|&v| large.contains(v)).count()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.intersection_len(other) == 0
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        let mut members: Vec<VertexId> = iter.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = VertexId;
    type IntoIter = core::iter::Copied<core::slice::Iter<'a, VertexId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter().copied()
    }
}

/// Sup-of-ball-counts growth function sampled at a list of radii.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthTable {
    pub radii: Vec<u32>,
    pub values: Vec<usize>,
}

impl GrowthTable {
    pub fn value_at(&self, r: u32) -> Option<usize> {
        self.radii.iter().position(|&x| x == r).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphWindow {
    labels: Vec<Vec<i64>>,
    adjacency: Vec<Vec<VertexId>>,
    basepoint: VertexId,
    trusted_radius: u32,
    isometric: bool,
    depth: Vec<Distance>,
}

impl GraphWindow {
    /// Builds a window from vertex labels (vertex `i` gets `labels[i]`) and an
    /// undirected edge list. Duplicate edges are merged; self-loops and
    /// out-of-range endpoints are rejected.
    pub fn new(
        labels: Vec<Vec<i64>>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        basepoint: VertexId,
        trusted_radius: u32,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::MalformedGraph("window has no vertices".into()));
        }
        if basepoint as usize >= n {
            return Err(Error::UnknownVertex(basepoint));
        }
        let mut adjacency = alloc::vec![Vec::new(); n];
        for (a, b) in edges {
            if a as usize >= n {
                return Err(Error::UnknownVertex(a));
            }
            if b as usize >= n {
                return Err(Error::UnknownVertex(b));
            }
            if a == b {
                return Err(Error::MalformedGraph(format!("self-loop at {a}")));
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let mut w = Self {
            labels,
            adjacency,
            basepoint,
            trusted_radius,
            isometric: false,
            depth: Vec::new(),
        };
        w.depth = bfs_from(&w, &[basepoint]);
        Ok(w)
    }

    /// Marks the window as isometrically embedded: window distances equal
    /// ambient distances for every pair (convex boxes, subtrees, whole finite
    /// graphs).
    pub fn with_isometric(mut self, isometric: bool) -> Self {
        self.isometric = isometric;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn basepoint(&self) -> VertexId {
        self.basepoint
    }

    pub fn trusted_radius(&self) -> u32 {
        self.trusted_radius
    }

    pub fn is_isometric(&self) -> bool {
        self.isometric
    }

    pub fn label(&self, v: VertexId) -> &[i64] {
        &self.labels[v as usize]
    }

    pub fn labels(&self) -> &[Vec<i64>] {
        &self.labels
    }

    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        (v as usize) < self.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.len() as VertexId
    }

    pub fn is_adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            let a = a as VertexId;
            list.iter().copied().filter(move |&b| a < b).map(move |b| (a, b))
        })
    }

    /// Distance from the basepoint.
    pub fn depth(&self, v: VertexId) -> Distance {
        self.depth[v as usize]
    }

    /// Whether `v` has all of its ambient neighbours in the window.
    pub fn is_interior(&self, v: VertexId) -> bool {
        matches!(self.depth(v), Distance::Finite(d) if d < self.trusted_radius)
    }

    /// Whether `ball(v, r)` computed in the window equals the ambient ball.
    pub fn ball_is_trusted(&self, v: VertexId, r: u32) -> bool {
        matches!(self.depth(v), Distance::Finite(d) if d.saturating_add(r) <= self.trusted_radius)
    }

    /// Whether a window distance `d` between `x` and `y` is the ambient one.
    ///
    /// Window distances never undercut ambient ones; they agree whenever a
    /// trusted ball around one endpoint already reaches the other.
    pub fn distance_is_trusted(&self, x: VertexId, y: VertexId, d: Distance) -> bool {
        if self.isometric {
            return true;
        }
        let Distance::Finite(d) = d else {
            return false;
        };
        self.ball_is_trusted(x, d) || self.ball_is_trusted(y, d)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn check_set(&self, set: &VertexSet) -> Result<()> {
        match set.as_slice().last() {
            Some(&v) if !self.contains(v) => Err(Error::UnknownVertex(v)),
            _ => Ok(()),
        }
    }

    /// Label to vertex lookup table.
    pub fn label_index(&self) -> BTreeMap<&[i64], VertexId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_slice(), i as VertexId))
            .collect()
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::from_sorted_unchecked(self.vertices().collect())
    }

    /// The subgraph induced by `set`, re-indexed in sorted order. The result
    /// keeps the original labels and has trusted radius zero.
    pub fn induced(&self, set: &VertexSet, basepoint: VertexId) -> Result<GraphWindow> {
        self.check_set(set)?;
        let base = set
            .position(basepoint)
            .ok_or(Error::UnknownVertex(basepoint))? as VertexId;
        let labels = set.iter().map(|v| self.labels[v as usize].clone()).collect();
        let mut edges = Vec::new();
        for (i, v) in set.iter().enumerate() {
            for &u in self.neighbours(v) {
                if let Some(j) = set.position(u) {
                    if i < j {
                        edges.push((i as VertexId, j as VertexId));
                    }
                }
            }
        }
        GraphWindow::new(labels, edges, base, 0)
    }
}

fn bfs_from(w: &GraphWindow, sources: &[VertexId]) -> Vec<Distance> {
    let mut dist = alloc::vec![Distance::Infinite; w.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s as usize] == Distance::Infinite {
            dist[s as usize] = Distance::Finite(0);
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let Distance::Finite(d) = dist[v as usize] else {
            unreachable!()
        };
        for &u in w.neighbours(v) {
            if dist[u as usize] == Distance::Infinite {
                dist[u as usize] = Distance::Finite(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Breadth-first search from `sources`, truncated at `max_depth`. Returns the
/// visited vertices with their distance.
pub fn bounded_bfs(w: &GraphWindow, sources: &[VertexId], max_depth: u32) -> BTreeMap<VertexId, u32> {
    let mut seen = BTreeMap::new();
    let mut frontier: Vec<VertexId> = Vec::new();
    for &s in sources {
        if seen.insert(s, 0).is_none() {
            frontier.push(s);
        }
    }
    for d in 1..=max_depth {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in w.neighbours(v) {
                if let alloc::collections::btree_map::Entry::Vacant(e) = seen.entry(u) {
                    e.insert(d);
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}

/// Shortest-path distances from `src` to every window vertex.
pub fn bfs_distances(w: &GraphWindow, src: VertexId) -> Result<Vec<Distance>> {
    w.check_vertex(src)?;
    Ok(bfs_from(w, &[src]))
}

/// Distance between two vertices inside the window.
pub fn distance(w: &GraphWindow, x: VertexId, y: VertexId) -> Result<Distance> {
    w.check_vertex(x)?;
    w.check_vertex(y)?;
    if x == y {
        return Ok(Distance::Finite(0));
    }
    // bidirectional would be faster; windows here are small enough
    Ok(bfs_from(w, &[x])[y as usize])
}

/// Closed ball `B(x, r)`.
pub fn ball(w: &GraphWindow, x: VertexId, r: u32) -> Result<Flagged<VertexSet>> {
    w.check_vertex(x)?;
    let set = bounded_bfs(w, &[x], r).into_keys().collect();
    Ok(Flagged::new(set, w.ball_is_trusted(x, r)))
}

/// Sphere `S(x, r)`.
pub fn sphere(w: &GraphWindow, x: VertexId, r: u32) -> Result<Flagged<VertexSet>> {
    w.check_vertex(x)?;
    let set = bounded_bfs(w, &[x], r)
        .into_iter()
        .filter(|&(_, d)| d == r)
        .map(|(v, _)| v)
        .collect();
    Ok(Flagged::new(set, w.ball_is_trusted(x, r)))
}

/// `A^{+α}`: every vertex within distance `α` of `A`.
pub fn neighbourhood(w: &GraphWindow, a: &VertexSet, alpha: u32) -> Result<VertexSet> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    w.check_set(a)?;
    Ok(bounded_bfs(w, a.as_slice(), alpha).into_keys().collect())
}

/// `∂_r B = B^{+r} \ B`.
pub fn r_boundary(w: &GraphWindow, b: &VertexSet, r: u32) -> Result<VertexSet> {
    if b.is_empty() {
        return Ok(VertexSet::new());
    }
    w.check_set(b)?;
    Ok(bounded_bfs(w, b.as_slice(), r)
        .into_keys()
        .filter(|&v| !b.contains(v))
        .collect())
}

/// Whether every point of `set` lies in the trusted region at radius `r`.
pub fn set_is_trusted(w: &GraphWindow, set: &VertexSet, r: u32) -> bool {
    set.iter().all(|v| w.ball_is_trusted(v, r))
}

/// Partition of `A` into `k`-coarsely connected components: classes of the
/// transitive closure of `d(x, y) <= k`. Classes come back ordered by their
/// smallest member.
pub fn k_components(w: &GraphWindow, a: &VertexSet, k: u32) -> Result<Vec<VertexSet>> {
    if k == 0 {
        return Err(Error::InvalidParameter("coarse constant k must be >= 1".into()));
    }
    w.check_set(a)?;
    let mut uf = UnionFind::new(a.len());
    for (i, v) in a.iter().enumerate() {
        let reach = if k == 1 {
            w.neighbours(v).to_vec()
        } else {
            bounded_bfs(w, &[v], k).into_keys().collect()
        };
        for u in reach {
            if let Some(j) = a.position(u) {
                uf.union(i, j);
            }
        }
    }
    let (labels, count) = uf.classes();
    let mut classes = alloc::vec![Vec::new(); count];
    for (i, v) in a.iter().enumerate() {
        classes[labels[i]].push(v);
    }
    Ok(classes.into_iter().map(VertexSet::from_sorted_unchecked).collect())
}

/// `β_S(r) = sup_{s ∈ S} |B(s, r) ∩ S|` for each requested radius.
pub fn growth(w: &GraphWindow, s: &VertexSet, radii: &[u32]) -> Result<Flagged<GrowthTable>> {
    family_growth(w, core::slice::from_ref(s), radii)
}

/// `V_𝒮(r) = sup_{S ∈ 𝒮, s ∈ S} |B(s, r) ∩ S|`.
pub fn family_growth(w: &GraphWindow, family: &[VertexSet], radii: &[u32]) -> Result<Flagged<GrowthTable>> {
    if family.is_empty() || family.iter().any(VertexSet::is_empty) {
        return Err(Error::EmptySet);
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut trusted = true;
    for &r in radii {
        let mut best = 0;
        for s in family {
            w.check_set(s)?;
            for x in s.iter() {
                trusted &= w.ball_is_trusted(x, r);
                let count = bounded_bfs(w, &[x], r).keys().filter(|&&v| s.contains(v)).count();
                best = best.max(count);
            }
        }
        values.push(best);
    }
    Ok(Flagged::new(
        GrowthTable {
            radii: radii.to_vec(),
            values,
        },
        trusted,
    ))
}

/// `β_X(r) = sup_x |B(x, r)|`, taken over the probe points whose `r`-ball is
/// trusted. When no probe is trusted the whole window is scanned and the
/// result is flagged.
pub fn window_growth(w: &GraphWindow, r: u32) -> Flagged<usize> {
    let trusted: Vec<VertexId> = w.vertices().filter(|&v| w.ball_is_trusted(v, r)).collect();
    let (probes, flag): (Vec<VertexId>, bool) = if trusted.is_empty() {
        (w.vertices().collect(), false)
    } else {
        (trusted, true)
    };
    let best = probes
        .iter()
        .map(|&v| bounded_bfs(w, &[v], r).len())
        .max()
        .unwrap_or(0);
    Flagged::new(best, flag)
}

/// Pairwise window distances inside `a`, capped: entry `[i][j]` is `None`
/// when the members are farther apart than `cap`.
pub fn local_distances(w: &GraphWindow, a: &VertexSet, cap: u32) -> Vec<Vec<Option<u32>>> {
    a.iter()
        .map(|v| {
            let reach = bounded_bfs(w, &[v], cap);
            a.iter().map(|u| reach.get(&u).copied()).collect()
        })
        .collect()
}

/// All vertices whose ambient distance to `a` is at most `r`, plus whether
/// every visited vertex was interior enough for that to be exact.
pub fn trusted_neighbourhood(w: &GraphWindow, a: &VertexSet, r: u32) -> Result<Flagged<VertexSet>> {
    let set = neighbourhood(w, a, r)?;
    let trusted = w.is_isometric() || set_is_trusted(w, a, r);
    Ok(Flagged::new(set, trusted))
}

/// Connected components of the window after deleting `removed`.
pub fn components_avoiding(w: &GraphWindow, removed: &BTreeSet<VertexId>) -> Vec<VertexSet> {
    let rest: VertexSet = w.vertices().filter(|v| !removed.contains(v)).collect();
    if rest.is_empty() {
        return Vec::new();
    }
    k_components(w, &rest, 1).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path(n: u32) -> GraphWindow {
        let labels = (0..n).map(|i| alloc::vec![i as i64]).collect();
        GraphWindow::new(labels, (1..n).map(|i| (i - 1, i)), 0, 0).unwrap()
    }

    pub(crate) fn cycle(n: u32) -> GraphWindow {
        let labels = (0..n).map(|i| alloc::vec![i as i64]).collect();
        GraphWindow::new(labels, (0..n).map(|i| (i, (i + 1) % n)), 0, n)
            .unwrap()
            .with_isometric(true)
    }

    #[test]
    fn rejects_self_loops_and_unknown_ids() {
        let labels = alloc::vec![alloc::vec![0], alloc::vec![1]];
        assert!(matches!(
            GraphWindow::new(labels.clone(), [(0, 0)], 0, 0),
            Err(Error::MalformedGraph(_))
        ));
        assert_eq!(
            GraphWindow::new(labels, [(0, 5)], 0, 0),
            Err(Error::UnknownVertex(5))
        );
    }

    #[test]
    fn adjacency_is_symmetric_and_deduplicated() {
        let labels = (0..3).map(|i| alloc::vec![i]).collect();
        let w = GraphWindow::new(labels, [(0, 1), (1, 0), (1, 2)], 0, 0).unwrap();
        assert_eq!(w.edge_count(), 2);
        assert_eq!(w.neighbours(1), &[0, 2]);
        assert!(w.is_adjacent(2, 1));
    }

    #[test]
    fn disconnected_vertices_are_infinite() {
        let labels = (0..4).map(|i| alloc::vec![i]).collect();
        let w = GraphWindow::new(labels, [(0, 1), (2, 3)], 0, 0).unwrap();
        let d = bfs_distances(&w, 0).unwrap();
        assert_eq!(d[1], Distance::Finite(1));
        assert_eq!(d[3], Distance::Infinite);
        assert_eq!(bfs_distances(&w, 9), Err(Error::UnknownVertex(9)));
    }

    #[test]
    fn path_neighbourhood_and_boundary() {
        let p5 = path(5);
        let mid = VertexSet::singleton(2);
        assert_eq!(neighbourhood(&p5, &mid, 2).unwrap().len(), 5);
        assert_eq!(neighbourhood(&p5, &mid, 0).unwrap(), mid);
        assert_eq!(r_boundary(&p5, &p5.all_vertices(), 3).unwrap(), VertexSet::new());
        assert!(matches!(neighbourhood(&p5, &VertexSet::new(), 1), Err(Error::EmptySet)));
    }

    #[test]
    fn cycle_boundary_of_adjacent_pair() {
        let c4 = cycle(4);
        let b: VertexSet = [0, 1].into_iter().collect();
        let boundary = r_boundary(&c4, &b, 1).unwrap();
        assert_eq!(boundary.as_slice(), &[2, 3]);
    }

    #[test]
    fn far_pair_splits_into_two_classes() {
        let p5 = path(5);
        let a: VertexSet = [0, 3].into_iter().collect();
        assert_eq!(k_components(&p5, &a, 2).unwrap().len(), 2);
        assert_eq!(k_components(&p5, &a, 3).unwrap().len(), 1);
        assert!(k_components(&p5, &a, 0).is_err());
    }

    #[test]
    fn growth_of_singleton_is_one() {
        let p5 = path(5);
        let t = growth(&p5, &VertexSet::singleton(2), &[0, 1, 2, 3]).unwrap();
        assert_eq!(t.value.values, alloc::vec![1, 1, 1, 1]);
        assert!(growth(&p5, &VertexSet::new(), &[1]).is_err());
    }

    #[test]
    fn disjoint_counting_volume_adds() {
        let a: VertexSet = [0, 1].into_iter().collect();
        let b: VertexSet = [3, 4].into_iter().collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.union(&b).len(), a.len() + b.len());
    }
}
