use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::generators::MAX_WINDOW_VERTICES;
use crate::graph::{bfs_distances, Distance, Flagged, GraphWindow, VertexId, VertexSet};
use crate::union_find::UnionFind;

use super::normal_form::{GraphProductSpec, NormalForm};

pub type CliqueId = usize;
pub type HyperplaneId = usize;

/// A coset `g G_u`, stored by its minimal representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clique {
    pub vertex: u32,
    pub rep: NormalForm,
    /// Window vertices of the coset, in id order.
    pub members: Vec<VertexId>,
    /// Some element of the coset lies outside the window.
    pub clipped: bool,
}

/// An edge class under "same triangle" and "opposite in a 4-cycle".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    /// The vertex `u` with `J = g J_u`.
    pub vertex: u32,
    /// Minimal representative of `g ⟨star(u)⟩`.
    pub coset: NormalForm,
    pub edges: Vec<usize>,
    pub cliques: Vec<CliqueId>,
    /// The carrier reaches the rim of the ball, so part of it may be missing.
    pub partial: bool,
}

/// A Cayley ball of `ΓG` for the generating set `⋃ G_u ∖ {1}`, with its clique
/// and hyperplane registries.
#[derive(Debug, Clone)]
pub struct QmWindow {
    spec: GraphProductSpec,
    radius: u32,
    graph: GraphWindow,
    elements: Vec<NormalForm>,
    index: BTreeMap<NormalForm, VertexId>,
    edges: Vec<(VertexId, VertexId)>,
    edge_index: BTreeMap<(VertexId, VertexId), usize>,
    edge_clique: Vec<CliqueId>,
    edge_hyperplane: Vec<HyperplaneId>,
    cliques: Vec<Clique>,
    clique_index: BTreeMap<(u32, NormalForm), CliqueId>,
    hyperplanes: Vec<Hyperplane>,
    complete: bool,
}

impl QmWindow {
    pub fn spec(&self) -> &GraphProductSpec {
        &self.spec
    }

    pub fn graph(&self) -> &GraphWindow {
        &self.graph
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// The ball is the whole (finite) group.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn element(&self, v: VertexId) -> &NormalForm {
        &self.elements[v as usize]
    }

    pub fn vertex(&self, g: &NormalForm) -> Option<VertexId> {
        self.index.get(g).copied()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge_id(&self, a: VertexId, b: VertexId) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn clique(&self, c: CliqueId) -> &Clique {
        &self.cliques[c]
    }

    /// The clique `g G_u` through `v`.
    pub fn clique_at(&self, v: VertexId, u: u32) -> CliqueId {
        let (rep, _) = self.element(v).split_at(&self.spec, i64::from(u));
        self.clique_index[&(u, rep)]
    }

    pub fn edge_clique(&self, e: usize) -> CliqueId {
        self.edge_clique[e]
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn hyperplane(&self, j: HyperplaneId) -> &Hyperplane {
        &self.hyperplanes[j]
    }

    pub fn edge_hyperplane(&self, e: usize) -> HyperplaneId {
        self.edge_hyperplane[e]
    }

    /// Hyperplane of the edge between two adjacent vertices.
    pub fn hyperplane_between(&self, a: VertexId, b: VertexId) -> Option<HyperplaneId> {
        self.edge_id(a, b).map(|e| self.edge_hyperplane[e])
    }

    /// Hyperplane containing a clique, if the clique has an edge in the window.
    pub fn clique_hyperplane(&self, c: CliqueId) -> Option<HyperplaneId> {
        let m = &self.cliques[c].members;
        if m.len() < 2 {
            return None;
        }
        self.hyperplane_between(m[0], m[1])
    }

    /// `(u, minimal representative of g⟨star(u)⟩)` for the hyperplane of the
    /// clique `g G_u`: the algebraic description of hyperplanes.
    pub fn algebraic_label(&self, c: CliqueId) -> (u32, NormalForm) {
        let clique = &self.cliques[c];
        let star = self.spec.star(clique.vertex);
        let (coset, _) = clique.rep.strip(&self.spec, |v| star.contains(&v));
        (clique.vertex, coset)
    }

    /// Whether two cliques through a common vertex span a prism, which holds
    /// iff their vertices are adjacent in `Γ`.
    pub fn span_prism(&self, a: CliqueId, b: CliqueId) -> bool {
        let (ca, cb) = (&self.cliques[a], &self.cliques[b]);
        ca.vertex != cb.vertex
            && self.spec.is_adjacent(ca.vertex, cb.vertex)
            && ca.members.iter().any(|m| cb.members.binary_search(m).is_ok())
    }

    /// Component index of every vertex in the window with the edges of `J`
    /// removed.
    pub fn sector_labels(&self, j: HyperplaneId) -> Vec<usize> {
        let cut: BTreeSet<usize> = self.hyperplanes[j].edges.iter().copied().collect();
        let n = self.graph.len();
        let mut label = alloc::vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut queue = VecDeque::from([s as VertexId]);
            while let Some(x) = queue.pop_front() {
                for &y in self.graph.neighbours(x) {
                    if label[y as usize] == usize::MAX && !cut.contains(&self.edge_id(x, y).expect("edge")) {
                        label[y as usize] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

/// The ball of radius `R` about the identity of `ΓG`.
///
/// Union-find over triangles and 4-cycles inside a ball about the identity
/// already yields the restrictions of the ambient hyperplanes (every edge of
/// a hyperplane is linked to the clique nearest the centre through squares
/// that stay in the ball), and components of the ball minus a hyperplane are
/// the traces of its sectors. Both facts are re-checked against the
/// algebraic labels.
pub fn qm_ball(spec: &GraphProductSpec, radius: u32) -> Result<QmWindow> {
    if radius == 0 {
        return Err(Error::InvalidParameter("QM ball radius must be >= 1".into()));
    }
    let letters: Vec<(i64, u32)> = (0..spec.vertex_count())
        .flat_map(|u| spec.vertex_group(u).non_identity().map(move |a| (i64::from(u), a)))
        .collect();
    let mut elements = alloc::vec![NormalForm::identity()];
    let mut index = BTreeMap::from([(NormalForm::identity(), 0 as VertexId)]);
    let mut edge_set = BTreeSet::new();
    let mut frontier = alloc::vec![0 as VertexId];
    let mut complete = true;
    for layer in 0..=radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let g = elements[v as usize].clone();
            for &(u, a) in &letters {
                let h = g.mul_syllable(spec, u, a);
                match index.get(&h) {
                    Some(&w) => {
                        edge_set.insert((v.min(w), v.max(w)));
                    }
                    None if layer < radius => {
                        let w = elements.len() as VertexId;
                        if elements.len() >= MAX_WINDOW_VERTICES {
                            return Err(Error::BudgetExceeded(MAX_WINDOW_VERTICES));
                        }
                        index.insert(h.clone(), w);
                        elements.push(h);
                        edge_set.insert((v, w));
                        next.push(w);
                    }
                    None => complete = false,
                }
            }
        }
        frontier = next;
    }
    let labels = elements.iter().map(NormalForm::label).collect();
    let edges: Vec<(VertexId, VertexId)> = edge_set.into_iter().collect();
    let n = elements.len() as u32;
    let graph = if complete {
        GraphWindow::new(labels, edges.iter().copied(), 0, n)?.with_isometric(true)
    } else {
        GraphWindow::new(labels, edges.iter().copied(), 0, radius)?
    };
    let edge_index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    // cliques: one coset g G_u per (vertex, u)
    let mut cliques: Vec<Clique> = Vec::new();
    let mut clique_index = BTreeMap::new();
    for (v, g) in elements.iter().enumerate() {
        for u in 0..spec.vertex_count() {
            let (rep, _) = g.split_at(spec, i64::from(u));
            let id = *clique_index.entry((u, rep.clone())).or_insert_with(|| {
                cliques.push(Clique {
                    vertex: u,
                    rep,
                    members: Vec::new(),
                    clipped: false,
                });
                cliques.len() - 1
            });
            cliques[id].members.push(v as VertexId);
        }
    }
    for c in &mut cliques {
        c.clipped = c.members.len() < spec.vertex_group(c.vertex).order();
    }
    let mut edge_clique = Vec::with_capacity(edges.len());
    for &(a, b) in &edges {
        let step = elements[a as usize].inverse(spec).mul(spec, &elements[b as usize]);
        let &[(u, _)] = step.syllables() else {
            return Err(Error::Structure(format!("edge ({a}, {b}) is not a single letter")));
        };
        let (rep, _) = elements[a as usize].split_at(spec, u);
        edge_clique.push(clique_index[&(u as u32, rep)]);
    }

    let mut w = QmWindow {
        spec: spec.clone(),
        radius,
        graph,
        elements,
        index,
        edges,
        edge_index,
        edge_clique,
        edge_hyperplane: Vec::new(),
        cliques,
        clique_index,
        hyperplanes: Vec::new(),
        complete,
    };
    build_hyperplanes(&mut w)?;
    Ok(w)
}

fn build_hyperplanes(w: &mut QmWindow) -> Result<()> {
    let mut uf = UnionFind::new(w.edges.len());
    for (i, &(a, b)) in w.edges.iter().enumerate() {
        // triangles through the edge
        for &c in w.graph.neighbours(a) {
            if c != b && w.graph.is_adjacent(b, c) {
                uf.union(i, w.edge_id(a, c).expect("edge"));
            }
        }
        // squares a-b-d-c-a: the edge c-d is opposite to a-b
        for &c in w.graph.neighbours(a) {
            if c == b {
                continue;
            }
            for &d in w.graph.neighbours(b) {
                if d != a && d != c && w.graph.is_adjacent(c, d) {
                    uf.union(i, w.edge_id(c, d).expect("edge"));
                }
            }
        }
    }
    let (class, count) = uf.classes();
    let mut hyperplanes: Vec<Hyperplane> = Vec::with_capacity(count);
    let mut first: Vec<Option<usize>> = alloc::vec![None; count];
    for (e, &h) in class.iter().enumerate() {
        if first[h].is_none() {
            first[h] = Some(e);
        }
    }
    for h in 0..count {
        let e = first[h].expect("class is non-empty");
        let (vertex, coset) = w.algebraic_label(w.edge_clique[e]);
        hyperplanes.push(Hyperplane {
            vertex,
            coset,
            edges: Vec::new(),
            cliques: Vec::new(),
            partial: false,
        });
    }
    let mut by_label: BTreeMap<(u32, NormalForm), HyperplaneId> = BTreeMap::new();
    for (e, &h) in class.iter().enumerate() {
        let label = w.algebraic_label(w.edge_clique[e]);
        if label != (hyperplanes[h].vertex, hyperplanes[h].coset.clone()) {
            return Err(Error::Structure(format!("edge {e} joins a hyperplane of another coset")));
        }
        if *by_label.entry(label).or_insert(h) != h {
            return Err(Error::Structure(format!("hyperplane of edge {e} is split inside the ball")));
        }
        hyperplanes[h].edges.push(e);
        let c = w.edge_clique[e];
        if hyperplanes[h].cliques.last() != Some(&c) && !hyperplanes[h].cliques.contains(&c) {
            hyperplanes[h].cliques.push(c);
        }
    }
    let rim = |v: VertexId| !w.complete && w.graph.depth(v) == Distance::Finite(w.radius);
    for hp in &mut hyperplanes {
        hp.cliques.sort_unstable();
        hp.partial = hp
            .cliques
            .iter()
            .any(|&c| w.cliques[c].clipped || w.cliques[c].members.iter().any(|&v| rim(v)));
    }
    w.edge_hyperplane = class;
    w.hyperplanes = hyperplanes;
    Ok(())
}

/// Carrier, fibres and sectors of one hyperplane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperplaneGeometry {
    pub carrier: VertexSet,
    pub fibres: Vec<VertexSet>,
    pub sectors: Vec<VertexSet>,
}

impl HyperplaneGeometry {
    /// Index of the fibre containing `v`.
    pub fn fibre_of(&self, v: VertexId) -> Option<usize> {
        self.fibres.iter().position(|f| f.contains(v))
    }

    pub fn sector_of(&self, v: VertexId) -> Option<usize> {
        self.sectors.iter().position(|s| s.contains(v))
    }
}

/// Carrier (vertices on `J`-edges), fibres (components of the carrier minus
/// `J`) and sectors (components of the window minus `J`). A hyperplane with a
/// clipped clique has a clipped carrier; `allow_partial` returns the traces
/// in the window instead of failing.
pub fn hyperplane_geometry(w: &QmWindow, j: HyperplaneId, allow_partial: bool) -> Result<Flagged<HyperplaneGeometry>> {
    let hp = w
        .hyperplanes
        .get(j)
        .ok_or_else(|| Error::InvalidParameter(format!("no hyperplane {j}")))?;
    if hp.partial && !allow_partial {
        return Err(Error::Untrusted(format!("carrier of hyperplane {j} is clipped by the window")));
    }
    let carrier: VertexSet = hp
        .edges
        .iter()
        .flat_map(|&e| {
            let (a, b) = w.edges[e];
            [a, b]
        })
        .collect();
    let cut: BTreeSet<usize> = hp.edges.iter().copied().collect();
    let mut fibres = Vec::new();
    let mut seen = BTreeSet::new();
    for s in carrier.iter() {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = alloc::vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in w.graph.neighbours(x) {
                if carrier.contains(y) && !cut.contains(&w.edge_id(x, y).expect("edge")) && seen.insert(y) {
                    comp.push(y);
                    queue.push_back(y);
                }
            }
        }
        fibres.push(comp.into_iter().collect::<VertexSet>());
    }
    let labels = w.sector_labels(j);
    let count = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sectors = alloc::vec![Vec::new(); count];
    for (v, &l) in labels.iter().enumerate() {
        sectors[l].push(v as VertexId);
    }
    let sectors = sectors.into_iter().map(VertexSet::from_sorted_unchecked).collect();
    Ok(Flagged::new(
        HyperplaneGeometry {
            carrier,
            fibres,
            sectors,
        },
        !hp.partial,
    ))
}

/// The unique vertex of `target` nearest to `x`. Several nearest vertices
/// mean `target` is not gated, which is reported as a structural failure.
/// The flag says whether every window distance used is an ambient one.
pub fn gate(w: &GraphWindow, target: &VertexSet, x: VertexId) -> Result<Flagged<VertexId>> {
    if target.is_empty() {
        return Err(Error::EmptySet);
    }
    w.check_vertex(x)?;
    w.check_set(target)?;
    let dist = bfs_distances(w, x)?;
    let best = target.iter().map(|t| dist[t as usize]).min().expect("non-empty");
    let mut nearest = target.iter().filter(|&t| dist[t as usize] == best);
    let g = nearest.next().expect("non-empty");
    let trusted = target.iter().all(|t| w.distance_is_trusted(x, t, dist[t as usize]));
    if nearest.next().is_some() {
        if trusted {
            return Err(Error::Structure(format!("vertex {x} has several nearest points in the target")));
        }
        return Ok(Flagged::new(g, false));
    }
    Ok(Flagged::new(g, trusted))
}

/// Outcome of the quasi-median structure checks on one ball.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructureReport {
    pub vertices: usize,
    pub edges: usize,
    pub cliques: usize,
    pub hyperplanes: usize,
    pub partial_hyperplanes: usize,
    pub induced_k4_minus: usize,
    pub induced_k32: usize,
    pub clique_mismatches: usize,
    pub triangle_failures: usize,
    pub quadrangle_failures: usize,
    pub pairs_checked: usize,
    pub distance_mismatches: usize,
    pub geodesics_checked: usize,
    pub geodesic_recrossings: usize,
    pub transverse_dimension: usize,
    pub clique_number: usize,
    pub cubdist_violations: usize,
    pub max_geodesic_length: u32,
}

impl StructureReport {
    pub fn passes(&self) -> bool {
        self.induced_k4_minus == 0
            && self.induced_k32 == 0
            && self.clique_mismatches == 0
            && self.triangle_failures == 0
            && self.quadrangle_failures == 0
            && self.distance_mismatches == 0
            && self.geodesic_recrossings == 0
            && self.cubdist_violations == 0
            && self.transverse_dimension <= self.clique_number
    }
}

/// Runs every structural check on a QM ball: forbidden induced subgraphs,
/// cliques as common neighbourhoods, triangle and quadrangle conditions about
/// the centre, distance versus separating hyperplanes on trusted pairs,
/// geodesics of length `<= max_len` crossing each hyperplane once, the
/// dimension bound and the non-transverse chain bound on distances.
pub fn structure_checks(w: &QmWindow, max_len: u32) -> Result<StructureReport> {
    let g = &w.graph;
    let n = g.len();
    let mut rep = StructureReport {
        vertices: n,
        edges: w.edges.len(),
        cliques: w.cliques.len(),
        hyperplanes: w.hyperplanes.len(),
        partial_hyperplanes: w.hyperplanes.iter().filter(|h| h.partial).count(),
        clique_number: w.spec.clique_number(),
        max_geodesic_length: max_len,
        ..StructureReport::default()
    };

    // forbidden subgraphs and cliques
    for (e, &(a, b)) in w.edges.iter().enumerate() {
        let common: Vec<VertexId> = g
            .neighbours(a)
            .iter()
            .copied()
            .filter(|&c| g.is_adjacent(b, c))
            .collect();
        for (i, &c) in common.iter().enumerate() {
            for &d in &common[i + 1..] {
                if !g.is_adjacent(c, d) {
                    rep.induced_k4_minus += 1;
                }
            }
        }
        let clique = &w.cliques[w.edge_clique[e]];
        let mut expected: Vec<VertexId> = common;
        expected.push(a);
        expected.push(b);
        expected.sort_unstable();
        if expected != clique.members {
            rep.clique_mismatches += 1;
        }
    }
    for y1 in 0..n as VertexId {
        for y2 in y1 + 1..n as VertexId {
            if g.is_adjacent(y1, y2) {
                continue;
            }
            let common: Vec<VertexId> = g
                .neighbours(y1)
                .iter()
                .copied()
                .filter(|&c| g.is_adjacent(y2, c))
                .collect();
            if has_independent_triple(g, &common) {
                rep.induced_k32 += 1;
            }
        }
    }

    // triangle and quadrangle conditions about the centre, where depths are exact
    let depth = |v: VertexId| g.depth(v).finite().expect("ball is connected");
    for &(x, y) in &w.edges {
        let d = depth(x);
        if d == depth(y) && d > 0 && !g.neighbours(x).iter().any(|&z| g.is_adjacent(y, z) && depth(z) + 1 == d) {
            rep.triangle_failures += 1;
        }
    }
    for z in 0..n as VertexId {
        let dz = depth(z);
        if dz < 2 {
            continue;
        }
        let lower: Vec<VertexId> = g.neighbours(z).iter().copied().filter(|&x| depth(x) + 1 == dz).collect();
        for (i, &x) in lower.iter().enumerate() {
            for &y in &lower[i + 1..] {
                if g.is_adjacent(x, y) {
                    continue;
                }
                if !g.neighbours(x).iter().any(|&m| g.is_adjacent(y, m) && depth(m) + 2 == dz) {
                    rep.quadrangle_failures += 1;
                }
            }
        }
    }

    // transversality from squares
    let h = w.hyperplanes.len();
    let mut transverse = alloc::vec![BTreeSet::new(); h];
    for &(a, b) in &w.edges {
        for &c in g.neighbours(a) {
            if c == b || g.is_adjacent(b, c) {
                continue;
            }
            for &d in g.neighbours(b) {
                if d != a && g.is_adjacent(c, d) && !g.is_adjacent(a, d) {
                    let j1 = w.hyperplane_between(a, b).expect("edge");
                    let j2 = w.hyperplane_between(a, c).expect("edge");
                    if j1 != j2 {
                        transverse[j1].insert(j2);
                        transverse[j2].insert(j1);
                    }
                }
            }
        }
    }
    rep.transverse_dimension = max_clique(&transverse);

    // distances against separating hyperplanes
    let sectors: Vec<Vec<usize>> = (0..h).map(|j| w.sector_labels(j)).collect();
    for x in 0..n as VertexId {
        let dist = bfs_distances(g, x)?;
        for y in x + 1..n as VertexId {
            let d = dist[y as usize];
            if !g.distance_is_trusted(x, y, d) {
                continue;
            }
            let Distance::Finite(d) = d else { continue };
            rep.pairs_checked += 1;
            let separating: Vec<usize> = (0..h)
                .filter(|&j| sectors[j][x as usize] != sectors[j][y as usize])
                .collect();
            if separating.len() != d as usize {
                rep.distance_mismatches += 1;
            }
            let chain = max_independent(&separating, &transverse);
            if d as usize > rep.clique_number * chain {
                rep.cubdist_violations += 1;
            }
        }
        // geodesics out of x, enumerated by depth-first search
        let mut path = alloc::vec![x];
        let mut crossed = Vec::new();
        walk_geodesics(w, &dist, &mut path, &mut crossed, max_len, &mut rep);
    }
    Ok(rep)
}

fn walk_geodesics(
    w: &QmWindow,
    dist: &[Distance],
    path: &mut Vec<VertexId>,
    crossed: &mut Vec<HyperplaneId>,
    max_len: u32,
    rep: &mut StructureReport,
) {
    let last = *path.last().expect("non-empty path");
    let len = path.len() as u32 - 1;
    if len > 0 && w.graph.distance_is_trusted(path[0], last, Distance::Finite(len)) {
        rep.geodesics_checked += 1;
        let mut seen = crossed.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != crossed.len() {
            rep.geodesic_recrossings += 1;
        }
    }
    if len == max_len {
        return;
    }
    for &y in w.graph.neighbours(last) {
        if dist[y as usize] == Distance::Finite(len + 1) {
            crossed.push(w.hyperplane_between(last, y).expect("edge"));
            path.push(y);
            walk_geodesics(w, dist, path, crossed, max_len, rep);
            path.pop();
            crossed.pop();
        }
    }
}

fn has_independent_triple(g: &GraphWindow, vs: &[VertexId]) -> bool {
    for (i, &a) in vs.iter().enumerate() {
        for (j, &b) in vs.iter().enumerate().skip(i + 1) {
            if g.is_adjacent(a, b) {
                continue;
            }
            if vs[j + 1..].iter().any(|&c| !g.is_adjacent(a, c) && !g.is_adjacent(b, c)) {
                return true;
            }
        }
    }
    false
}

fn max_clique(adj: &[BTreeSet<usize>]) -> usize {
    fn grow(adj: &[BTreeSet<usize>], chosen: &mut Vec<usize>, cands: &[usize], best: &mut usize) {
        *best = (*best).max(chosen.len());
        for (i, &v) in cands.iter().enumerate() {
            if chosen.len() + cands.len() - i <= *best {
                return;
            }
            let next: Vec<usize> = cands[i + 1..].iter().copied().filter(|c| adj[v].contains(c)).collect();
            chosen.push(v);
            grow(adj, chosen, &next, best);
            chosen.pop();
        }
    }
    let all: Vec<usize> = (0..adj.len()).collect();
    let mut best = 0;
    grow(adj, &mut Vec::new(), &all, &mut best);
    best
}

/// Largest subset of `set` with no two members transverse.
fn max_independent(set: &[usize], adj: &[BTreeSet<usize>]) -> usize {
    let comp: Vec<BTreeSet<usize>> = (0..adj.len())
        .map(|v| {
            if set.contains(&v) {
                set.iter().copied().filter(|&u| u != v && !adj[v].contains(&u)).collect()
            } else {
                BTreeSet::new()
            }
        })
        .collect();
    fn grow(adj: &[BTreeSet<usize>], size: usize, cands: &[usize], best: &mut usize) {
        *best = (*best).max(size);
        for (i, &v) in cands.iter().enumerate() {
            if size + cands.len() - i <= *best {
                return;
            }
            let next: Vec<usize> = cands[i + 1..].iter().copied().filter(|c| adj[v].contains(c)).collect();
            grow(adj, size + 1, &next, best);
        }
    }
    let mut best = 0;
    grow(&comp, 0, set, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    fn k3_z3() -> GraphProductSpec {
        GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(3), &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn single_z3() -> GraphProductSpec {
        GraphProductSpec::uniform(1, FiniteGroup::cyclic_pm1(3), &[]).unwrap()
    }

    fn square() -> GraphProductSpec {
        GraphProductSpec::uniform(2, FiniteGroup::cyclic_pm1(2), &[(0, 1)]).unwrap()
    }

    fn p3_z2() -> GraphProductSpec {
        GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(2), &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn single_vertex_gives_a_triangle() {
        let w = qm_ball(&single_z3(), 2).unwrap();
        assert_eq!(w.graph().len(), 3);
        assert!(w.is_complete());
        assert_eq!(w.hyperplanes().len(), 1);
        let geo = hyperplane_geometry(&w, 0, false).unwrap();
        assert_eq!(geo.value.carrier.len(), 3);
        assert_eq!(geo.value.fibres.len(), 3);
        assert_eq!(geo.value.sectors.len(), 3);
    }

    #[test]
    fn square_hyperplanes_have_two_sides() {
        let w = qm_ball(&square(), 3).unwrap();
        assert_eq!(w.graph().len(), 4);
        assert_eq!(w.hyperplanes().len(), 2);
        for j in 0..2 {
            let geo = hyperplane_geometry(&w, j, false).unwrap().value;
            assert_eq!(geo.fibres.len(), 2);
            assert_eq!(geo.sectors.len(), 2);
        }
    }

    #[test]
    fn path_ball_of_radius_two() {
        let w = qm_ball(&p3_z2(), 2).unwrap();
        assert_eq!(w.graph().len(), 8);
        assert!(!w.is_complete());
    }

    #[test]
    fn fixtures_are_quasi_median() {
        for (spec, r) in [(k3_z3(), 3), (square(), 3), (p3_z2(), 3)] {
            let w = qm_ball(&spec, r).unwrap();
            let rep = structure_checks(&w, 5).unwrap();
            assert!(rep.passes(), "{rep:?}");
            assert!(rep.pairs_checked > 0);
            assert_eq!(rep.transverse_dimension, spec.clique_number());
        }
    }

    #[test]
    fn carrier_of_the_middle_vertex_splits_as_a_product() {
        // J_v for v = 1: carrier is <star(v)> = G_v x <link(v)>
        let w = qm_ball(&p3_z2(), 3).unwrap();
        let e = w.edge_id(0, w.vertex(&w.spec().normal_form(&[(1, 1)]).unwrap()).unwrap()).unwrap();
        let j = w.edge_hyperplane(e);
        let geo = hyperplane_geometry(&w, j, true).unwrap();
        assert!(!geo.trusted);
        let fibres = &geo.value.fibres;
        assert_eq!(fibres.len(), 2);
        assert_eq!(fibres[0].len(), fibres[1].len());
        for f in fibres {
            let has_v = |v: VertexId| w.element(v).syllables().iter().any(|&(u, _)| u == 1);
            let first = has_v(f.as_slice()[0]);
            assert!(f.iter().all(|v| has_v(v) == first));
        }
        assert!(hyperplane_geometry(&w, j, false).is_err());
    }

    #[test]
    fn gates_onto_cliques_are_unique() {
        let w = qm_ball(&p3_z2(), 3).unwrap();
        for c in w.cliques().iter().filter(|c| !c.clipped) {
            let target = c.members.iter().copied().collect();
            for x in 0..w.graph().len() as VertexId {
                gate(w.graph(), &target, x).unwrap();
            }
        }
    }
}
