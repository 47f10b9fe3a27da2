use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Distance, GraphWindow, VertexId, VertexSet};

use super::metrics::{clique_delta, delta};
use super::qm::{HyperplaneId, QmWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PcEdgeKind {
    /// Same clique, marked vertices at `δ_C`-distance one.
    Slide,
    /// Same marked vertex, cliques spanning a prism.
    Rotation,
}

/// The graph of pointed cliques over a QM ball. The pointed clique
/// `(g G_u, g)` is stored as `(u, g)`, so vertex `p·k + u` (with `k = |V(Γ)|`)
/// points the clique of type `u` through ball vertex `p`.
#[derive(Debug, Clone)]
pub struct PcWindow {
    graph: GraphWindow,
    types: u32,
    kinds: BTreeMap<(VertexId, VertexId), PcEdgeKind>,
    depths: Vec<u32>,
    radius: u32,
}

impl PcWindow {
    pub fn graph(&self) -> &GraphWindow {
        &self.graph
    }

    /// `(u, ball vertex)` of a pointed clique.
    pub fn point(&self, v: VertexId) -> (u32, VertexId) {
        (v % self.types, v / self.types)
    }

    pub fn vertex(&self, u: u32, p: VertexId) -> VertexId {
        p * self.types + u
    }

    pub fn edge_kind(&self, a: VertexId, b: VertexId) -> Option<PcEdgeKind> {
        self.kinds.get(&(a.min(b), a.max(b))).copied()
    }

    /// Whether the window distance between two pointed cliques is the ambient
    /// one: a path of length `L` from `(A, a)` only marks vertices within
    /// `|a| + L` of the identity, all of which are present.
    pub fn pair_trusted(&self, a: VertexId, b: VertexId, d: Distance) -> bool {
        if self.graph.is_isometric() {
            return true;
        }
        let Distance::Finite(d) = d else {
            return false;
        };
        let near = self.depths[self.point(a).1 as usize].min(self.depths[self.point(b).1 as usize]);
        d + near <= self.radius
    }
}

/// Builds `PC(X, M)` on the ball: slides along `δ_C = 1` inside every
/// clique, rotations between cliques through a common vertex that span a
/// prism.
pub fn pc_build(w: &QmWindow) -> Result<PcWindow> {
    let types = w.spec().vertex_count();
    let g = w.graph();
    let n = g.len() as u32;
    let mut labels = Vec::with_capacity((n * types) as usize);
    for p in 0..n {
        for u in 0..types {
            let mut label = alloc::vec![i64::from(u)];
            label.extend(g.label(p));
            labels.push(label);
        }
    }
    let mut kinds = BTreeMap::new();
    for (c, clique) in w.cliques().iter().enumerate() {
        let m = &clique.members;
        for (i, &x) in m.iter().enumerate() {
            for &y in &m[i + 1..] {
                if clique_delta(w, c, x, y)? == 1 {
                    let (a, b) = (x * types + clique.vertex, y * types + clique.vertex);
                    kinds.insert((a.min(b), a.max(b)), PcEdgeKind::Slide);
                }
            }
        }
    }
    for p in 0..n {
        for u in 0..types {
            for v in u + 1..types {
                if w.span_prism(w.clique_at(p, u), w.clique_at(p, v)) {
                    kinds.insert((p * types + u, p * types + v), PcEdgeKind::Rotation);
                }
            }
        }
    }
    let graph = if w.is_complete() {
        GraphWindow::new(labels, kinds.keys().copied(), 0, n * types)?.with_isometric(true)
    } else {
        GraphWindow::new(labels, kinds.keys().copied(), 0, w.radius())?
    };
    let depths = (0..n).map(|p| g.depth(p).finite().expect("ball is connected")).collect();
    Ok(PcWindow {
        graph,
        types,
        kinds,
        depths,
        radius: w.radius(),
    })
}

/// The bulkhead of the fibre of `J` lying in one sector, and the two zones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bulkhead {
    pub hyperplane: HyperplaneId,
    /// Sector label (as in [`QmWindow::sector_labels`]) of the fibre.
    pub sector: usize,
    pub bulkhead: VertexSet,
    /// Pointed cliques whose clique lies in the sector of the fibre.
    pub zone_sector: VertexSet,
    /// Everything else outside the bulkhead.
    pub zone_cosector: VertexSet,
    /// No path joins the zones once the bulkhead is removed.
    pub separates: bool,
}

/// Each sector of `J` contains exactly one fibre, so fibres are named by
/// their sector. A pointed clique `(C, p)` with `C ⊂ J` lies in the
/// bulkhead iff `p` lies in the sector; otherwise `C` misses `J` and sits on
/// the side of its marked vertex.
pub fn bulkhead(pc: &PcWindow, w: &QmWindow, j: HyperplaneId, sector: usize) -> Result<Bulkhead> {
    let hp = w
        .hyperplanes()
        .get(j)
        .ok_or_else(|| Error::InvalidParameter(format!("no hyperplane {j}")))?;
    let labels = w.sector_labels(j);
    if !labels.contains(&sector) {
        return Err(Error::InvalidParameter(format!("hyperplane {j} has no sector {sector}")));
    }
    let label = (hp.vertex, hp.coset.clone());
    let (mut wall, mut near, mut far) = (Vec::new(), Vec::new(), Vec::new());
    for v in pc.graph.vertices() {
        let (u, p) = pc.point(v);
        let inside = labels[p as usize] == sector;
        let in_j = u == hp.vertex && w.algebraic_label(w.clique_at(p, u)) == label;
        match (in_j, inside) {
            (true, true) => wall.push(v),
            (false, true) => near.push(v),
            _ => far.push(v),
        }
    }
    let wall = VertexSet::from_sorted_unchecked(wall);
    let near = VertexSet::from_sorted_unchecked(near);
    let far = VertexSet::from_sorted_unchecked(far);
    let mut seen = alloc::vec![false; pc.graph.len()];
    let mut queue: VecDeque<VertexId> = near.iter().collect();
    for v in near.iter() {
        seen[v as usize] = true;
    }
    while let Some(x) = queue.pop_front() {
        for &y in pc.graph.neighbours(x) {
            if !seen[y as usize] && !wall.contains(y) {
                seen[y as usize] = true;
                queue.push_back(y);
            }
        }
    }
    let separates = far.iter().all(|v| !seen[v as usize]);
    Ok(Bulkhead {
        hyperplane: j,
        sector,
        bulkhead: wall,
        zone_sector: near,
        zone_cosector: far,
        separates,
    })
}

/// Both sides of `δ(a, b) <= d_PC <= 3δ(a, b) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcBound {
    pub d_pc: Distance,
    pub delta: u32,
    pub same_hyperplane: bool,
    pub trusted: bool,
    /// `None` when the window distance is not certified.
    pub lower_holds: Option<bool>,
    /// `None` when the cliques lie in different hyperplanes, or when the
    /// window distance exceeds the bound but is not certified.
    pub upper_holds: Option<bool>,
}

pub fn pc_distance_bounds(pc: &PcWindow, w: &QmWindow, a: VertexId, b: VertexId) -> Result<PcBound> {
    pc.graph.check_vertex(a)?;
    pc.graph.check_vertex(b)?;
    let dist = bfs_distances(&pc.graph, a)?;
    Ok(bound_from(pc, w, a, b, dist[b as usize]))
}

fn bound_from(pc: &PcWindow, w: &QmWindow, a: VertexId, b: VertexId, d: Distance) -> PcBound {
    let ((u, p), (v, q)) = (pc.point(a), pc.point(b));
    let value = delta(w.spec(), w.element(p), w.element(q));
    let same = u == v && w.algebraic_label(w.clique_at(p, u)) == w.algebraic_label(w.clique_at(q, v));
    let trusted = pc.pair_trusted(a, b, d);
    let lower_holds = trusted.then(|| d.finite().is_none_or(|d| value <= d));
    // window distances only overestimate, so a window path within the bound
    // certifies it
    let upper_holds = if !same {
        None
    } else {
        match d.finite() {
            Some(d) if d <= 3 * value + 1 => Some(true),
            _ if trusted => Some(false),
            _ => None,
        }
    };
    PcBound {
        d_pc: d,
        delta: value,
        same_hyperplane: same,
        trusted,
        lower_holds,
        upper_holds,
    }
}

/// All-pairs distance bounds and all bulkhead separations on one ball.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PcReport {
    pub pc_vertices: usize,
    pub slides: usize,
    pub rotations: usize,
    pub pairs: usize,
    pub trusted_pairs: usize,
    pub lower_violations: usize,
    pub same_hyperplane_pairs: usize,
    pub upper_verified: usize,
    pub upper_violations: usize,
    pub upper_unverified: usize,
    pub bulkheads: usize,
    pub bulkhead_failures: usize,
    pub degenerate_bulkheads: usize,
}

impl PcReport {
    pub fn passes(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0 && self.bulkhead_failures == 0
    }
}

pub fn pc_checks(pc: &PcWindow, w: &QmWindow) -> Result<PcReport> {
    let mut rep = PcReport {
        pc_vertices: pc.graph.len(),
        slides: pc.kinds.values().filter(|&&k| k == PcEdgeKind::Slide).count(),
        rotations: pc.kinds.values().filter(|&&k| k == PcEdgeKind::Rotation).count(),
        ..PcReport::default()
    };
    let n = pc.graph.len() as VertexId;
    for a in 0..n {
        let dist = bfs_distances(&pc.graph, a)?;
        for b in 0..n {
            let bound = bound_from(pc, w, a, b, dist[b as usize]);
            rep.pairs += 1;
            if bound.trusted {
                rep.trusted_pairs += 1;
            }
            if bound.lower_holds == Some(false) {
                rep.lower_violations += 1;
            }
            if bound.same_hyperplane {
                rep.same_hyperplane_pairs += 1;
                match bound.upper_holds {
                    Some(true) => rep.upper_verified += 1,
                    Some(false) => rep.upper_violations += 1,
                    None => rep.upper_unverified += 1,
                }
            }
        }
    }
    for j in 0..w.hyperplanes().len() {
        let labels = w.sector_labels(j);
        let count = labels.iter().max().map_or(0, |&m| m + 1);
        for s in 0..count {
            let b = bulkhead(pc, w, j, s)?;
            rep.bulkheads += 1;
            if b.zone_sector.is_empty() || b.zone_cosector.is_empty() {
                rep.degenerate_bulkheads += 1;
            }
            if !b.separates {
                rep.bulkhead_failures += 1;
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::quasimedian::{qm_ball, GraphProductSpec};

    #[test]
    fn triangle_pc_is_a_triangle() {
        let spec = GraphProductSpec::uniform(1, FiniteGroup::cyclic_pm1(3), &[]).unwrap();
        let w = qm_ball(&spec, 1).unwrap();
        let pc = pc_build(&w).unwrap();
        assert_eq!(pc.graph().len(), 3);
        assert_eq!(pc.graph().edge_count(), 3);
        assert!(pc.graph().edges().all(|(a, b)| pc.edge_kind(a, b) == Some(PcEdgeKind::Slide)));
    }

    #[test]
    fn square_pc_is_an_eight_cycle() {
        let spec = GraphProductSpec::uniform(2, FiniteGroup::cyclic_pm1(2), &[(0, 1)]).unwrap();
        let w = qm_ball(&spec, 2).unwrap();
        let pc = pc_build(&w).unwrap();
        let rep = pc_checks(&pc, &w).unwrap();
        assert_eq!((rep.pc_vertices, rep.slides, rep.rotations), (8, 4, 4));
        assert!(pc.graph().vertices().all(|v| pc.graph().degree(v) == 2));
        assert!(rep.passes(), "{rep:?}");
    }

    #[test]
    fn identical_pointed_cliques_have_zero_bounds() {
        let spec = GraphProductSpec::uniform(2, FiniteGroup::cyclic_pm1(2), &[(0, 1)]).unwrap();
        let w = qm_ball(&spec, 2).unwrap();
        let pc = pc_build(&w).unwrap();
        let b = pc_distance_bounds(&pc, &w, 3, 3).unwrap();
        assert_eq!((b.d_pc, b.delta), (Distance::Finite(0), 0));
        assert_eq!(b.upper_holds, Some(true));
    }

    #[test]
    fn path_fixture_passes() {
        let spec = GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(2), &[(0, 1), (1, 2)]).unwrap();
        let w = qm_ball(&spec, 3).unwrap();
        let pc = pc_build(&w).unwrap();
        let rep = pc_checks(&pc, &w).unwrap();
        assert!(rep.passes(), "{rep:?}");
        assert!(rep.trusted_pairs > 0 && rep.upper_verified > 0);
        assert!(rep.bulkheads > rep.degenerate_bulkheads);
    }
}
