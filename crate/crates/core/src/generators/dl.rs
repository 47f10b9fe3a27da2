use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{GraphWindow, VertexId, VertexSet};

use super::{assert_in_quadruple_ball, tree_window, TreeWindow, MAX_WINDOW_VERTICES};

/// A window of the Diestel–Leader graph `DL(p, q)`: pairs `(x_1, x_2)` of
/// vertices of `T_{p+1}` and `T_{q+1}` with `b_1(x_1) + b_2(x_2) = 0`,
/// adjacent when both coordinates are.
#[derive(Debug, Clone)]
pub struct DlWindow {
    graph: GraphWindow,
    p: u32,
    q: u32,
    tree1: TreeWindow,
    tree2: TreeWindow,
    coords: Vec<(VertexId, VertexId)>,
    index: BTreeMap<(VertexId, VertexId), VertexId>,
}

impl DlWindow {
    pub fn graph(&self) -> &GraphWindow {
        &self.graph
    }

    pub fn branching(&self) -> (u32, u32) {
        (self.p, self.q)
    }

    pub fn tree1(&self) -> &TreeWindow {
        &self.tree1
    }

    pub fn tree2(&self) -> &TreeWindow {
        &self.tree2
    }

    pub fn coords(&self, v: VertexId) -> (VertexId, VertexId) {
        self.coords[v as usize]
    }

    pub fn vertex(&self, x1: VertexId, x2: VertexId) -> Option<VertexId> {
        self.index.get(&(x1, x2)).copied()
    }
}

/// Builds `DL(p, q)` restricted to `x_i` below the anchor-ray vertex at level
/// `depth` of each tree and to `b_i >= -band`. The basepoint is the pair of
/// anchor vertices at level zero.
pub fn dl_window(p: u32, q: u32, band: u32, depth: u32) -> Result<DlWindow> {
    if p < 2 || q < 2 {
        return Err(Error::InvalidParameter("DL branching parameters must be >= 2".into()));
    }
    if band.min(depth) < 1 {
        return Err(Error::InvalidParameter("DL window needs band and depth >= 1".into()));
    }
    let (lo, hi) = (-(band as i64), depth as i64);
    let mut size: usize = 0;
    for t in -(band.min(depth) as i64)..=band.min(depth) as i64 {
        let n1 = (p as usize).saturating_pow((hi - t) as u32);
        let n2 = (q as usize).saturating_pow((hi + t) as u32);
        size = size.saturating_add(n1.saturating_mul(n2));
    }
    if size > MAX_WINDOW_VERTICES {
        return Err(Error::InvalidParameter(format!("DL window of {size} vertices is too large")));
    }
    let tree1 = tree_window(p + 1, lo, hi, depth)?;
    let tree2 = tree_window(q + 1, lo, hi, depth)?;

    let mut by_level: BTreeMap<i64, Vec<VertexId>> = BTreeMap::new();
    for v in tree2.graph().vertices() {
        by_level.entry(tree2.busemann(v)).or_default().push(v);
    }
    let mut coords = Vec::new();
    let mut index = BTreeMap::new();
    let mut labels = Vec::new();
    for v1 in tree1.graph().vertices() {
        let Some(partners) = by_level.get(&-tree1.busemann(v1)) else {
            continue;
        };
        for &v2 in partners {
            index.insert((v1, v2), coords.len() as VertexId);
            coords.push((v1, v2));
            let (l1, l2) = (tree1.graph().label(v1), tree2.graph().label(v2));
            let mut label = Vec::with_capacity(1 + l1.len() + l2.len());
            label.push(l1.len() as i64);
            label.extend_from_slice(l1);
            label.extend_from_slice(l2);
            labels.push(label);
        }
    }
    // every edge raises one coordinate and lowers the other; list it from the
    // endpoint whose first coordinate is lower
    let mut edges = Vec::new();
    for (v, &(v1, v2)) in coords.iter().enumerate() {
        let Some(up1) = tree1.parent(v1) else { continue };
        for &down2 in tree2.children(v2) {
            if let Some(&u) = index.get(&(up1, down2)) {
                edges.push((v as VertexId, u));
            }
        }
    }
    let basepoint = index[&(tree1.graph().basepoint(), tree2.graph().basepoint())];
    let trusted = band.min(depth) - 1;
    let graph = GraphWindow::new(labels, edges, basepoint, trusted)?.with_isometric(band >= depth);
    Ok(DlWindow {
        graph,
        p,
        q,
        tree1,
        tree2,
        coords,
        index,
    })
}

/// `V_{(o_1, o_2)}(r)`: pairs `(z_1, z_2)` with `z_1` a descendant of `o_1`
/// at depth `j` and `z_2` a descendant of `o_2` at depth `r - j`, for
/// `0 <= j <= r`. Requires `b(o_1) + b(o_2) = r`.
pub fn dl_vset(dw: &DlWindow, o1: VertexId, o2: VertexId, r: u32) -> Result<VertexSet> {
    dw.tree1.graph().check_vertex(o1)?;
    dw.tree2.graph().check_vertex(o2)?;
    if dw.tree1.busemann(o1) + dw.tree2.busemann(o2) != r as i64 {
        return Err(Error::Precondition(format!(
            "b(o1) + b(o2) = {} but r = {r}",
            dw.tree1.busemann(o1) + dw.tree2.busemann(o2)
        )));
    }
    if dw.tree1.depth_available(o1) < r || dw.tree2.depth_available(o2) < r {
        return Err(Error::Untrusted(format!("V-set of radius {r} leaves the window")));
    }
    let mut members = Vec::new();
    for j in 0..=r {
        let left = dw.tree1.descendants_at(o1, j);
        let right = dw.tree2.descendants_at(o2, r - j);
        for &z1 in &left {
            for &z2 in &right {
                let v = dw.vertex(z1, z2).ok_or_else(|| {
                    Error::Untrusted(format!("V-set point ({z1}, {z2}) is outside the window"))
                })?;
                members.push(v);
            }
        }
    }
    Ok(members.into_iter().collect())
}

/// `A_x(r) = V_{(x_1^r, x_2)}(r)` with `x_1^r` the `r`-th ancestor of `x_1`.
pub fn dl_persistent(dw: &DlWindow, x: VertexId, r: u32) -> Result<VertexSet> {
    dw.graph.check_vertex(x)?;
    if r == 0 {
        return Err(Error::InvalidParameter("DL persistent sets are indexed by r >= 1".into()));
    }
    let (x1, x2) = dw.coords(x);
    let o1 = dw
        .tree1
        .ancestor(x1, r)
        .ok_or_else(|| Error::Untrusted(format!("ancestor {r} of {x1} is outside the window")))?;
    let set = dl_vset(dw, o1, x2, r)?;
    assert_in_quadruple_ball(&dw.graph, x, r, &set)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_balance_and_edges_step() {
        let dw = dl_window(2, 2, 3, 3).unwrap();
        for v in dw.graph().vertices() {
            let (a, b) = dw.coords(v);
            assert_eq!(dw.tree1().busemann(a) + dw.tree2().busemann(b), 0);
            for &u in dw.graph().neighbours(v) {
                let (c, d) = dw.coords(u);
                assert_eq!(dw.tree1().tree_distance(a, c), 1);
                assert_eq!(dw.tree2().tree_distance(b, d), 1);
            }
        }
    }

    #[test]
    fn interior_degree_is_p_plus_q() {
        let dw = dl_window(2, 3, 3, 3).unwrap();
        assert_eq!(dw.graph().degree(dw.graph().basepoint()), 5);
    }

    #[test]
    fn persistent_set_size() {
        let dw = dl_window(2, 2, 4, 4).unwrap();
        let x = dw.graph().basepoint();
        for r in 1..=3u32 {
            assert_eq!(dl_persistent(&dw, x, r).unwrap().len(), (r as usize + 1) << r);
        }
    }

    #[test]
    fn rejects_radius_zero_and_bad_levels() {
        let dw = dl_window(2, 2, 2, 2).unwrap();
        let x = dw.graph().basepoint();
        assert!(matches!(dl_persistent(&dw, x, 0), Err(Error::InvalidParameter(_))));
        let (x1, x2) = dw.coords(x);
        assert!(matches!(dl_vset(&dw, x1, x2, 1), Err(Error::Precondition(_))));
    }
}
