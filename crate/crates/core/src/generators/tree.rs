use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Flagged, GraphWindow, VertexId, VertexSet};

use super::MAX_WINDOW_VERTICES;

/// A band of a regular tree below a point of the anchor ray, labelled by the
/// Busemann function `b` of that ray (ancestors have larger `b`).
///
/// The window is `T(top) ∩ {b >= b_min}` where `top` is the anchor vertex at
/// level `b_max`. Vertex labels are `[b, d_1, .., d_m]` with `d_i` the child
/// digits on the path from `top`; the anchor ray is the all-zero path.
#[derive(Debug, Clone)]
pub struct TreeWindow {
    graph: GraphWindow,
    valence: u32,
    b_min: i64,
    b_max: i64,
    busemann: Vec<i64>,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
}

impl TreeWindow {
    pub fn graph(&self) -> &GraphWindow {
        &self.graph
    }

    pub fn valence(&self) -> u32 {
        self.valence
    }

    /// Number of children per vertex.
    pub fn branching(&self) -> u32 {
        self.valence - 1
    }

    pub fn b_min(&self) -> i64 {
        self.b_min
    }

    pub fn b_max(&self) -> i64 {
        self.b_max
    }

    pub fn busemann(&self, v: VertexId) -> i64 {
        self.busemann[v as usize]
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v as usize]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v as usize]
    }

    /// The `k`-th ancestor `x̂^k`, if it lies in the window.
    pub fn ancestor(&self, x: VertexId, k: u32) -> Option<VertexId> {
        (0..k).try_fold(x, |v, _| self.parent(v))
    }

    /// The anchor-ray vertex at Busemann level `b`.
    pub fn anchor(&self, b: i64) -> Option<VertexId> {
        if b > self.b_max || b < self.b_min {
            return None;
        }
        let mut v = 0;
        for _ in b..self.b_max {
            v = self.children[v as usize][0];
        }
        Some(v)
    }

    /// How many levels below `x` the window still reaches.
    pub fn depth_available(&self, x: VertexId) -> u32 {
        (self.busemann(x) - self.b_min) as u32
    }

    /// Descendants of `x` exactly `j` levels down.
    pub fn descendants_at(&self, x: VertexId, j: u32) -> Vec<VertexId> {
        let mut level = alloc::vec![x];
        for _ in 0..j {
            level = level.iter().flat_map(|&v| self.children(v).iter().copied()).collect();
        }
        level
    }

    pub fn is_descendant(&self, z: VertexId, x: VertexId) -> bool {
        let gap = self.busemann(x) - self.busemann(z);
        gap >= 0 && self.ancestor(z, gap as u32) == Some(x)
    }

    /// Tree distance between two window vertices, through their meet.
    pub fn tree_distance(&self, a: VertexId, b: VertexId) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut d = 0;
        while self.busemann(a) < self.busemann(b) {
            a = self.parent(a).expect("window is a rooted subtree");
            d += 1;
        }
        while self.busemann(b) < self.busemann(a) {
            b = self.parent(b).expect("window is a rooted subtree");
            d += 1;
        }
        while a != b {
            a = self.parent(a).expect("window is a rooted subtree");
            b = self.parent(b).expect("window is a rooted subtree");
            d += 2;
        }
        d
    }
}

/// Builds the band `T(top) ∩ {b_min <= b <= b_max}` of the `valence`-regular
/// tree. The basepoint is the anchor vertex `depth_below` levels under `top`.
pub fn tree_window(valence: u32, b_min: i64, b_max: i64, depth_below: u32) -> Result<TreeWindow> {
    if valence < 3 {
        return Err(Error::InvalidParameter("tree valence must be >= 3".into()));
    }
    if b_max <= b_min {
        return Err(Error::InvalidParameter("Busemann band needs b_max > b_min".into()));
    }
    let base_level = b_max - depth_below as i64;
    if base_level < b_min {
        return Err(Error::InvalidParameter("band too small to contain the basepoint".into()));
    }
    let q = (valence - 1) as usize;
    let height = (b_max - b_min) as u32;
    let mut size: usize = 0;
    let mut level_size: usize = 1;
    for _ in 0..=height {
        size = size.saturating_add(level_size);
        level_size = level_size.saturating_mul(q);
    }
    if size > MAX_WINDOW_VERTICES {
        return Err(Error::InvalidParameter("tree window too large".into()));
    }

    let mut labels: Vec<Vec<i64>> = Vec::with_capacity(size);
    let mut busemann = Vec::with_capacity(size);
    let mut parent = Vec::with_capacity(size);
    let mut children: Vec<Vec<VertexId>> = Vec::with_capacity(size);
    let mut edges = Vec::with_capacity(size);
    labels.push(alloc::vec![b_max]);
    busemann.push(b_max);
    parent.push(None);
    children.push(Vec::new());
    let mut head = 0;
    while head < labels.len() {
        let b = busemann[head];
        if b > b_min {
            for digit in 0..q {
                let id = labels.len() as VertexId;
                let mut label = labels[head].clone();
                label[0] = b - 1;
                label.push(digit as i64);
                labels.push(label);
                busemann.push(b - 1);
                parent.push(Some(head as VertexId));
                children.push(Vec::new());
                children[head].push(id);
                edges.push((head as VertexId, id));
            }
        }
        head += 1;
    }

    let mut basepoint: VertexId = 0;
    for _ in 0..depth_below {
        basepoint = children[basepoint as usize][0];
    }
    let trusted_radius = depth_below.min((base_level - b_min) as u32);
    let graph = GraphWindow::new(labels, edges, basepoint, trusted_radius)?.with_isometric(true);
    Ok(TreeWindow {
        graph,
        valence,
        b_min,
        b_max,
        busemann,
        parent,
        children,
    })
}

/// The part of `T(x)` (the component of `{b <= b(x)}` containing `x`) lying
/// at most `depth` levels below `x`; flagged untrusted when the window is
/// shallower than that.
pub fn tree_below(tw: &TreeWindow, x: VertexId, depth: u32) -> Result<Flagged<VertexSet>> {
    tw.graph.check_vertex(x)?;
    let mut members = Vec::new();
    for j in 0..=depth {
        members.extend(tw.descendants_at(x, j));
    }
    Ok(Flagged::new(members.into_iter().collect(), tw.depth_available(x) >= depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ball, sphere};

    #[test]
    fn binary_branching_and_busemann_steps() {
        let tw = tree_window(3, -3, 0, 0).unwrap();
        for v in tw.graph().vertices() {
            if tw.busemann(v) > -3 {
                assert_eq!(tw.children(v).len(), 2);
            }
            for &u in tw.graph().neighbours(v) {
                assert_eq!((tw.busemann(u) - tw.busemann(v)).abs(), 1);
            }
        }
    }

    #[test]
    fn ancestor_raises_busemann() {
        let tw = tree_window(3, -4, 2, 3).unwrap();
        let x = tw.descendants_at(tw.graph().basepoint(), 2)[3];
        let a = tw.ancestor(x, 2).unwrap();
        assert_eq!(tw.busemann(a), tw.busemann(x) + 2);
        assert!(tw.is_descendant(x, a));
    }

    #[test]
    fn subtree_slices_are_powers_of_two() {
        let tw = tree_window(3, -5, 0, 0).unwrap();
        let x = tw.graph().basepoint();
        for k in 0..=5 {
            assert_eq!(tw.descendants_at(x, k).len(), 1 << k);
        }
        assert_eq!(tree_below(&tw, x, 0).unwrap().value, VertexSet::singleton(x));
        assert_eq!(tree_below(&tw, x, 2).unwrap().value.len(), 7);
        assert!(!tree_below(&tw, x, 6).unwrap().trusted);
    }

    #[test]
    fn siblings_have_disjoint_subtrees() {
        let tw = tree_window(3, -4, 0, 0).unwrap();
        let kids = tw.children(0);
        let a = tree_below(&tw, kids[0], 3).unwrap().value;
        let b = tree_below(&tw, kids[1], 3).unwrap().value;
        assert!(a.is_disjoint(&b));
    }

    #[test]
    fn interior_spheres_match_regular_tree() {
        let tw = tree_window(3, -4, 4, 4).unwrap();
        let x = tw.graph().basepoint();
        assert_eq!(tw.graph().trusted_radius(), 4);
        assert_eq!(ball(tw.graph(), x, 2).unwrap().value.len(), 10);
        for r in 1..=4 {
            let s = sphere(tw.graph(), x, r).unwrap();
            assert!(s.trusted);
            assert_eq!(s.value.len(), 3 * (1 << (r - 1)));
        }
    }

    #[test]
    fn rejects_bad_bands() {
        assert!(tree_window(2, 0, 3, 0).is_err());
        assert!(tree_window(3, 3, 3, 0).is_err());
        assert!(tree_window(3, 0, 3, 4).is_err());
    }
}
