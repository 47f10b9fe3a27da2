use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{GraphWindow, VertexId, VertexSet};

use super::{assert_in_quadruple_ball, TreeWindow, MAX_WINDOW_VERTICES};

/// The L1 product of two windows. Vertex `(i, j)` has id `i * n2 + j` and
/// label `[len(label_i), label_i.., label_j..]`.
#[derive(Debug, Clone)]
pub struct ProductWindow {
    graph: GraphWindow,
    right_len: usize,
}

impl ProductWindow {
    pub fn graph(&self) -> &GraphWindow {
        &self.graph
    }

    pub fn pair(&self, v: VertexId) -> (VertexId, VertexId) {
        let v = v as usize;
        ((v / self.right_len) as VertexId, (v % self.right_len) as VertexId)
    }

    pub fn id(&self, left: VertexId, right: VertexId) -> VertexId {
        (left as usize * self.right_len + right as usize) as VertexId
    }
}

/// Builds `w1 × w2` with edges changing one coordinate by one step. The
/// trusted radius is the smaller of the two; the product is isometric when
/// both factors are.
pub fn product_window(w1: &GraphWindow, w2: &GraphWindow) -> Result<ProductWindow> {
    let (n1, n2) = (w1.len(), w2.len());
    if n1.saturating_mul(n2) > MAX_WINDOW_VERTICES {
        return Err(Error::InvalidParameter(format!("product of {n1} x {n2} vertices is too large")));
    }
    let id = |a: VertexId, b: VertexId| (a as usize * n2 + b as usize) as VertexId;
    let mut labels = Vec::with_capacity(n1 * n2);
    for a in w1.vertices() {
        for b in w2.vertices() {
            let (la, lb) = (w1.label(a), w2.label(b));
            let mut label = Vec::with_capacity(1 + la.len() + lb.len());
            label.push(la.len() as i64);
            label.extend_from_slice(la);
            label.extend_from_slice(lb);
            labels.push(label);
        }
    }
    let mut edges = Vec::new();
    for (a, a2) in w1.edges() {
        for b in w2.vertices() {
            edges.push((id(a, b), id(a2, b)));
        }
    }
    for a in w1.vertices() {
        for (b, b2) in w2.edges() {
            edges.push((id(a, b), id(a, b2)));
        }
    }
    let basepoint = id(w1.basepoint(), w2.basepoint());
    let trusted = w1.trusted_radius().min(w2.trusted_radius());
    let graph = GraphWindow::new(labels, edges, basepoint, trusted)?
        .with_isometric(w1.is_isometric() && w2.is_isometric());
    Ok(ProductWindow { graph, right_len: n2 })
}

/// Two tree windows and their L1 product.
#[derive(Debug, Clone)]
pub struct TreeProduct {
    pub left: TreeWindow,
    pub right: TreeWindow,
    pub product: ProductWindow,
}

impl TreeProduct {
    pub fn new(left: TreeWindow, right: TreeWindow) -> Result<Self> {
        let product = product_window(left.graph(), right.graph())?;
        Ok(Self { left, right, product })
    }

    pub fn graph(&self) -> &GraphWindow {
        self.product.graph()
    }

    /// The product vertex over the two tree basepoints.
    pub fn basepoint(&self) -> VertexId {
        self.graph().basepoint()
    }
}

/// `A_x(k) = (T(x_1) × T(x_2)) ∩ (S(x, k-1) ∪ S(x, k))`.
///
/// The subtrees below `x_i` are convex, so the set only needs `k` levels of
/// each tree under `x`; anything shallower is reported as untrusted.
pub fn tree_annulus(tp: &TreeProduct, x: VertexId, k: u32) -> Result<VertexSet> {
    tp.graph().check_vertex(x)?;
    let (x1, x2) = tp.product.pair(x);
    if tp.left.depth_available(x1) < k || tp.right.depth_available(x2) < k {
        return Err(Error::Untrusted(format!("annulus of radius {k} at {x} leaves the window")));
    }
    let mut members = Vec::new();
    for total in [k.checked_sub(1), Some(k)].into_iter().flatten() {
        for j in 0..=total {
            let left = tp.left.descendants_at(x1, j);
            let right = tp.right.descendants_at(x2, total - j);
            for &a in &left {
                for &b in &right {
                    members.push(tp.product.id(a, b));
                }
            }
        }
    }
    let set: VertexSet = members.into_iter().collect();
    assert_in_quadruple_ball(tp.graph(), x, k, &set)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::tree_window;
    use crate::graph::{distance, sphere, Distance};

    fn cycle(n: u32) -> GraphWindow {
        let labels = (0..n).map(|i| alloc::vec![i as i64]).collect();
        let edges = (0..n).map(|i| (i, (i + 1) % n));
        GraphWindow::new(labels, edges, 0, n).unwrap().with_isometric(true)
    }

    #[test]
    fn torus_is_four_regular() {
        let pw = product_window(&cycle(4), &cycle(4)).unwrap();
        assert_eq!(pw.graph().len(), 16);
        assert!(pw.graph().vertices().all(|v| pw.graph().degree(v) == 4));
        let v = pw.id(1, 2);
        assert_eq!(pw.pair(v), (1, 2));
    }

    #[test]
    fn product_distance_is_l1() {
        let pw = product_window(&cycle(5), &cycle(6)).unwrap();
        let a = pw.id(0, 0);
        let b = pw.id(2, 3);
        assert_eq!(distance(pw.graph(), a, b).unwrap(), Distance::Finite(5));
    }

    fn binary_product(depth: u32) -> TreeProduct {
        let t = tree_window(3, -(depth as i64), 0, 0).unwrap();
        TreeProduct::new(t.clone(), t).unwrap()
    }

    #[test]
    fn annulus_sizes() {
        let tp = binary_product(3);
        let x = tp.basepoint();
        for k in 1..=3u32 {
            let a = tree_annulus(&tp, x, k).unwrap();
            let outer = sphere(tp.graph(), x, k).unwrap().value;
            assert_eq!(a.intersection_len(&outer), (k as usize + 1) << k);
            assert!(a.len() <= (k as usize + 1) << (k + 1));
            assert_eq!(a.len(), ((k as usize) << (k - 1)) + ((k as usize + 1) << k));
        }
    }

    #[test]
    fn annulus_needs_depth() {
        let tp = binary_product(2);
        assert!(matches!(tree_annulus(&tp, tp.basepoint(), 3), Err(Error::Untrusted(_))));
    }

    #[test]
    fn radius_zero_annulus_is_the_point() {
        let tp = binary_product(1);
        let x = tp.basepoint();
        assert_eq!(tree_annulus(&tp, x, 0).unwrap(), VertexSet::singleton(x));
    }
}
