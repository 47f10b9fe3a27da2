use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{bounded_bfs, neighbourhood, window_growth, Flagged, GraphWindow, VertexSet};

use super::set_trusted;

/// Greedy maximal `ε`-separated subset of `A`, scanning `A` in id order.
/// Both net properties (pairwise distance `> ε` and `A ⊆ Z^{+ε}`) are
/// re-checked before returning.
pub fn separated_net(w: &GraphWindow, a: &VertexSet, eps: u32) -> Result<Flagged<VertexSet>> {
    if eps == 0 {
        return Err(Error::InvalidParameter("net scale must be >= 1".into()));
    }
    w.check_set(a)?;
    let mut net: Vec<u32> = Vec::new();
    let mut covered = VertexSet::new();
    for x in a.iter() {
        if covered.contains(x) {
            continue;
        }
        net.push(x);
        let ball: VertexSet = bounded_bfs(w, &[x], eps).into_keys().collect();
        covered = covered.union(&ball);
    }
    let z = VertexSet::from_sorted_unchecked(net);
    if !verify_net(w, a, &z, eps)? {
        return Err(Error::Structure(format!("greedy net at scale {eps} failed verification")));
    }
    Ok(Flagged::new(z, set_trusted(w, a, eps)))
}

/// Whether `z ⊆ a` is `ε`-separated and `ε`-dense in `a`.
pub fn verify_net(w: &GraphWindow, a: &VertexSet, z: &VertexSet, eps: u32) -> Result<bool> {
    if !z.is_subset(a) {
        return Ok(false);
    }
    if a.is_empty() {
        return Ok(z.is_empty());
    }
    for x in z.iter() {
        let near = bounded_bfs(w, &[x], eps);
        if z.iter().any(|y| y != x && near.contains_key(&y)) {
            return Ok(false);
        }
    }
    if z.is_empty() {
        return Ok(false);
    }
    Ok(a.is_subset(&neighbourhood(w, z, eps)?))
}

/// Both sides of `(1/α)|B| <= ν(B^{+ε} ∩ Z) <= α|B|` with `α = β_X(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sandwich {
    pub set_size: usize,
    pub net_mass: usize,
    pub alpha: usize,
    pub trusted: bool,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.set_size <= self.alpha * self.net_mass && self.net_mass <= self.alpha * self.set_size
    }
}

/// Evaluates the volume comparison between `B ⊆ A` and the net `Z`, with
/// counting measure on `Z`.
pub fn net_sandwich(w: &GraphWindow, z: &VertexSet, b: &VertexSet, eps: u32) -> Result<Sandwich> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let thick = neighbourhood(w, b, eps)?;
    let alpha = window_growth(w, eps);
    Ok(Sandwich {
        set_size: b.len(),
        net_mass: thick.intersection_len(z),
        alpha: alpha.value,
        trusted: alpha.trusted && set_trusted(w, b, 2 * eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> GraphWindow {
        let labels = (0..n).map(|i| alloc::vec![i as i64]).collect();
        GraphWindow::new(labels, (1..n).map(|i| (i - 1, i)), 0, n)
            .unwrap()
            .with_isometric(true)
    }

    #[test]
    fn path_net_alternates() {
        let p = path(5);
        let z = separated_net(&p, &p.all_vertices(), 1).unwrap().value;
        assert_eq!(z.as_slice(), &[0, 2, 4]);
    }

    #[test]
    fn large_scale_gives_one_point() {
        let p = path(5);
        let z = separated_net(&p, &p.all_vertices(), 4).unwrap().value;
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn sandwich_on_a_path() {
        let p = path(9);
        let a = p.all_vertices();
        let z = separated_net(&p, &a, 2).unwrap().value;
        let b: VertexSet = [3, 4].into_iter().collect();
        let s = net_sandwich(&p, &z, &b, 2).unwrap();
        assert_eq!(s.alpha, 5);
        assert!(s.holds());
    }

    #[test]
    fn verify_rejects_crowded_sets() {
        let p = path(5);
        let z: VertexSet = [0, 1, 4].into_iter().collect();
        assert!(!verify_net(&p, &p.all_vertices(), &z, 1).unwrap());
        let z: VertexSet = [0].into_iter().collect();
        assert!(!verify_net(&p, &p.all_vertices(), &z, 1).unwrap());
    }
}
