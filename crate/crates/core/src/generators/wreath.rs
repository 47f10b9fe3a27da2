use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{GraphWindow, VertexId};
use crate::group::FiniteGroup;

use super::MAX_WINDOW_VERTICES;

/// The base of a wreath product: `Z` with integer generators, or a finite
/// group with its designated generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseGroup {
    Integers { generators: Vec<i64> },
    Finite(FiniteGroup),
}

impl BaseGroup {
    /// `Z` generated by `±1`.
    pub fn integers() -> Self {
        BaseGroup::Integers {
            generators: alloc::vec![-1, 1],
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let BaseGroup::Integers { generators } = self {
            if generators.is_empty() {
                return Err(Error::InvalidParameter("Z needs at least one generator".into()));
            }
            for &g in generators {
                if g == 0 {
                    return Err(Error::InvalidParameter("generating set contains the identity".into()));
                }
                if !generators.contains(&-g) {
                    return Err(Error::InvalidParameter(format!("generating set is not symmetric at {g}")));
                }
            }
        }
        Ok(())
    }

    pub fn identity(&self) -> i64 {
        match self {
            BaseGroup::Integers { .. } => 0,
            BaseGroup::Finite(g) => g.identity() as i64,
        }
    }

    pub fn generators(&self) -> Vec<i64> {
        match self {
            BaseGroup::Integers { generators } => generators.clone(),
            BaseGroup::Finite(g) => g.generators().iter().map(|&s| s as i64).collect(),
        }
    }

    pub fn mul(&self, a: i64, b: i64) -> i64 {
        match self {
            BaseGroup::Integers { .. } => a + b,
            BaseGroup::Finite(g) => g.mul(a as u32, b as u32) as i64,
        }
    }
}

/// Lamp group, base group and radius of a Cayley ball of `A ≀ B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WreathBallSpec {
    pub lamp: FiniteGroup,
    pub base: BaseGroup,
    pub radius: u32,
}

/// An element `(f, x)`: the finitely supported lamp configuration `f`
/// (non-identity values only) and the base position `x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WreathElement {
    pub lamps: BTreeMap<i64, u32>,
    pub position: i64,
}

impl WreathElement {
    pub fn identity(base: &BaseGroup) -> Self {
        Self {
            lamps: BTreeMap::new(),
            position: base.identity(),
        }
    }

    /// Right multiplication by the lamp generator `a` at the current position.
    pub fn toggle(&self, lamp: &FiniteGroup, a: u32) -> Self {
        let mut next = self.clone();
        let cur = next.lamps.get(&self.position).copied().unwrap_or(lamp.identity());
        let value = lamp.mul(cur, a);
        if value == lamp.identity() {
            next.lamps.remove(&self.position);
        } else {
            next.lamps.insert(self.position, value);
        }
        next
    }

    /// Right multiplication by the base generator `t`.
    pub fn shift(&self, base: &BaseGroup, t: i64) -> Self {
        Self {
            lamps: self.lamps.clone(),
            position: base.mul(self.position, t),
        }
    }

    /// Label `[position, p_1, a_1, p_2, a_2, ..]`.
    pub fn label(&self) -> Vec<i64> {
        let mut label = alloc::vec![self.position];
        for (&p, &a) in &self.lamps {
            label.push(p);
            label.push(a as i64);
        }
        label
    }
}

/// A wreath-product Cayley ball with its element table.
#[derive(Debug, Clone)]
pub struct WreathWindow {
    graph: GraphWindow,
    elements: Vec<WreathElement>,
    index: BTreeMap<WreathElement, VertexId>,
}

impl WreathWindow {
    pub fn graph(&self) -> &GraphWindow {
        &self.graph
    }

    pub fn element(&self, v: VertexId) -> &WreathElement {
        &self.elements[v as usize]
    }

    pub fn vertex(&self, e: &WreathElement) -> Option<VertexId> {
        self.index.get(e).copied()
    }

    /// Word length, which is the BFS layer of the vertex.
    pub fn word_length(&self, v: VertexId) -> u32 {
        self.graph.depth(v).finite().expect("ball is connected")
    }
}

/// The ball of radius `R` about the identity in `A ≀ B` with generators the
/// lamp generators at the current position together with the base
/// generators. Vertices are numbered in BFS order.
pub fn wreath_ball(spec: &WreathBallSpec) -> Result<WreathWindow> {
    spec.base.validate()?;
    let shifts = spec.base.generators();
    let start = WreathElement::identity(&spec.base);
    let mut elements = alloc::vec![start.clone()];
    let mut index = BTreeMap::from([(start, 0 as VertexId)]);
    let mut edges = Vec::new();
    let mut frontier = alloc::vec![0 as VertexId];
    let mut complete = true;
    for layer in 0..=spec.radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let e = elements[v as usize].clone();
            let moves = spec
                .lamp
                .generators()
                .iter()
                .map(|&a| e.toggle(&spec.lamp, a))
                .chain(shifts.iter().map(|&t| e.shift(&spec.base, t)));
            for n in moves {
                match index.get(&n) {
                    Some(&u) => edges.push((v, u)),
                    None if layer < spec.radius => {
                        let u = elements.len() as VertexId;
                        index.insert(n.clone(), u);
                        elements.push(n);
                        edges.push((v, u));
                        next.push(u);
                        if elements.len() > MAX_WINDOW_VERTICES {
                            return Err(Error::InvalidParameter("wreath ball too large".into()));
                        }
                    }
                    None => complete = false,
                }
            }
        }
        frontier = next;
    }
    let labels = elements.iter().map(WreathElement::label).collect();
    let mut graph = GraphWindow::new(labels, edges, 0, spec.radius)?;
    if complete {
        // the whole (finite) group fits in the ball
        let n = graph.len() as u32;
        graph = GraphWindow::new(graph.labels().to_vec(), graph.edges().collect::<Vec<_>>(), 0, n)?
            .with_isometric(true);
    }
    Ok(WreathWindow { graph, elements, index })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lamplighter(radius: u32) -> WreathBallSpec {
        WreathBallSpec {
            lamp: FiniteGroup::cyclic_pm1(2),
            base: BaseGroup::integers(),
            radius,
        }
    }

    #[test]
    fn radius_zero_is_a_point() {
        assert_eq!(wreath_ball(&lamplighter(0)).unwrap().graph().len(), 1);
    }

    #[test]
    fn lamplighter_ball_of_radius_two() {
        let w = wreath_ball(&lamplighter(2)).unwrap();
        assert_eq!(w.graph().len(), 10);
        assert_eq!(wreath_ball(&lamplighter(1)).unwrap().graph().len(), 4);
    }

    #[test]
    fn neighbours_differ_in_one_coordinate() {
        let w = wreath_ball(&lamplighter(1)).unwrap();
        let id = w.element(0).clone();
        for &u in w.graph().neighbours(0) {
            let e = w.element(u);
            let lamp_changed = e.lamps != id.lamps;
            let moved = e.position != id.position;
            assert!(lamp_changed ^ moved);
        }
    }

    #[test]
    fn finite_wreath_is_whole_group() {
        let spec = WreathBallSpec {
            lamp: FiniteGroup::cyclic_pm1(2),
            base: BaseGroup::Finite(FiniteGroup::cyclic_pm1(2)),
            radius: 10,
        };
        let w = wreath_ball(&spec).unwrap();
        assert_eq!(w.graph().len(), 8);
        assert!(w.graph().is_isometric());
    }

    #[test]
    fn rejects_asymmetric_base_generators() {
        let spec = WreathBallSpec {
            base: BaseGroup::Integers { generators: alloc::vec![1] },
            ..lamplighter(1)
        };
        assert!(wreath_ball(&spec).is_err());
    }
}
