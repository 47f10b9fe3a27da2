use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::generators::{wreath_ball, BaseGroup, WreathBallSpec, WreathElement, WreathWindow, MAX_WINDOW_VERTICES};
use crate::graph::{GraphWindow, VertexId, VertexSet};
use crate::group::FiniteGroup;

use super::normal_form::{NormalForm, ProductStructure};

/// `A □_Γ B` where `Γ` is the Cayley graph of `B` for the offsets `gamma`.
/// Moves in the Cayley ball use the lamp generators at the current position
/// and the generators of `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialWreathSpec {
    pub lamp: FiniteGroup,
    pub base: BaseGroup,
    pub gamma: Vec<i64>,
    pub radius: u32,
}

impl PartialWreathSpec {
    /// `Γ` equal to the Cayley graph of the base generators.
    pub fn cayley(lamp: FiniteGroup, base: BaseGroup, radius: u32) -> Self {
        let gamma = base.generators();
        Self {
            lamp,
            base,
            gamma,
            radius,
        }
    }

    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let e = self.base.identity();
        for &s in &self.gamma {
            if s == e {
                return Err(Error::InvalidParameter("Γ would have loops".into()));
            }
            if !self.gamma.contains(&self.base_inv(s)) {
                return Err(Error::InvalidParameter(format!("Γ offsets are not symmetric at {s}")));
            }
            if let BaseGroup::Finite(g) = &self.base {
                if s < 0 || s as usize >= g.order() {
                    return Err(Error::UnknownGenerator(format!("{s}")));
                }
            }
        }
        Ok(())
    }

    fn base_inv(&self, b: i64) -> i64 {
        match &self.base {
            BaseGroup::Integers { .. } => -b,
            BaseGroup::Finite(g) => i64::from(g.inv(b as u32)),
        }
    }

    /// `b⁻¹c`.
    fn offset(&self, b: i64, c: i64) -> i64 {
        self.base.mul(self.base_inv(b), c)
    }
}

impl ProductStructure for PartialWreathSpec {
    fn group(&self, _u: i64) -> &FiniteGroup {
        &self.lamp
    }

    fn commute(&self, u: i64, v: i64) -> bool {
        u != v && self.gamma.contains(&self.offset(u, v))
    }
}

/// An element `(g, b)` with `g ∈ ΓA` and `b ∈ B`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PwElement {
    pub lamps: NormalForm,
    pub position: i64,
}

impl PwElement {
    /// `[b, u_1, a_1, ..]`.
    pub fn label(&self) -> Vec<i64> {
        let mut label = alloc::vec![self.position];
        label.extend(self.lamps.label());
        label
    }

    /// `π_Γ(g, b) = (g†, b)`.
    pub fn project(&self, spec: &PartialWreathSpec) -> WreathElement {
        let mut lamps: BTreeMap<i64, u32> = BTreeMap::new();
        for &(c, a) in self.lamps.syllables() {
            let cur = lamps.get(&c).copied().unwrap_or(spec.lamp.identity());
            let value = spec.lamp.mul(cur, a);
            if value == spec.lamp.identity() {
                lamps.remove(&c);
            } else {
                lamps.insert(c, value);
            }
        }
        WreathElement {
            lamps,
            position: self.position,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartialWreathWindow {
    graph: GraphWindow,
    elements: Vec<PwElement>,
    index: BTreeMap<PwElement, VertexId>,
    lamp_edges: BTreeSet<(VertexId, VertexId)>,
}

impl PartialWreathWindow {
    pub fn graph(&self) -> &GraphWindow {
        &self.graph
    }

    pub fn element(&self, v: VertexId) -> &PwElement {
        &self.elements[v as usize]
    }

    pub fn vertex(&self, e: &PwElement) -> Option<VertexId> {
        self.index.get(e).copied()
    }

    /// Whether the edge comes from a lamp generator (otherwise a base one).
    pub fn is_lamp_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.lamp_edges.contains(&(a.min(b), a.max(b)))
    }
}

/// The Cayley ball of radius `R` about the identity of `A □_Γ B`:
/// `(g, b)·s = (g s^b, b)` for lamp generators and `(g, b)·t = (g, bt)` for
/// base generators.
pub fn partial_wreath_ball(spec: &PartialWreathSpec) -> Result<PartialWreathWindow> {
    spec.validate()?;
    let start = PwElement {
        lamps: NormalForm::identity(),
        position: spec.base.identity(),
    };
    let shifts = spec.base.generators();
    let mut elements = alloc::vec![start.clone()];
    let mut index = BTreeMap::from([(start, 0 as VertexId)]);
    let mut edges = BTreeSet::new();
    let mut lamp_edges = BTreeSet::new();
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
                .map(|&s| {
                    let lamps = e.lamps.mul_syllable(spec, e.position, s);
                    (PwElement { lamps, position: e.position }, true)
                })
                .chain(shifts.iter().map(|&t| {
                    let position = spec.base.mul(e.position, t);
                    (PwElement { lamps: e.lamps.clone(), position }, false)
                }));
            for (n, lamp) in moves {
                let target = match index.get(&n) {
                    Some(&u) => u,
                    None if layer < spec.radius => {
                        if elements.len() >= MAX_WINDOW_VERTICES {
                            return Err(Error::BudgetExceeded(MAX_WINDOW_VERTICES));
                        }
                        let u = elements.len() as VertexId;
                        index.insert(n.clone(), u);
                        elements.push(n);
                        next.push(u);
                        u
                    }
                    None => {
                        complete = false;
                        continue;
                    }
                };
                let key = (v.min(target), v.max(target));
                edges.insert(key);
                if lamp {
                    lamp_edges.insert(key);
                }
            }
        }
        frontier = next;
    }
    let labels = elements.iter().map(PwElement::label).collect();
    let n = elements.len() as u32;
    let graph = if complete {
        GraphWindow::new(labels, edges, 0, n)?.with_isometric(true)
    } else {
        GraphWindow::new(labels, edges, 0, spec.radius)?
    };
    Ok(PartialWreathWindow {
        graph,
        elements,
        index,
        lamp_edges,
    })
}

/// A pointed clique `(rep·A_b, g)` of `QM(Γ, A)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct PointedClique {
    vertex: i64,
    rep: NormalForm,
    mark: NormalForm,
}

/// Outcome of comparing the Cayley ball of `A □_Γ B` with the ball of the
/// graph of pointed cliques.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IsoVerdict {
    pub cayley_vertices: usize,
    pub pc_vertices: usize,
    pub cayley_edges: usize,
    pub pc_edges: usize,
    pub unmatched_vertices: usize,
    pub unmatched_edges: usize,
    pub kind_mismatches: usize,
    /// Candidate cliques through a vertex that the prism test rejected.
    pub rejected_rotations: usize,
    pub basepoint_ok: bool,
}

impl IsoVerdict {
    pub fn passes(&self) -> bool {
        self.basepoint_ok
            && self.cayley_vertices == self.pc_vertices
            && self.cayley_edges == self.pc_edges
            && self.unmatched_vertices == 0
            && self.unmatched_edges == 0
            && self.kind_mismatches == 0
    }
}

/// Builds the ball of radius `R` about `(A_e, 1)` in the graph of pointed
/// cliques of `QM(Γ, A)` with the coherent word metrics, and checks that
/// `(g, b) ↦ (g⟨b⟩, g)` is a basepoint-preserving isomorphism from the
/// Cayley ball of `A □_Γ B`, sending lamp edges to slides and base edges to
/// rotations.
///
/// Rotations are found geometrically: two cliques through `g` span a prism
/// iff every pair of their other points has a second common neighbour.
/// Candidate cliques are those of the `B`-vertices within two steps.
pub fn pc_iso_check(spec: &PartialWreathSpec) -> Result<IsoVerdict> {
    let mut shifts = spec.base.generators();
    let mut gamma = spec.gamma.clone();
    shifts.sort_unstable();
    shifts.dedup();
    gamma.sort_unstable();
    gamma.dedup();
    if shifts != gamma {
        return Err(Error::Precondition("the base generators must be the edges of Γ".into()));
    }
    let cayley = partial_wreath_ball(spec)?;
    let (pc, pc_edges, rejected) = pc_ball(spec, &shifts)?;

    let mut verdict = IsoVerdict {
        cayley_vertices: cayley.graph.len(),
        pc_vertices: pc.len(),
        cayley_edges: cayley.graph.edge_count(),
        pc_edges: pc_edges.len(),
        rejected_rotations: rejected,
        ..IsoVerdict::default()
    };
    let image = |e: &PwElement| -> PointedClique {
        let (rep, _) = e.lamps.split_at(spec, e.position);
        PointedClique {
            vertex: e.position,
            rep,
            mark: e.lamps.clone(),
        }
    };
    let mut phi = Vec::with_capacity(cayley.elements.len());
    for e in &cayley.elements {
        match pc.get(&image(e)) {
            Some(&i) => phi.push(Some(i)),
            None => {
                verdict.unmatched_vertices += 1;
                phi.push(None);
            }
        }
    }
    verdict.basepoint_ok = phi[0] == Some(0);
    let distinct: BTreeSet<usize> = phi.iter().flatten().copied().collect();
    verdict.unmatched_vertices += phi.iter().flatten().count() - distinct.len();
    for (a, b) in cayley.graph.edges() {
        let (Some(x), Some(y)) = (phi[a as usize], phi[b as usize]) else {
            verdict.unmatched_edges += 1;
            continue;
        };
        match pc_edges.get(&(x.min(y), x.max(y))) {
            None => verdict.unmatched_edges += 1,
            Some(&slide) if slide != cayley.is_lamp_edge(a, b) => verdict.kind_mismatches += 1,
            Some(_) => {}
        }
    }
    Ok(verdict)
}

type PcBall = (BTreeMap<PointedClique, usize>, BTreeMap<(usize, usize), bool>, usize);

/// BFS in the graph of pointed cliques; edges carry `true` for slides.
fn pc_ball(spec: &PartialWreathSpec, shifts: &[i64]) -> Result<PcBall> {
    let lamp = &spec.lamp;
    let start = PointedClique {
        vertex: spec.base.identity(),
        rep: NormalForm::identity(),
        mark: NormalForm::identity(),
    };
    let mut index = BTreeMap::from([(start.clone(), 0usize)]);
    let mut order = alloc::vec![start];
    let mut edges = BTreeMap::new();
    let mut rejected = 0;
    let mut frontier = alloc::vec![0usize];
    for layer in 0..=spec.radius {
        let mut next = Vec::new();
        for &i in &frontier {
            let pcl = order[i].clone();
            let mut moves = Vec::new();
            // slides: points of the same clique at δ_C-distance one
            let (_, r) = pcl.mark.split_at(spec, pcl.vertex);
            for s in lamp.elements() {
                if lamp.word_length(lamp.mul(lamp.inv(r), s)) == 1 {
                    let mark = pcl.rep.mul_syllable(spec, pcl.vertex, s);
                    moves.push((
                        PointedClique {
                            vertex: pcl.vertex,
                            rep: pcl.rep.clone(),
                            mark,
                        },
                        true,
                    ));
                }
            }
            // rotations: cliques through the mark spanning a prism with ours
            for c in candidates(spec, pcl.vertex, shifts) {
                if spans_prism(spec, &pcl.mark, pcl.vertex, c) {
                    let (rep, _) = pcl.mark.split_at(spec, c);
                    moves.push((
                        PointedClique {
                            vertex: c,
                            rep,
                            mark: pcl.mark.clone(),
                        },
                        false,
                    ));
                } else {
                    rejected += 1;
                }
            }
            for (q, slide) in moves {
                let j = match index.get(&q) {
                    Some(&j) => j,
                    None if layer < spec.radius => {
                        if order.len() >= MAX_WINDOW_VERTICES {
                            return Err(Error::BudgetExceeded(MAX_WINDOW_VERTICES));
                        }
                        let j = order.len();
                        index.insert(q.clone(), j);
                        order.push(q);
                        next.push(j);
                        j
                    }
                    None => continue,
                };
                edges.insert((i.min(j), i.max(j)), slide);
            }
        }
        frontier = next;
    }
    Ok((index, edges, rejected))
}

/// `B`-vertices other than `b` within two steps of `b`, counting both the
/// base generators and the edges of `Γ` as steps.
fn candidates(spec: &PartialWreathSpec, b: i64, shifts: &[i64]) -> Vec<i64> {
    let steps: BTreeSet<i64> = shifts.iter().chain(&spec.gamma).copied().collect();
    let mut out = BTreeSet::new();
    match &spec.base {
        BaseGroup::Finite(g) => out.extend(g.elements().map(i64::from)),
        BaseGroup::Integers { .. } => {
            for &s in &steps {
                let c = spec.base.mul(b, s);
                out.insert(c);
                for &t in &steps {
                    out.insert(spec.base.mul(c, t));
                }
            }
        }
    }
    out.remove(&b);
    out.into_iter().collect()
}

/// Whether the cliques `g A_b` and `g A_c` span a prism in `QM(Γ, A)`: for
/// all `x = g·a` and `y = g·a'` (`a, a' ≠ 1`) the pair `x, y` is at distance
/// two with a common neighbour besides `g`.
fn spans_prism(spec: &PartialWreathSpec, g: &NormalForm, b: i64, c: i64) -> bool {
    let lamp = &spec.lamp;
    for a in lamp.non_identity() {
        let x = g.mul_syllable(spec, b, a);
        for a2 in lamp.non_identity() {
            let y = g.mul_syllable(spec, c, a2);
            let step = x.inverse(spec).mul(spec, &y);
            if step.len() != 2 {
                return false;
            }
            // the other common neighbour would be g·a'·a
            let z = y.mul_syllable(spec, b, a);
            let from_x = x.inverse(spec).mul(spec, &z);
            let from_y = y.inverse(spec).mul(spec, &z);
            if z == *g || from_x.len() != 1 || from_y.len() != 1 {
                return false;
            }
        }
    }
    true
}

/// Comparison of the Cayley ball of `A □_Γ B` with the `A ≀ B` ball of the
/// same radius under `π_Γ`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectionReport {
    pub partial_vertices: usize,
    pub wreath_vertices: usize,
    /// Every vertex of the wreath ball is an image.
    pub surjective: bool,
    pub injective: bool,
    /// Edges whose image is neither an edge nor a point.
    pub lipschitz_violations: usize,
    /// Vertices whose image is farther from the identity than they are.
    pub length_violations: usize,
    /// Wreath edges between images that are not images of edges.
    pub extra_edges: usize,
}

impl ProjectionReport {
    /// `π_Γ` restricts to a surjective, distance non-increasing map of balls.
    pub fn is_contraction(&self) -> bool {
        self.surjective && self.lipschitz_violations == 0 && self.length_violations == 0
    }

    /// `π_Γ` restricts to an isomorphism of balls.
    pub fn is_isomorphism(&self) -> bool {
        self.is_contraction() && self.injective && self.extra_edges == 0
    }
}

pub fn projection_check(spec: &PartialWreathSpec) -> Result<(ProjectionReport, PartialWreathWindow, WreathWindow)> {
    let partial = partial_wreath_ball(spec)?;
    let wreath = wreath_ball(&WreathBallSpec {
        lamp: spec.lamp.clone(),
        base: spec.base.clone(),
        radius: spec.radius,
    })?;
    let mut rep = ProjectionReport {
        partial_vertices: partial.graph.len(),
        wreath_vertices: wreath.graph().len(),
        ..ProjectionReport::default()
    };
    let mut image = Vec::with_capacity(partial.elements.len());
    for (v, e) in partial.elements.iter().enumerate() {
        let p = wreath.vertex(&e.project(spec));
        match p {
            Some(p) if wreath.word_length(p) <= partial.graph.depth(v as VertexId).finite().unwrap_or(0) => {}
            _ => rep.length_violations += 1,
        }
        image.push(p);
    }
    let hit: BTreeSet<VertexId> = image.iter().flatten().copied().collect();
    rep.surjective = hit.len() == wreath.graph().len();
    rep.injective = hit.len() == image.len() && image.iter().all(Option::is_some);
    let mut mapped = BTreeSet::new();
    for (a, b) in partial.graph.edges() {
        match (image[a as usize], image[b as usize]) {
            (Some(x), Some(y)) if x == y => {}
            (Some(x), Some(y)) if wreath.graph().is_adjacent(x, y) => {
                mapped.insert((x.min(y), x.max(y)));
            }
            _ => rep.lipschitz_violations += 1,
        }
    }
    rep.extra_edges = wreath
        .graph()
        .edges()
        .filter(|&(x, y)| hit.contains(&x) && hit.contains(&y) && !mapped.contains(&(x.min(y), x.max(y))))
        .count();
    Ok((rep, partial, wreath))
}

/// `ℬ(E, c) = {(f, x) : x ∈ E, f = c off E}` materialised in a wreath ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BSet {
    pub support: Vec<i64>,
    pub colouring: BTreeMap<i64, u32>,
    pub vertices: VertexSet,
}

pub fn bset(e: &[i64], c: &BTreeMap<i64, u32>, lamp: &FiniteGroup, w: &WreathWindow) -> Result<BSet> {
    let mut support = e.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.is_empty() {
        return Err(Error::EmptySet);
    }
    let outside: BTreeMap<i64, u32> = c
        .iter()
        .filter(|(p, &a)| support.binary_search(p).is_err() && a != lamp.identity())
        .map(|(&p, &a)| (p, a))
        .collect();
    let order = lamp.order() as u64;
    let count = order
        .checked_pow(support.len() as u32)
        .filter(|&n| n as usize <= MAX_WINDOW_VERTICES)
        .ok_or(Error::BudgetExceeded(MAX_WINDOW_VERTICES))?;
    let mut vertices = Vec::new();
    for code in 0..count {
        let mut lamps = outside.clone();
        let mut rest = code;
        for &p in &support {
            let a = (rest % order) as u32;
            rest /= order;
            if a != lamp.identity() {
                lamps.insert(p, a);
            }
        }
        for &x in &support {
            let el = WreathElement {
                lamps: lamps.clone(),
                position: x,
            };
            let v = w
                .vertex(&el)
                .ok_or_else(|| Error::Untrusted(format!("ℬ(E, c) leaves the window at {:?}", el.label())))?;
            vertices.push(v);
        }
    }
    vertices.sort_unstable();
    Ok(BSet {
        support,
        colouring: c.clone(),
        vertices: VertexSet::from_sorted_unchecked(vertices),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> FiniteGroup {
        FiniteGroup::cyclic_pm1(2)
    }

    #[test]
    fn line_partial_wreath_matches_pointed_cliques() {
        for r in 1..=3 {
            let spec = PartialWreathSpec::cayley(z2(), BaseGroup::integers(), r);
            let v = pc_iso_check(&spec).unwrap();
            assert!(v.passes(), "{v:?}");
            assert!(v.rejected_rotations > 0);
        }
    }

    #[test]
    fn complete_gamma_is_the_wreath_product() {
        let spec = PartialWreathSpec::cayley(z2(), BaseGroup::Finite(FiniteGroup::cyclic_pm1(3)), 3);
        let (rep, _, _) = projection_check(&spec).unwrap();
        assert!(rep.is_isomorphism(), "{rep:?}");
        assert!(pc_iso_check(&spec).unwrap().passes());
    }

    #[test]
    fn projection_onto_the_lamplighter_contracts() {
        for r in 1..=4 {
            let spec = PartialWreathSpec::cayley(z2(), BaseGroup::integers(), r);
            let (rep, _, _) = projection_check(&spec).unwrap();
            assert!(rep.is_contraction(), "{rep:?}");
        }
    }

    #[test]
    fn edgeless_gamma_first_differs_at_radius_four() {
        let sizes = |r| {
            let spec = PartialWreathSpec {
                lamp: z2(),
                base: BaseGroup::integers(),
                gamma: Vec::new(),
                radius: r,
            };
            let (rep, _, _) = projection_check(&spec).unwrap();
            (rep.partial_vertices, rep.wreath_vertices)
        };
        let (p3, w3) = sizes(3);
        assert_eq!(p3, w3);
        let (p4, w4) = sizes(4);
        assert!(p4 > w4);
    }

    #[test]
    fn bset_counts() {
        let spec = WreathBallSpec {
            lamp: z2(),
            base: BaseGroup::integers(),
            radius: 8,
        };
        let w = wreath_ball(&spec).unwrap();
        let b = bset(&[0], &BTreeMap::new(), &spec.lamp, &w).unwrap();
        assert_eq!(b.vertices.len(), 2);
        assert!(b.vertices.contains(0));
        let b = bset(&[0, 1], &BTreeMap::new(), &spec.lamp, &w).unwrap();
        assert_eq!(b.vertices.len(), 2 * 4);
        let far = bset(&[0, 9], &BTreeMap::new(), &spec.lamp, &w);
        assert!(matches!(far, Err(Error::Untrusted(_))));
    }
}
