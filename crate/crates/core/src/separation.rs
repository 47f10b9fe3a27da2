//! Persistent families, coarse-separation witnesses and the path-scanning
//! argument that turns a separating set into a cut of some member of a
//! persistent family.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::generators::{dl_persistent, thickened_sphere, tree_annulus, DlWindow, TreeProduct};
use crate::graph::{
    ball, bfs_distances, bounded_bfs, k_components, neighbourhood, set_is_trusted, Distance, GraphWindow, VertexId,
    VertexSet,
};
use crate::invariants::is_cut;
use crate::Rational;

type Generator<'a> = Box<dyn Fn(VertexId, u32) -> Result<VertexSet> + 'a>;

/// An indexed family `{A_x(r)}` with its claimed persistence constant `α`,
/// coarse constant `k` and least admissible scale `r_0`.
pub struct PersistentFamily<'a> {
    pub name: String,
    window: &'a GraphWindow,
    generator: Generator<'a>,
    pub alpha: Rational,
    pub k: u32,
    pub r0: u32,
}

impl core::fmt::Debug for PersistentFamily<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PersistentFamily")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("k", &self.k)
            .field("r0", &self.r0)
            .finish()
    }
}

impl<'a> PersistentFamily<'a> {
    pub fn new(
        name: impl Into<String>,
        window: &'a GraphWindow,
        alpha: Rational,
        k: u32,
        r0: u32,
        generator: impl Fn(VertexId, u32) -> Result<VertexSet> + 'a,
    ) -> Self {
        Self {
            name: name.into(),
            window,
            generator: Box::new(generator),
            alpha,
            k,
            r0,
        }
    }

    pub fn window(&self) -> &'a GraphWindow {
        self.window
    }

    /// `A_x(r)`; refuses scales below `r_0` and balls that leave the trusted
    /// region.
    pub fn set(&self, x: VertexId, r: u32) -> Result<VertexSet> {
        if r < self.r0 {
            return Err(Error::InvalidParameter(format!("scale {r} is below r0 = {}", self.r0)));
        }
        (self.generator)(x, r)
    }

    /// Balls `B(x, r)` in a vertex-transitive graph of valence `d`, claimed
    /// `1/(d+1)`-persistent. The valence is read off the basepoint.
    pub fn balls(w: &'a GraphWindow) -> Self {
        let d = w.degree(w.basepoint()) as i64;
        Self::new("balls", w, Rational::new(1, d + 1), 1, 1, move |x, r| {
            let b = ball(w, x, r)?;
            if !b.trusted {
                return Err(Error::Untrusted(format!("ball of radius {r} at {x}")));
            }
            Ok(b.value)
        })
    }

    /// `S(x, r)^{+t}` for `r >= t`, claimed `1/|B(t)|`-persistent.
    pub fn thickened_spheres(w: &'a GraphWindow, t: u32) -> Result<Self> {
        let bt = ball(w, w.basepoint(), t)?;
        if !bt.trusted {
            return Err(Error::Untrusted(format!("ball of radius {t} at the basepoint")));
        }
        let alpha = Rational::new(1, bt.value.len() as i64);
        Ok(Self::new("thickened-spheres", w, alpha, 1, t.max(1), move |x, r| {
            let s = thickened_sphere(w, x, r, t)?;
            if !s.trusted {
                return Err(Error::Untrusted(format!("thickened sphere of radius {r} at {x}")));
            }
            Ok(s.value)
        }))
    }

    /// The annuli `A_x(k)` of a product of two trees, claimed `1/8`-persistent.
    pub fn tree_annuli(tp: &'a TreeProduct) -> Self {
        Self::new("tree-annuli", tp.graph(), Rational::new(1, 8), 1, 1, move |x, r| {
            tree_annulus(tp, x, r)
        })
    }

    /// The sets `V_{(x_1^r, x_2)}(r)` of a Diestel–Leader graph, claimed
    /// `1/4`-persistent.
    pub fn dl_sets(dw: &'a DlWindow) -> Self {
        Self::new("dl-sets", dw.graph(), Rational::new(1, 4), 1, 1, move |x, r| {
            dl_persistent(dw, x, r)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PersistenceViolation {
    /// A point of `A_x(r)` lies outside `B(x, 4r)`.
    Containment { x: VertexId, r: u32, point: VertexId },
    /// Two members of the same scale differ in size.
    Size { x: VertexId, y: VertexId, r: u32, sizes: (usize, usize) },
    /// A `k`-close pair overlaps by less than `α |A(r)|`.
    Overlap { x: VertexId, y: VertexId, r: u32, ratio: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistenceReport {
    pub family: String,
    pub alpha: Rational,
    /// Smallest `|A_x(r) ∩ A_y(r)| / |A_x(r)|` over the checked pairs.
    pub worst_ratio: Option<Rational>,
    pub worst_pair: Option<(VertexId, VertexId, u32)>,
    pub pairs_checked: usize,
    pub sizes: BTreeMap<u32, usize>,
    pub violations: Vec<PersistenceViolation>,
}

impl PersistenceReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the three persistence conditions over all `radii` and every pair
/// of distinct `probes` at window distance at most `k`.
///
/// Every member is produced by the family's generator, which refuses sets
/// it cannot compute exactly; containment and closeness are decided with
/// window distances, which never undercut ambient ones.
pub fn persistence_check(fam: &PersistentFamily<'_>, radii: &[u32], probes: &[VertexId]) -> Result<PersistenceReport> {
    let w = fam.window;
    let mut report = PersistenceReport {
        family: fam.name.clone(),
        alpha: fam.alpha,
        worst_ratio: None,
        worst_pair: None,
        pairs_checked: 0,
        sizes: BTreeMap::new(),
        violations: Vec::new(),
    };
    let mut probes = probes.to_vec();
    probes.sort_unstable();
    probes.dedup();
    let close: Vec<BTreeMap<VertexId, u32>> = probes.iter().map(|&x| bounded_bfs(w, &[x], fam.k)).collect();
    for &r in radii {
        let mut sets = Vec::with_capacity(probes.len());
        for &x in &probes {
            let a = fam.set(x, r)?;
            let reach = bounded_bfs(w, &[x], 4 * r);
            if let Some(point) = a.iter().find(|v| !reach.contains_key(v)) {
                report.violations.push(PersistenceViolation::Containment { x, r, point });
            }
            sets.push(a);
        }
        if let Some(first) = sets.first() {
            report.sizes.insert(r, first.len());
            for (i, s) in sets.iter().enumerate().skip(1) {
                if s.len() != first.len() {
                    report.violations.push(PersistenceViolation::Size {
                        x: probes[0],
                        y: probes[i],
                        r,
                        sizes: (first.len(), s.len()),
                    });
                }
            }
        }
        for i in 0..probes.len() {
            for j in i + 1..probes.len() {
                if !close[i].contains_key(&probes[j]) {
                    continue;
                }
                report.pairs_checked += 1;
                let size = sets[i].len().max(sets[j].len());
                if size == 0 {
                    continue;
                }
                let ratio = Rational::new(sets[i].intersection_len(&sets[j]) as i64, size as i64);
                if report.worst_ratio.is_none_or(|w| ratio < w) {
                    report.worst_ratio = Some(ratio);
                    report.worst_pair = Some((probes[i], probes[j], r));
                }
                if ratio < fam.alpha {
                    report.violations.push(PersistenceViolation::Overlap {
                        x: probes[i],
                        y: probes[j],
                        r,
                        ratio,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// A window with a candidate separating set `S` and constants `k`, `L`, `D`.
#[derive(Debug, Clone)]
pub struct SeparationInstance<'a> {
    pub window: &'a GraphWindow,
    pub separator: VertexSet,
    pub k: u32,
    pub thickening: u32,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationVerdict {
    /// `k`-coarse components of `window \ S^{+L}`.
    pub components: Vec<VertexSet>,
    /// Indices of the components containing a point at distance `>= D`
    /// from `S`.
    pub qualifying: Vec<usize>,
    /// At least two qualifying components.
    pub separates: bool,
    /// Whether the `(L + D)`-neighbourhood of `S` lies in the trusted region.
    pub trusted: bool,
}

/// Components of `window \ S^{+L}` under `k`-coarse equivalence, and those
/// reaching distance `D` from `S`.
pub fn separation_witness(inst: &SeparationInstance<'_>) -> Result<SeparationVerdict> {
    let w = inst.window;
    if inst.k == 0 {
        return Err(Error::InvalidParameter("coarse constant k must be >= 1".into()));
    }
    w.check_set(&inst.separator)?;
    let (thick, dist) = if inst.separator.is_empty() {
        (VertexSet::new(), alloc::vec![Distance::Infinite; w.len()])
    } else {
        let thick = neighbourhood(w, &inst.separator, inst.thickening)?;
        let reach = bounded_bfs(w, inst.separator.as_slice(), u32::MAX);
        let mut dist = alloc::vec![Distance::Infinite; w.len()];
        for (v, d) in reach {
            dist[v as usize] = Distance::Finite(d);
        }
        (thick, dist)
    };
    let rest = w.all_vertices().difference(&thick);
    let components = if rest.is_empty() {
        Vec::new()
    } else {
        k_components(w, &rest, inst.k)?
    };
    let far = |v: VertexId| match dist[v as usize] {
        Distance::Infinite => true,
        Distance::Finite(d) => d >= inst.depth,
    };
    let qualifying: Vec<usize> = components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().any(far))
        .map(|(i, _)| i)
        .collect();
    let trusted = w.is_isometric() || set_is_trusted(w, &inst.separator, inst.thickening + inst.depth);
    Ok(SeparationVerdict {
        separates: qualifying.len() >= 2,
        components,
        qualifying,
        trusted,
    })
}

/// A partition `(X_i)` of `window \ S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub separator: VertexSet,
    pub parts: Vec<VertexSet>,
    /// Whether the parts are the `k`-coarse components of `window \ S`.
    pub from_components: bool,
    pub k: u32,
}

impl Partition {
    pub fn k_components(w: &GraphWindow, separator: VertexSet, k: u32) -> Result<Self> {
        let rest = w.all_vertices().difference(&separator);
        let parts = if rest.is_empty() {
            Vec::new()
        } else {
            k_components(w, &rest, k)?
        };
        Ok(Self {
            separator,
            parts,
            from_components: true,
            k,
        })
    }

    /// A user partition; it must cover `window \ S` with disjoint parts. It
    /// is not checked against the coarse-component setting, so no cut is
    /// certified from it.
    pub fn custom(w: &GraphWindow, separator: VertexSet, parts: Vec<VertexSet>, k: u32) -> Result<Self> {
        let mut covered = separator.clone();
        let total: usize = parts.iter().map(VertexSet::len).sum::<usize>() + separator.len();
        for p in &parts {
            w.check_set(p)?;
            covered = covered.union(p);
        }
        if covered.len() != w.len() || total != w.len() {
            return Err(Error::InvalidParameter("parts and separator must partition the window".into()));
        }
        Ok(Self {
            separator,
            parts,
            from_components: false,
            k,
        })
    }
}

/// Outcome of the path scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanCertificate {
    /// First index `s >= 1` with `|A_s ∩ X_{i0}| < δ |A|`.
    pub s: usize,
    pub centre: VertexId,
    pub set: VertexSet,
    pub part: usize,
    pub delta: Rational,
    /// `|A_{s-1} ∩ X_{i0}|` and `|A_s ∩ X_{i0}|`.
    pub before: usize,
    pub after: usize,
    /// `|A_{s-1} ∩ X_{i0}| >= δ|A| > |A_s ∩ X_{i0}|`.
    pub ratio_system: bool,
    /// `|A_s ∩ X_i| <= δ |A|` for every part.
    pub parts_within: bool,
    /// `A_s ∩ S`, and whether it was re-checked to be a `(k, δ)`-cut of `A_s`.
    pub cut: VertexSet,
    pub cut_certified: bool,
}

/// A geodesic from `x` to `y` in the window, preferring smaller ids.
pub fn geodesic_path(w: &GraphWindow, x: VertexId, y: VertexId) -> Result<Vec<VertexId>> {
    let from_y = bfs_distances(w, y)?;
    let Distance::Finite(mut left) = from_y[x as usize] else {
        return Err(Error::Precondition(format!("{y} is unreachable from {x}")));
    };
    let mut path = alloc::vec![x];
    let mut v = x;
    while left > 0 {
        v = *w
            .neighbours(v)
            .iter()
            .find(|&&u| from_y[u as usize] == Distance::Finite(left - 1))
            .expect("a neighbour lies one step closer");
        path.push(v);
        left -= 1;
    }
    Ok(path)
}

/// Moves `A_{x_p}(r)` along the `k`-path and stops at the first member that
/// no longer has a `δ` share in the part that held the start. `δ` defaults
/// to `1 - α/2`.
pub fn scan_for_cut(
    fam: &PersistentFamily<'_>,
    path: &[VertexId],
    partition: &Partition,
    delta: Option<Rational>,
    r: u32,
) -> Result<ScanCertificate> {
    let w = fam.window;
    if path.len() < 2 {
        return Err(Error::Precondition("the path needs at least two points".into()));
    }
    for pair in path.windows(2) {
        if !bounded_bfs(w, &[pair[0]], fam.k).contains_key(&pair[1]) {
            return Err(Error::Precondition(format!(
                "path points {} and {} are more than {} apart",
                pair[0], pair[1], fam.k
            )));
        }
    }
    let one = Rational::from_integer(1);
    let delta = delta.unwrap_or(one - fam.alpha / 2);
    if delta <= Rational::zero() || delta >= one {
        return Err(Error::InvalidParameter("delta must lie in (0, 1)".into()));
    }
    let first = fam.set(path[0], r)?;
    let size = Rational::from_integer(first.len() as i64);
    let threshold = delta * size;
    let share = |a: &VertexSet, part: usize| a.intersection_len(&partition.parts[part]);
    let i0 = (0..partition.parts.len())
        .find(|&i| Rational::from_integer(share(&first, i) as i64) >= threshold)
        .ok_or_else(|| Error::Precondition(format!("no part holds δ|A| = {threshold} of the starting set")))?;
    let last = fam.set(*path.last().expect("nonempty"), r)?;
    if last.len() != first.len() {
        return Err(Error::Precondition("family members differ in size along the path".into()));
    }
    if Rational::from_integer(share(&last, i0) as i64) >= threshold {
        return Err(Error::Precondition(format!(
            "the final set still has {} >= δ|A| = {threshold} points in part {i0}",
            share(&last, i0)
        )));
    }
    let mut previous = first;
    for (s, &x) in path.iter().enumerate().skip(1) {
        let current = fam.set(x, r)?;
        if current.len() != previous.len() {
            return Err(Error::Precondition(format!("family members differ in size at step {s}")));
        }
        let after = share(&current, i0);
        if Rational::from_integer(after as i64) < threshold {
            let before = share(&previous, i0);
            let parts_within = (0..partition.parts.len())
                .all(|i| Rational::from_integer(share(&current, i) as i64) <= threshold);
            let cut = current.intersection(&partition.separator);
            let cut_certified = partition.from_components && is_cut(w, &current, &cut, partition.k, delta)?;
            return Ok(ScanCertificate {
                s,
                centre: x,
                part: i0,
                delta,
                before,
                after,
                ratio_system: Rational::from_integer(before as i64) >= threshold,
                parts_within,
                cut,
                cut_certified,
                set: current,
            });
        }
        previous = current;
    }
    unreachable!("the last point was checked to fall below the threshold")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid_window, tree_window};

    #[test]
    fn grid_balls_are_persistent() {
        let g = grid_window(2, 6).unwrap();
        let fam = PersistentFamily::balls(&g);
        assert_eq!(fam.alpha, Rational::new(1, 5));
        let probes: Vec<VertexId> = ball(&g, g.basepoint(), 1).unwrap().value.into_vec();
        let rep = persistence_check(&fam, &[1, 2, 3], &probes).unwrap();
        assert!(rep.passes(), "{rep:?}");
        assert!(rep.worst_ratio.unwrap() >= Rational::new(1, 5));
        assert_eq!(rep.sizes[&2], 13);
    }

    #[test]
    fn oversized_family_fails_containment() {
        let g = grid_window(2, 8).unwrap();
        let fam = PersistentFamily::new("too-big", &g, Rational::new(1, 5), 1, 1, |x, r| {
            Ok(ball(&g, x, 4 * r + 1)?.value)
        });
        let rep = persistence_check(&fam, &[1], &[g.basepoint()]).unwrap();
        assert!(matches!(rep.violations[0], PersistenceViolation::Containment { .. }));
    }

    #[test]
    fn axis_separates_the_plane() {
        let g = grid_window(2, 12).unwrap();
        let axis: VertexSet = g.vertices().filter(|&v| g.label(v)[0] == 0).collect();
        let inst = SeparationInstance {
            window: &g,
            separator: axis,
            k: 1,
            thickening: 0,
            depth: 8,
        };
        let v = separation_witness(&inst).unwrap();
        assert_eq!(v.qualifying.len(), 2);
        assert!(v.separates && v.trusted);
        let all = SeparationInstance {
            separator: g.all_vertices(),
            ..inst
        };
        assert!(separation_witness(&all).unwrap().components.is_empty());
    }

    #[test]
    fn ball_separates_tree_branches() {
        let tw = tree_window(3, -6, 6, 6).unwrap();
        let g = tw.graph();
        let inst = SeparationInstance {
            window: g,
            separator: ball(g, g.basepoint(), 1).unwrap().value,
            k: 1,
            thickening: 0,
            depth: 4,
        };
        assert!(separation_witness(&inst).unwrap().qualifying.len() >= 3);
    }

    #[test]
    fn scan_across_the_axis() {
        let g = grid_window(2, 12).unwrap();
        let idx = g.label_index();
        let axis: VertexSet = g.vertices().filter(|&v| g.label(v)[0] == 0).collect();
        let part = Partition::k_components(&g, axis, 1).unwrap();
        let fam = PersistentFamily::balls(&g);
        let path = geodesic_path(&g, idx[&[-4i64, 0][..]], idx[&[4i64, 0][..]]).unwrap();
        let cert = scan_for_cut(&fam, &path, &part, None, 2).unwrap();
        assert_eq!(g.label(cert.centre), &[-1, 0]);
        assert!(cert.parts_within && cert.cut_certified && cert.ratio_system);
        assert_eq!(cert.cut.len(), 3);
    }

    #[test]
    fn scan_reports_failed_hypotheses() {
        let g = grid_window(2, 12).unwrap();
        let idx = g.label_index();
        let axis: VertexSet = g.vertices().filter(|&v| g.label(v)[0] == 0).collect();
        let part = Partition::k_components(&g, axis, 1).unwrap();
        let fam = PersistentFamily::balls(&g);
        let path = geodesic_path(&g, idx[&[-6i64, 0][..]], idx[&[-4i64, 0][..]]).unwrap();
        assert!(matches!(scan_for_cut(&fam, &path, &part, None, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn single_step_scan() {
        let g = grid_window(1, 10).unwrap();
        let idx = g.label_index();
        let sep = VertexSet::singleton(idx[&[0i64][..]]);
        let part = Partition::k_components(&g, sep, 1).unwrap();
        let fam = PersistentFamily::new("points", &g, Rational::new(1, 2), 1, 0, |x, _| Ok(VertexSet::singleton(x)));
        let path = [idx[&[-1i64][..]], idx[&[0i64][..]]];
        let cert = scan_for_cut(&fam, &path, &part, None, 0).unwrap();
        assert_eq!(cert.s, 1);
    }
}
