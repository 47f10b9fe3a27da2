use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{window_growth, GraphWindow, VertexSet};
use crate::Rational;

use super::{closeness, set_trusted, InvariantKind, InvariantReport, Method, Parameters, Witness};

/// Largest `|A|` accepted by the exhaustive search unless overridden.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheegerMode {
    /// Every `B` with `0 < |B| <= |A|/2`; refuses sets larger than `cap`
    /// (at most 63).
    Exhaustive { cap: usize },
    /// Greedy growth of a nucleus from every seed; an upper bound only.
    Heuristic,
}

impl Default for CheegerMode {
    fn default() -> Self {
        CheegerMode::Exhaustive {
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

/// `h_r(A) = min |∂_r B ∩ A| / |B|` over `B ⊆ A` with `0 < |B| <= |A|/2`.
///
/// A one-point set has no admissible `B`; its constant is reported as zero.
pub fn cheeger(w: &GraphWindow, a: &VertexSet, r: u32, mode: CheegerMode) -> Result<InvariantReport> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if r == 0 {
        return Err(Error::InvalidParameter("Cheeger scale r must be >= 1".into()));
    }
    w.check_set(a)?;
    let params = Parameters {
        r: Some(r),
        ..Parameters::default()
    };
    let beta = window_growth(w, r);
    let close = closeness(w, a, r);
    let (value, witness, method) = match mode {
        CheegerMode::Exhaustive { cap } => {
            let cap = cap.min(63);
            if a.len() > cap {
                return Err(Error::CapExceeded { cap, size: a.len() });
            }
            let (v, b) = exhaustive(&close);
            (v, b, Method::Exhaustive)
        }
        CheegerMode::Heuristic => {
            let (v, b) = greedy(&close);
            (v, b, Method::Sweep)
        }
    };
    let mut report = InvariantReport::new(InvariantKind::Cheeger, params, method);
    report.trusted = set_trusted(w, a, r) && beta.trusted;
    report.beta = Some(beta.value);
    report.upper = value;
    if method == Method::Exhaustive {
        report.exact = Some(value);
        report.lower = value;
    }
    report.witness = Witness::Set(witness.into_iter().map(|i| a.as_slice()[i]).collect());
    Ok(report)
}

/// `(|∂_r B ∩ A|, |B|)` for `B` given by indices into `A`.
pub(crate) fn boundary_ratio(close: &[Vec<bool>], b: &[usize]) -> (usize, usize) {
    let n = close.len();
    let mut inside = alloc::vec![false; n];
    for &i in b {
        inside[i] = true;
    }
    let boundary = (0..n)
        .filter(|&j| !inside[j] && b.iter().any(|&i| close[i][j]))
        .count();
    (boundary, b.len())
}

fn less(a: (usize, usize), b: (usize, usize)) -> bool {
    ((a.0 as u128) * (b.1 as u128)).cmp(&((b.0 as u128) * (a.1 as u128))) == Ordering::Less
}

fn ratio(v: (usize, usize)) -> Rational {
    Rational::new(v.0 as i64, v.1 as i64)
}

/// Depth-first enumeration of all `B` in lexicographic order, carrying the
/// union of the members' `r`-balls as a bit mask.
fn exhaustive(close: &[Vec<bool>]) -> (Rational, Vec<usize>) {
    let n = close.len();
    let half = n / 2;
    if half == 0 {
        return (Rational::from_integer(0), Vec::new());
    }
    let masks: Vec<u64> = close
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, &c)| c).fold(0u64, |m, (j, _)| m | (1 << j)))
        .collect();
    struct Search<'a> {
        masks: &'a [u64],
        half: usize,
        best: (usize, usize),
        best_set: Vec<usize>,
        stack: Vec<usize>,
    }
    impl Search<'_> {
        fn go(&mut self, next: usize, members: u64, reach: u64) {
            for i in next..self.masks.len() {
                let members = members | (1 << i);
                let reach = reach | self.masks[i];
                self.stack.push(i);
                let value = ((reach & !members).count_ones() as usize, self.stack.len());
                if less(value, self.best) {
                    self.best = value;
                    self.best_set = self.stack.clone();
                }
                if self.stack.len() < self.half {
                    self.go(i + 1, members, reach);
                }
                self.stack.pop();
            }
        }
    }
    let mut s = Search {
        masks: &masks,
        half,
        best: (usize::MAX, 1),
        best_set: Vec::new(),
        stack: Vec::new(),
    };
    s.go(0, 0, 0);
    (ratio(s.best), s.best_set)
}

/// Grows a nucleus from each seed, always adding the member that keeps the
/// boundary smallest, and keeps the best prefix seen.
fn greedy(close: &[Vec<bool>]) -> (Rational, Vec<usize>) {
    let n = close.len();
    let half = n / 2;
    if half == 0 {
        return (Rational::from_integer(0), Vec::new());
    }
    let mut best = (usize::MAX, 1);
    let mut best_set = Vec::new();
    for seed in 0..n {
        let mut b = alloc::vec![seed];
        loop {
            let value = boundary_ratio(close, &b);
            if less(value, best) {
                best = value;
                let mut sorted = b.clone();
                sorted.sort_unstable();
                best_set = sorted;
            }
            if b.len() >= half {
                break;
            }
            let outside: Vec<usize> = (0..n).filter(|j| !b.contains(j)).collect();
            let next = outside
                .into_iter()
                .min_by_key(|&j| {
                    b.push(j);
                    let (boundary, _) = boundary_ratio(close, &b);
                    b.pop();
                    (boundary, j)
                })
                .expect("half < n leaves a candidate");
            b.push(next);
        }
    }
    (ratio(best), best_set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u32) -> GraphWindow {
        let labels = (0..n).map(|i| alloc::vec![i as i64]).collect();
        GraphWindow::new(labels, (0..n).map(|i| (i, (i + 1) % n)), 0, n)
            .unwrap()
            .with_isometric(true)
    }

    fn path(n: u32) -> GraphWindow {
        let labels = (0..n).map(|i| alloc::vec![i as i64]).collect();
        GraphWindow::new(labels, (1..n).map(|i| (i - 1, i)), 0, n)
            .unwrap()
            .with_isometric(true)
    }

    #[test]
    fn far_pair_has_zero_constant() {
        let p = path(6);
        let a: VertexSet = [0, 5].into_iter().collect();
        let rep = cheeger(&p, &a, 1, CheegerMode::default()).unwrap();
        assert_eq!(rep.exact, Some(Rational::from_integer(0)));
    }

    #[test]
    fn four_cycle_has_constant_one() {
        let c = cycle(4);
        let rep = cheeger(&c, &c.all_vertices(), 1, CheegerMode::default()).unwrap();
        assert_eq!(rep.exact, Some(Rational::from_integer(1)));
        assert_eq!(rep.beta, Some(3));
        assert!(rep.upper <= Rational::from_integer(3));
    }

    #[test]
    fn heuristic_bounds_exact_from_above() {
        let c = cycle(10);
        let all = c.all_vertices();
        let exact = cheeger(&c, &all, 1, CheegerMode::default()).unwrap();
        let heur = cheeger(&c, &all, 1, CheegerMode::Heuristic).unwrap();
        assert_eq!(exact.exact, Some(Rational::new(2, 5)));
        assert!(heur.upper >= exact.upper);
        assert_eq!(heur.exact, None);
    }

    #[test]
    fn cap_is_enforced() {
        let c = cycle(10);
        let err = cheeger(&c, &c.all_vertices(), 1, CheegerMode::Exhaustive { cap: 8 }).unwrap_err();
        assert_eq!(err, Error::CapExceeded { cap: 8, size: 10 });
    }

    #[test]
    fn singleton_has_no_admissible_subset() {
        let c = cycle(4);
        let rep = cheeger(&c, &VertexSet::singleton(0), 1, CheegerMode::default()).unwrap();
        assert_eq!(rep.exact, Some(Rational::from_integer(0)));
        assert_eq!(rep.witness, Witness::Set(VertexSet::new()));
    }
}
