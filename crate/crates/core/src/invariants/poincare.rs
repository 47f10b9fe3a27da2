use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_integer::Integer;
use num_traits::{CheckedMul, Signed, ToPrimitive, Zero};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Distance, GraphWindow, VertexId, VertexSet};
use crate::Rational;

use super::{InvariantKind, InvariantReport, Method, Parameters, Witness};

/// Largest number of points for which the exact value is computed.
pub const EXACT_POINCARE_CAP: usize = 20;
/// Largest number of points for which two-valued functions are enumerated.
const TWO_LEVEL_CAP: usize = 24;
const SAMPLED_TOLERANCE: f64 = 1e-9;

/// A finite metric space with a positive measure `(Z, d, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMeasureSet {
    points: Vec<VertexId>,
    distances: Vec<Vec<Distance>>,
    measure: Vec<Rational>,
}

impl MetricMeasureSet {
    /// Validates that `distances` is a metric (allowing infinite distances)
    /// and that `measure` is positive.
    pub fn new(points: Vec<VertexId>, distances: Vec<Vec<Distance>>, measure: Vec<Rational>) -> Result<Self> {
        let n = points.len();
        if distances.len() != n || distances.iter().any(|row| row.len() != n) || measure.len() != n {
            return Err(Error::InvalidParameter("metric measure data has inconsistent sizes".into()));
        }
        if measure.iter().any(|m| *m <= Rational::zero()) {
            return Err(Error::InvalidParameter("measure must be positive".into()));
        }
        for i in 0..n {
            if distances[i][i] != Distance::Finite(0) {
                return Err(Error::InvalidParameter(format!("d(p{i}, p{i}) is not zero")));
            }
            for j in 0..n {
                if distances[i][j] != distances[j][i] {
                    return Err(Error::InvalidParameter("distances are not symmetric".into()));
                }
                if i != j && distances[i][j] == Distance::Finite(0) {
                    return Err(Error::InvalidParameter("distinct points at distance zero".into()));
                }
                for m in 0..n {
                    if let (Distance::Finite(a), Distance::Finite(b)) = (distances[i][m], distances[m][j]) {
                        if !distances[i][j].is_within(a + b) {
                            return Err(Error::InvalidParameter("triangle inequality fails".into()));
                        }
                    }
                }
            }
        }
        Ok(Self {
            points,
            distances,
            measure,
        })
    }

    /// `A` with window distances and counting measure.
    pub fn from_window(w: &GraphWindow, a: &VertexSet) -> Result<Self> {
        w.check_set(a)?;
        let mut distances = Vec::with_capacity(a.len());
        for x in a.iter() {
            let d = bfs_distances(w, x)?;
            distances.push(a.iter().map(|y| d[y as usize]).collect());
        }
        Self::new(a.as_slice().to_vec(), distances, alloc::vec![Rational::from_integer(1); a.len()])
    }

    pub fn with_measure(self, measure: Vec<Rational>) -> Result<Self> {
        Self::new(self.points, self.distances, measure)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[VertexId] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> Distance {
        self.distances[i][j]
    }

    pub fn measure(&self) -> &[Rational] {
        &self.measure
    }

    fn balls(&self, k: u32) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|i| (0..self.len()).filter(|&j| self.distances[i][j].is_within(k)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoincareMode {
    /// Enumerate test functions only.
    Enumerate,
    /// Also run randomized mean-zero descent as a challenge.
    Sampled { starts: usize, seed: u64 },
}

/// `||∇_k f||_1 / ||f||_1` evaluated directly, where
/// `|∇_k f|(x) = max_{y, y' ∈ B(x, k)} |f(y) - f(y')|`.
pub fn gradient_norm(ms: &MetricMeasureSet, k: u32, f: &[Rational]) -> Result<Rational> {
    if f.len() != ms.len() {
        return Err(Error::InvalidParameter("function has the wrong number of values".into()));
    }
    let mean: Rational = f.iter().zip(&ms.measure).map(|(v, m)| v * m).sum();
    if !mean.is_zero() {
        return Err(Error::InvalidParameter("function does not have mean zero".into()));
    }
    let norm: Rational = f.iter().zip(&ms.measure).map(|(v, m)| v.abs() * m).sum();
    if norm.is_zero() {
        return Err(Error::InvalidParameter("function is identically zero".into()));
    }
    let mut grad = Rational::zero();
    for (i, ball) in ms.balls(k).iter().enumerate() {
        let hi = ball.iter().map(|&j| f[j]).max().expect("ball contains its centre");
        let lo = ball.iter().map(|&j| f[j]).min().expect("ball contains its centre");
        grad += (hi - lo) * ms.measure[i];
    }
    Ok(grad / norm)
}

/// The L1-Poincaré constant at scale `k`.
///
/// By the coarea formula `||∇_k f||_1 = ∫ φ({f > t}) dt`, where `φ(U)` is
/// the measure of the points whose `k`-ball meets both `U` and its
/// complement, while a mean-zero `f` has `||f||_1 = 2 ∫_{t>0} ν({f > t}) dt`.
/// Splitting at zero shows the infimum is
/// `min ½ (φ(P)/ν(P) + φ(N)/ν(N))` over disjoint nonempty `P`, `N`, attained
/// by `ν(N) 1_P - ν(P) 1_N`. That minimum is computed exactly for at most
/// [`EXACT_POINCARE_CAP`] points; larger sets get the two-valued upper bound.
pub fn poincare_l1(ms: &MetricMeasureSet, k: u32, mode: PoincareMode) -> Result<InvariantReport> {
    let n = ms.len();
    if n < 2 {
        return Err(Error::InvalidParameter("Poincaré constant needs at least two points".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("Poincaré scale k must be >= 1".into()));
    }
    if n > TWO_LEVEL_CAP {
        return Err(Error::CapExceeded {
            cap: TWO_LEVEL_CAP,
            size: n,
        });
    }
    let params = Parameters {
        k: Some(k),
        ..Parameters::default()
    };
    let weights = integer_weights(&ms.measure)?;
    let table = SubsetTable::new(&ms.balls(k), &weights);

    let method = match mode {
        PoincareMode::Enumerate => Method::Exhaustive,
        PoincareMode::Sampled { .. } => Method::Sampled,
    };
    let mut report = InvariantReport::new(InvariantKind::Poincare, params, method);

    let (two_value, two_set) = table.two_level();
    report.two_level = Some(two_value);
    let (value, f) = if n <= EXACT_POINCARE_CAP {
        let (value, pos, neg) = table.exact();
        report.exact = Some(value);
        report.lower = value;
        (value, table.function(pos, neg))
    } else {
        let full = (1u64 << n) - 1;
        (two_value, table.function(two_set, full & !two_set))
    };
    report.upper = value;
    let check = gradient_norm(ms, k, &f)?;
    if check != value {
        return Err(Error::Structure(format!("witness evaluates to {check}, expected {value}")));
    }
    report.witness = Witness::Function(f);

    if let PoincareMode::Sampled { starts, seed } = mode {
        let found = sampled_descent(ms, k, starts, seed);
        report.sampled_min = Some(found);
        let certified = value.to_f64().unwrap_or(f64::INFINITY);
        if found < certified - SAMPLED_TOLERANCE && report.exact.is_some() {
            return Err(Error::Structure(format!(
                "descent found {found} below the exact value {certified}"
            )));
        }
    }
    Ok(report)
}

/// Scales a rational measure to positive integers.
fn integer_weights(measure: &[Rational]) -> Result<Vec<i64>> {
    let lcm = measure.iter().fold(1i64, |acc, m| acc.lcm(m.denom()));
    measure
        .iter()
        .map(|m| {
            m.checked_mul(&Rational::from_integer(lcm))
                .map(|v| v.to_integer())
                .ok_or_else(|| Error::InvalidParameter("measure too large".into()))
        })
        .collect()
}

/// Ball masks and integer weights; `φ(U)` and `ν(U)` for subsets `U` given
/// as bit masks.
struct SubsetTable {
    n: usize,
    masks: Vec<u32>,
    weights: Vec<i64>,
}

fn cmp_ratio(a: (i64, i64), b: (i64, i64)) -> Ordering {
    (a.0 as i128 * b.1 as i128).cmp(&(b.0 as i128 * a.1 as i128))
}

impl SubsetTable {
    fn new(balls: &[Vec<usize>], weights: &[i64]) -> Self {
        let masks = balls.iter().map(|b| b.iter().fold(0u32, |m, &j| m | (1 << j))).collect();
        Self {
            n: weights.len(),
            masks,
            weights: weights.to_vec(),
        }
    }

    fn full(&self) -> usize {
        (1 << self.n) - 1
    }

    fn phi(&self, u: usize) -> i64 {
        let u = u as u32;
        self.masks
            .iter()
            .zip(&self.weights)
            .filter(|(&m, _)| m & u != 0 && m & !u != 0)
            .map(|(_, &w)| w)
            .sum()
    }

    fn nu(&self, u: usize) -> i64 {
        (0..self.n).filter(|&i| u >> i & 1 == 1).map(|i| self.weights[i]).sum()
    }

    /// Best `a 1_B + c` over all proper `B`: `φ(B) ν(Z) / (2 ν(B) ν(B^c))`.
    fn two_level(&self) -> (Rational, u64) {
        let full = self.full();
        let total = self.nu(full) as i128;
        let mut best: Option<(i128, i128, usize)> = None;
        // the value is symmetric under complement, so fix the last point outside B
        for b in 1..(1usize << (self.n - 1)) {
            let num = self.phi(b) as i128 * total;
            let den = 2 * self.nu(b) as i128 * self.nu(full & !b) as i128;
            let better = match best {
                None => true,
                Some((bn, bd, _)) => num * bd < bn * den,
            };
            if better {
                best = Some((num, den, b));
            }
        }
        let (num, den, b) = best.expect("at least two points");
        (reduce(num, den), b as u64)
    }

    /// `min ½ (φ(P)/ν(P) + ψ(Z \ P))` with `ψ(U) = min_{∅ ≠ N ⊆ U} φ(N)/ν(N)`
    /// computed by a subset-minimum sweep.
    fn exact(&self) -> (Rational, u64, u64) {
        let size = 1usize << self.n;
        let full = self.full();
        let mut phi = alloc::vec![0i64; size];
        let mut nu = alloc::vec![0i64; size];
        for u in 1..size {
            nu[u] = nu[u & (u - 1)] + self.weights[u.trailing_zeros() as usize];
            phi[u] = self.phi(u);
        }
        // best[U] = argmin over nonempty N ⊆ U of φ(N)/ν(N)
        let mut best = alloc::vec![0usize; size];
        for u in 1..size {
            best[u] = u;
        }
        for bit in 0..self.n {
            for u in 1..size {
                if u & (1 << bit) != 0 {
                    let v = u & !(1 << bit);
                    if v != 0 {
                        let cand = best[v];
                        let cur = best[u];
                        if cmp_ratio((phi[cand], nu[cand]), (phi[cur], nu[cur])) == Ordering::Less {
                            best[u] = cand;
                        }
                    }
                }
            }
        }
        let mut winner: Option<(i128, i128, usize, usize)> = None;
        for p in 1..full {
            let q = best[full & !p];
            // φ(P)/ν(P) + φ(Q)/ν(Q), over 2
            let num = phi[p] as i128 * nu[q] as i128 + phi[q] as i128 * nu[p] as i128;
            let den = 2 * nu[p] as i128 * nu[q] as i128;
            let better = match winner {
                None => true,
                Some((bn, bd, _, _)) => num * bd < bn * den,
            };
            if better {
                winner = Some((num, den, p, q));
            }
        }
        let (num, den, p, q) = winner.expect("at least two points");
        (reduce(num, den), p as u64, q as u64)
    }

    /// `ν(N) 1_P - ν(P) 1_N` in the original (unscaled) measure units.
    fn function(&self, pos: u64, neg: u64) -> Vec<Rational> {
        let (nu_p, nu_n) = (self.nu(pos as usize), self.nu(neg as usize));
        (0..self.n)
            .map(|i| {
                if pos >> i & 1 == 1 {
                    Rational::from_integer(nu_n)
                } else if neg >> i & 1 == 1 {
                    Rational::from_integer(-nu_p)
                } else {
                    Rational::zero()
                }
            })
            .collect()
    }
}

fn reduce(num: i128, den: i128) -> Rational {
    let g = num.gcd(&den).max(1);
    Rational::new((num / g) as i64, (den / g) as i64)
}

fn ratio_f64(balls: &[Vec<usize>], nu: &[f64], f: &[f64]) -> f64 {
    let mut grad = 0.0;
    let mut norm = 0.0;
    for (i, ball) in balls.iter().enumerate() {
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for &j in ball {
            hi = hi.max(f[j]);
            lo = lo.min(f[j]);
        }
        grad += nu[i] * (hi - lo);
        norm += nu[i] * f[i].abs();
    }
    if norm <= 0.0 {
        f64::INFINITY
    } else {
        grad / norm
    }
}

/// Random mean-zero starts improved by moving mass between pairs of points
/// (which keeps the mean at zero) with a shrinking step.
fn sampled_descent(ms: &MetricMeasureSet, k: u32, starts: usize, seed: u64) -> f64 {
    let n = ms.len();
    let balls = ms.balls(k);
    let nu: Vec<f64> = ms.measure.iter().map(|m| m.to_f64().unwrap_or(1.0)).collect();
    let total: f64 = nu.iter().sum();
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = f.iter().zip(&nu).map(|(v, m)| v * m).sum::<f64>() / total;
        for v in &mut f {
            *v -= mean;
        }
        let mut value = ratio_f64(&balls, &nu, &f);
        let mut step = 0.5;
        while step > 1e-6 {
            let mut improved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for dir in [1.0, -1.0] {
                        let t = dir * step;
                        let (fi, fj) = (f[i], f[j]);
                        f[i] += t / nu[i];
                        f[j] -= t / nu[j];
                        let candidate = ratio_f64(&balls, &nu, &f);
                        if candidate < value - 1e-15 {
                            value = candidate;
                            improved = true;
                        } else {
                            f[i] = fi;
                            f[j] = fj;
                        }
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        best = best.min(value);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> MetricMeasureSet {
        let d = alloc::vec![
            alloc::vec![Distance::Finite(0), Distance::Finite(1)],
            alloc::vec![Distance::Finite(1), Distance::Finite(0)],
        ];
        MetricMeasureSet::new(alloc::vec![0, 1], d, alloc::vec![Rational::from_integer(1); 2]).unwrap()
    }

    #[test]
    fn two_points_at_distance_one() {
        let rep = poincare_l1(&two_points(), 1, PoincareMode::Enumerate).unwrap();
        assert_eq!(rep.exact, Some(Rational::from_integer(2)));
        assert_eq!(rep.two_level, Some(Rational::from_integer(2)));
        let f = [Rational::from_integer(1), Rational::from_integer(-1)];
        assert_eq!(gradient_norm(&two_points(), 1, &f).unwrap(), Rational::from_integer(2));
    }

    #[test]
    fn zero_function_is_rejected() {
        let f = [Rational::zero(), Rational::zero()];
        assert!(gradient_norm(&two_points(), 1, &f).is_err());
    }

    #[test]
    fn rejects_non_metrics() {
        let d = alloc::vec![
            alloc::vec![Distance::Finite(0), Distance::Finite(5), Distance::Finite(1)],
            alloc::vec![Distance::Finite(5), Distance::Finite(0), Distance::Finite(1)],
            alloc::vec![Distance::Finite(1), Distance::Finite(1), Distance::Finite(0)],
        ];
        let ms = MetricMeasureSet::new(alloc::vec![0, 1, 2], d, alloc::vec![Rational::from_integer(1); 3]);
        assert!(ms.is_err());
        let ms = two_points().with_measure(alloc::vec![Rational::from_integer(1), Rational::zero()]);
        assert!(ms.is_err());
    }

    #[test]
    fn exact_never_exceeds_two_level() {
        // a path of six points: a three-valued function can beat two values
        let d: Vec<Vec<Distance>> = (0..6i64)
            .map(|i| (0..6i64).map(|j| Distance::Finite((i - j).unsigned_abs() as u32)).collect())
            .collect();
        let ms = MetricMeasureSet::new((0..6).collect(), d, alloc::vec![Rational::from_integer(1); 6]).unwrap();
        let rep = poincare_l1(&ms, 1, PoincareMode::Sampled { starts: 4, seed: 7 }).unwrap();
        assert!(rep.exact.unwrap() <= rep.two_level.unwrap());
        assert!(rep.sampled_min.unwrap() >= rep.exact.unwrap().to_f64().unwrap() - 1e-9);
    }

    #[test]
    fn weighted_measure_scales_consistently() {
        let ms = two_points()
            .with_measure(alloc::vec![Rational::new(1, 2), Rational::new(1, 3)])
            .unwrap();
        let rep = poincare_l1(&ms, 1, PoincareMode::Enumerate).unwrap();
        let Witness::Function(f) = &rep.witness else { panic!() };
        assert_eq!(gradient_norm(&ms, 1, f).unwrap(), rep.exact.unwrap());
        assert_eq!(rep.exact, Some(Rational::new(25, 12)));
        assert_eq!(rep.two_level, rep.exact);
    }
}
