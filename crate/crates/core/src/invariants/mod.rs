//! Separation invariants of finite subsets: scale-`r` Cheeger constants,
//! `(r, δ)`-cuts, L1-Poincaré constants and separated nets.
//!
//! Certified quantities are exact rationals. The only floating point in the
//! module is the randomized Poincaré descent, which challenges a certified
//! value but never produces one.

mod cheeger;
mod cut;
mod net;
mod poincare;

pub use cheeger::{cheeger, CheegerMode, DEFAULT_EXHAUSTIVE_CAP};
pub use cut::{cut, cut_lower_from_cheeger, is_cut, CutMode, DEFAULT_NODE_BUDGET};
pub use net::{net_sandwich, separated_net, verify_net, Sandwich};
pub use poincare::{gradient_norm, poincare_l1, MetricMeasureSet, PoincareMode, EXACT_POINCARE_CAP};

use alloc::vec::Vec;

use crate::graph::{local_distances, GraphWindow, VertexSet};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    Cheeger,
    Cut,
    Poincare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exhaustive,
    BranchAndBound,
    Sweep,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    None,
    Set(VertexSet),
    /// Function values, one per point of the metric measure set.
    Function(Vec<Rational>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Parameters {
    pub r: Option<u32>,
    pub delta: Option<Rational>,
    pub k: Option<u32>,
}

/// Result of an invariant computation. `lower <= exact <= upper` whenever
/// `exact` is present, and the witness attains `upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub kind: InvariantKind,
    pub params: Parameters,
    pub method: Method,
    pub exact: Option<Rational>,
    pub lower: Rational,
    pub upper: Rational,
    pub witness: Witness,
    /// Whether every distance the computation relied on is ambient-exact.
    pub trusted: bool,
    /// `β_X(r)`, the trivial upper bound on `h_r` (Cheeger and cut reports).
    pub beta: Option<usize>,
    /// `λ h_r(A) |A|` (cut reports).
    pub cheeger_lower: Option<Rational>,
    /// Best value over two-valued test functions (Poincaré reports).
    pub two_level: Option<Rational>,
    /// Smallest ratio found by randomized descent (Poincaré, sampled mode).
    pub sampled_min: Option<f64>,
    /// Search nodes expanded, when the method is a search.
    pub nodes: u64,
}

impl InvariantReport {
    pub(crate) fn new(kind: InvariantKind, params: Parameters, method: Method) -> Self {
        Self {
            kind,
            params,
            method,
            exact: None,
            lower: Rational::from_integer(0),
            upper: Rational::from_integer(0),
            witness: Witness::None,
            trusted: true,
            beta: None,
            cheeger_lower: None,
            two_level: None,
            sampled_min: None,
            nodes: 0,
        }
    }

    pub fn witness_set(&self) -> Option<&VertexSet> {
        match &self.witness {
            Witness::Set(s) => Some(s),
            _ => None,
        }
    }
}

/// Indices of `a` within distance `r` of each member (itself included), as
/// rows of booleans.
pub(crate) fn closeness(w: &GraphWindow, a: &VertexSet, r: u32) -> Vec<Vec<bool>> {
    local_distances(w, a, r)
        .into_iter()
        .map(|row| row.into_iter().map(|d| d.is_some()).collect())
        .collect()
}

/// Whether distances up to `r` among members of `a` are ambient-exact.
pub(crate) fn set_trusted(w: &GraphWindow, a: &VertexSet, r: u32) -> bool {
    w.is_isometric() || crate::graph::set_is_trusted(w, a, r)
}
