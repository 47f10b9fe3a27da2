//! Computational coarse geometry on finite windows of infinite graphs.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs: windows are immutable after construction and all
//! invariants are computed in exact rational arithmetic.
//!
//! Module map:
//!
//! - [`graph`]: windows, vertex sets, balls, boundaries, coarse components
//!   and growth functions.
//! - [`generators`]: tree, product, Diestel–Leader, grid and wreath-product
//!   windows together with their distinguished subsets.
//! - [`invariants`]: scale-`r` Cheeger constants, `(r, δ)`-cuts, L1-Poincaré
//!   constants and separated nets.
//! - [`separation`]: persistent families, coarse-separation witnesses and the
//!   path-scanning cut certificate.
//! - [`quasimedian`]: graph products, quasi-median Cayley balls, hyperplanes,
//!   coherent clique metrics, graphs of pointed cliques and partial wreath
//!   products.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod generators;
pub mod graph;
pub mod group;
pub mod invariants;
pub mod quasimedian;
pub mod separation;

mod union_find;

pub use error::{Error, Result};
pub use graph::{Distance, Flagged, GraphWindow, GrowthTable, VertexId, VertexSet};

/// Exact rational numbers used for every certified quantity.
pub type Rational = num_rational::Ratio<i64>;
