//! Graph products and their quasi-median Cayley graphs.
//!
//! Elements of `ΓG` are kept as [`NormalForm`]s. A [`QmWindow`] is a ball of
//! the Cayley graph for `⋃ G_u ∖ {1}` together with its cliques (cosets
//! `gG_u`) and hyperplanes (edge classes under triangles and opposite sides
//! of squares). On top of that sit the coherent clique metrics `δ_C`, the
//! extended metric `δ`, the graph of pointed cliques with its bulkheads, and
//! the partial wreath products `A □_Γ B`.

mod metrics;
mod normal_form;
mod partial_wreath;
mod pc;
mod qm;

pub use metrics::{clique_delta, delta, delta_along, delta_by_hyperplanes, metric_checks, MetricReport};
pub use normal_form::{GraphProductSpec, NormalForm, ProductStructure};
pub use partial_wreath::{
    bset, partial_wreath_ball, pc_iso_check, projection_check, BSet, IsoVerdict, PartialWreathSpec,
    PartialWreathWindow, ProjectionReport, PwElement,
};
pub use pc::{bulkhead, pc_build, pc_checks, pc_distance_bounds, Bulkhead, PcBound, PcEdgeKind, PcReport, PcWindow};
pub use qm::{
    gate, hyperplane_geometry, qm_ball, structure_checks, Clique, CliqueId, Hyperplane, HyperplaneGeometry,
    HyperplaneId, QmWindow, StructureReport,
};
