//! Explicit graph families and their distinguished subsets.
//!
//! Every generator stamps its window with a trusted radius (and marks it
//! isometric when the window is convex in the ambient graph), so results
//! computed on the window can be told apart from boundary artefacts.

mod dl;
mod grid;
mod product;
mod tree;
mod wreath;

pub use dl::{dl_persistent, dl_vset, dl_window, DlWindow};
pub use grid::{grid_window, thickened_sphere};
pub use product::{product_window, tree_annulus, ProductWindow, TreeProduct};
pub use tree::{tree_below, tree_window, TreeWindow};
pub use wreath::{wreath_ball, BaseGroup, WreathBallSpec, WreathElement, WreathWindow};

use alloc::format;

use crate::error::{Error, Result};
use crate::graph::{bounded_bfs, GraphWindow, VertexId, VertexSet};

/// Windows larger than this are refused rather than silently exhausting memory.
pub const MAX_WINDOW_VERTICES: usize = 1 << 23;

/// Checks `set ⊆ B(x, 4r)` using window distances (which never undercut
/// ambient ones, so success is conclusive).
pub(crate) fn assert_in_quadruple_ball(w: &GraphWindow, x: VertexId, r: u32, set: &VertexSet) -> Result<()> {
    let reach = bounded_bfs(w, &[x], 4 * r);
    match set.iter().find(|v| !reach.contains_key(v)) {
        None => Ok(()),
        Some(v) => Err(Error::Structure(format!(
            "member {v} of the set at ({x}, {r}) lies outside B(x, 4r)"
        ))),
    }
}
