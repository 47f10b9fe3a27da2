use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{neighbourhood, sphere, Flagged, GraphWindow, VertexId, VertexSet};

use super::MAX_WINDOW_VERTICES;

/// The box `[-halfwidth, halfwidth]^n` of `Z^n`, labelled by coordinates and
/// based at the origin. Boxes are convex, so the window is isometric.
pub fn grid_window(n: u32, halfwidth: u32) -> Result<GraphWindow> {
    if n == 0 {
        return Err(Error::InvalidParameter("grid dimension must be >= 1".into()));
    }
    let side = 2 * halfwidth as usize + 1;
    let total = side
        .checked_pow(n)
        .filter(|&t| t <= MAX_WINDOW_VERTICES)
        .ok_or_else(|| Error::InvalidParameter(format!("grid {side}^{n} is too large")))?;
    let h = halfwidth as i64;
    let mut labels = Vec::with_capacity(total);
    for id in 0..total {
        let mut rest = id;
        let mut coords = alloc::vec![0i64; n as usize];
        for c in coords.iter_mut().rev() {
            *c = (rest % side) as i64 - h;
            rest /= side;
        }
        labels.push(coords);
    }
    let mut edges = Vec::new();
    let mut stride = 1;
    for axis in (0..n as usize).rev() {
        for (id, label) in labels.iter().enumerate() {
            if label[axis] < h {
                edges.push((id as VertexId, (id + stride) as VertexId));
            }
        }
        stride *= side;
    }
    let origin = (total / 2) as VertexId;
    Ok(GraphWindow::new(labels, edges, origin, halfwidth)?.with_isometric(true))
}

/// `S(x, r)^{+t}`; trusted when the ball `B(x, r + t)` is.
pub fn thickened_sphere(w: &GraphWindow, x: VertexId, r: u32, t: u32) -> Result<Flagged<VertexSet>> {
    let s = sphere(w, x, r)?;
    if s.value.is_empty() {
        return Ok(Flagged::new(VertexSet::new(), w.ball_is_trusted(x, r + t)));
    }
    let thick = neighbourhood(w, &s.value, t)?;
    Ok(Flagged::new(thick, w.ball_is_trusted(x, r + t)))
}
