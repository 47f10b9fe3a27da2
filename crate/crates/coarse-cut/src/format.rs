//! Text formats: `cgw v1` graph windows and `cvs v1` vertex sets.
//!
//! ```text
//! cgw v1 <n_vertices> <n_edges> <trusted_radius> <basepoint>
//! iso                      (optional: window distances are ambient)
//! v <id> <label...>
//! e <id> <id>
//! ```
//!
//! Vertices are written in id order and edges as sorted pairs, so a window
//! always serializes to the same bytes.

use std::fmt::Write as _;

use coarse_cut_core::{GraphWindow, VertexId, VertexSet};

use crate::Error;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, Error> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

pub fn write_cgw(w: &GraphWindow) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "cgw v1 {} {} {} {}",
        w.len(),
        w.edge_count(),
        w.trusted_radius(),
        w.basepoint()
    );
    if w.is_isometric() {
        out.push_str("iso\n");
    }
    for v in w.vertices() {
        let _ = write!(out, "v {v}");
        for x in w.label(v) {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    for (a, b) in w.edges() {
        let _ = writeln!(out, "e {a} {b}");
    }
    out
}

pub fn read_cgw(text: &str) -> Result<GraphWindow, Error> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("cgw") || toks.next() != Some("v1") {
        return Err(parse_err(ln, "expected `cgw v1` header"));
    }
    let n: usize = field(toks.next(), ln, "vertex count")?;
    let m: usize = field(toks.next(), ln, "edge count")?;
    let trusted: u32 = field(toks.next(), ln, "trusted radius")?;
    let base: VertexId = field(toks.next(), ln, "basepoint")?;
    if toks.next().is_some() {
        return Err(parse_err(ln, "trailing tokens in header"));
    }
    let mut iso = false;
    let mut labels: Vec<Option<Vec<i64>>> = vec![None; n];
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("iso") if labels.iter().all(Option::is_none) && edges.is_empty() => iso = true,
            Some("v") => {
                let id: usize = field(toks.next(), ln, "vertex id")?;
                let slot = labels.get_mut(id).ok_or_else(|| parse_err(ln, format!("vertex id {id} out of range")))?;
                if slot.is_some() {
                    return Err(parse_err(ln, format!("duplicate vertex {id}")));
                }
                let label = toks
                    .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad label entry `{t}`"))))
                    .collect::<Result<Vec<i64>, _>>()?;
                *slot = Some(label);
            }
            Some("e") => {
                let a: VertexId = field(toks.next(), ln, "edge endpoint")?;
                let b: VertexId = field(toks.next(), ln, "edge endpoint")?;
                if toks.next().is_some() {
                    return Err(parse_err(ln, "trailing tokens after edge"));
                }
                edges.push((a, b));
            }
            _ => return Err(parse_err(ln, format!("unrecognised line `{line}`"))),
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| parse_err(0, format!("vertex {i} is never declared"))))
        .collect::<Result<Vec<_>, _>>()?;
    if edges.len() != m {
        return Err(parse_err(0, format!("header announces {m} edges, found {}", edges.len())));
    }
    let w = GraphWindow::new(labels, edges, base, trusted)?.with_isometric(iso);
    if w.edge_count() != m {
        return Err(parse_err(0, "duplicate edges"));
    }
    Ok(w)
}

pub fn write_cvs(set: &VertexSet) -> String {
    let mut out = format!("cvs v1 {}\n", set.len());
    for v in set.iter() {
        let _ = writeln!(out, "{v}");
    }
    out
}

/// Reads a vertex set, checking membership against `w` when given.
pub fn read_cvs(text: &str, w: Option<&GraphWindow>) -> Result<VertexSet, Error> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("cvs") || toks.next() != Some("v1") {
        return Err(parse_err(ln, "expected `cvs v1` header"));
    }
    let count: usize = field(toks.next(), ln, "member count")?;
    let mut ids = Vec::with_capacity(count);
    for (ln, line) in lines {
        for tok in line.split_whitespace() {
            ids.push(field::<VertexId>(Some(tok), ln, "vertex id")?);
        }
    }
    let set: VertexSet = ids.iter().copied().collect();
    if set.len() != ids.len() || set.len() != count {
        return Err(parse_err(0, format!("header announces {count} distinct ids, found {}", ids.len())));
    }
    if let Some(w) = w {
        w.check_set(&set)?;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coarse_cut_core::generators::{grid_window, tree_window};

    #[test]
    fn grid_round_trips() {
        let g = grid_window(2, 2).unwrap();
        let text = write_cgw(&g);
        assert!(text.starts_with("cgw v1 25 40 "));
        let back = read_cgw(&text).unwrap();
        assert_eq!(write_cgw(&back), text);
        assert!(back.is_isometric());
    }

    #[test]
    fn tree_round_trips() {
        let t = tree_window(3, -2, 1, 1).unwrap();
        let text = write_cgw(t.graph());
        assert_eq!(write_cgw(&read_cgw(&text).unwrap()), text);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_cgw("").is_err());
        assert!(read_cgw("cgw v2 1 0 0 0\nv 0\n").is_err());
        assert!(read_cgw("cgw v1 2 1 0 0\nv 0\nv 1\n").is_err());
        assert!(read_cgw("cgw v1 2 1 0 0\nv 0\ne 0 1\n").is_err());
        assert!(read_cgw("cgw v1 2 1 0 0\nv 0\nv 1\ne 0 0\n").is_err());
        assert!(read_cgw("cgw v1 2 2 0 0\nv 0\nv 1\ne 0 1\ne 1 0\n").is_err());
        assert!(read_cgw("cgw v1 1 0 0 0\nv 0 x\n").is_err());
    }

    #[test]
    fn sets_round_trip() {
        let s: VertexSet = [4, 1, 9].into_iter().collect();
        let text = write_cvs(&s);
        assert_eq!(text, "cvs v1 3\n1\n4\n9\n");
        assert_eq!(read_cvs(&text, None).unwrap(), s);
        assert!(read_cvs("cvs v1 2\n1\n1\n", None).is_err());
        let g = grid_window(1, 1).unwrap();
        assert!(read_cvs("cvs v1 1\n7\n", Some(&g)).is_err());
    }
}
