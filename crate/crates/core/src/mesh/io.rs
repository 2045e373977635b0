//! The `steklov-mesh 1` text format.
//!
//! ```text
//! steklov-mesh 1
//! <nv> <nt>
//! <x> <y>        (nv lines)
//! <i> <j> <k>    (nt lines, zero-based, counter-clockwise)
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Boundary edges are
//! not stored; they follow from edge incidence.

use std::fmt::Write as _;
use std::path::Path;

use super::{signed_area, DomainTag, Mesh, Point, Triangle, AREA_TOL};
use crate::error::{MeshError, ParseError};

const MAGIC: &str = "steklov-mesh 1";

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "# domain: {}", mesh.domain().name());
    let _ = writeln!(out, "{} {}", mesh.num_vertices(), mesh.num_triangles());
    // `{}` prints the shortest representation that parses back exactly
    for p in mesh.points() {
        let _ = writeln!(out, "{} {}", p.x, p.y);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t.v[0], t.v[1], t.v[2]);
    }
    out
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh_string(mesh)).map_err(|e| MeshError::Io(e.to_string()))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(e.to_string()))?;
    read_mesh_str(&text)
}

/// Parses a mesh. The result is tagged [`DomainTag::External`].
pub fn read_mesh_str(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let err = |line: usize, msg: String| MeshError::Parse(ParseError { line, msg });

    let (line, header) = lines.next().ok_or_else(|| err(0, "empty file".into()))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["steklov-mesh", "1"] {
        return Err(err(line, format!("expected header `{MAGIC}`, found `{header}`")));
    }

    let (line, counts) = lines
        .next()
        .ok_or_else(|| err(line, "missing counts line".into()))?;
    let counts = parse_fields::<usize>(counts, 2)
        .ok_or_else(|| err(line, format!("expected `<nv> <nt>`, found `{counts}`")))?;
    let (nv, nt) = (counts[0], counts[1]);

    let mut points = Vec::with_capacity(nv);
    let mut last = line;
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(last, format!("expected {nv} vertices, found {}", points.len())))?;
        let xy = parse_fields::<f64>(l, 2)
            .filter(|v| v.iter().all(|c| c.is_finite()))
            .ok_or_else(|| err(line, format!("expected `<x> <y>`, found `{l}`")))?;
        points.push(Point::new(xy[0], xy[1]));
        last = line;
    }

    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, l) = lines.next().ok_or_else(|| {
            err(
                last,
                format!("expected {nt} triangles, found {}", triangles.len()),
            )
        })?;
        let v = parse_fields::<usize>(l, 3)
            .ok_or_else(|| err(line, format!("expected `<i> <j> <k>`, found `{l}`")))?;
        if let Some(&bad) = v.iter().find(|&&i| i >= nv) {
            return Err(err(line, format!("vertex index {bad} out of range (nv = {nv})")));
        }
        let v = [v[0], v[1], v[2]];
        if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
            return Err(err(line, "repeated vertex index".into()));
        }
        let area = signed_area(&[points[v[0]], points[v[1]], points[v[2]]]);
        if area <= AREA_TOL {
            return Err(err(line, format!("non-positive area {area:e}")));
        }
        triangles.push(Triangle { v });
        last = line;
    }

    if let Some((line, l)) = lines.next() {
        return Err(err(line, format!("unexpected trailing content `{l}`")));
    }

    Mesh::new(points, triangles, DomainTag::External)
}

fn parse_fields<T: std::str::FromStr>(line: &str, n: usize) -> Option<Vec<T>> {
    let v: Vec<T> = line
        .split_whitespace()
        .map(|s| s.parse().ok())
        .collect::<Option<_>>()?;
    (v.len() == n).then_some(v)
}
