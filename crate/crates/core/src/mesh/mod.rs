//! Triangulations of polygonal domains and the per-element geometry used by
//! the eigenvalue bound formulas.

mod generate;
mod io;

pub use generate::{
    generate_graded_lshape, generate_graded_lshape_with_target, generate_uniform_square, LShapeGrading,
};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};

use crate::error::MeshError;

/// Absolute tolerance below which a signed area counts as non-positive.
pub const AREA_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Vertex indices of a triangle, counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub v: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Sorted vertex indices.
    pub endpoints: [usize; 2],
    /// Incident triangles, ascending. A conforming mesh has one or two.
    pub incident: Vec<usize>,
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    /// (0,1)^2
    Square,
    /// (0,2)^2 minus [1,2]^2
    LShape,
    External,
}

impl DomainTag {
    /// Area of the declared domain, if known.
    pub fn area(&self) -> Option<f64> {
        match self {
            DomainTag::Square => Some(1.0),
            DomainTag::LShape => Some(3.0),
            DomainTag::External => None,
        }
    }

    /// Perimeter of the declared domain, if known.
    pub fn perimeter(&self) -> Option<f64> {
        match self {
            DomainTag::Square => Some(4.0),
            DomainTag::LShape => Some(8.0),
            DomainTag::External => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainTag::Square => "square",
            DomainTag::LShape => "lshape",
            DomainTag::External => "external",
        }
    }
}

/// A triangulation together with its derived edge table.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    points: Vec<Point>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    /// `tri_edges[t][i]` is the edge of triangle `t` opposite its vertex `i`.
    tri_edges: Vec<[usize; 3]>,
    domain: DomainTag,
}

impl Mesh {
    /// Builds a mesh and its edge table. Rejects non-finite coordinates and
    /// out-of-range or repeated vertex indices; geometric validity is left to
    /// [`check_admissibility`] and [`compute_geometry`].
    pub fn new(points: Vec<Point>, triangles: Vec<Triangle>, domain: DomainTag) -> Result<Self, MeshError> {
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(MeshError::NonFinitePoint(i));
            }
        }
        let nv = points.len();
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.v;
            if a >= nv || b >= nv || c >= nv {
                return Err(MeshError::IndexOutOfRange { triangle: t, nv });
            }
            if a == b || b == c || a == c {
                return Err(MeshError::RepeatedVertex(t));
            }
        }

        // (sorted endpoints, triangle, local index of the opposite vertex)
        let mut half: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                half.push(([a.min(b), a.max(b)], t, i));
            }
        }
        half.sort_unstable();

        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        let mut start = 0;
        while start < half.len() {
            let key = half[start].0;
            let mut end = start;
            let mut incident = Vec::with_capacity(2);
            while end < half.len() && half[end].0 == key {
                let (_, t, i) = half[end];
                tri_edges[t][i] = edges.len();
                incident.push(t);
                end += 1;
            }
            edges.push(Edge {
                endpoints: key,
                boundary: incident.len() == 1,
                incident,
            });
            start = end;
        }

        Ok(Self {
            points,
            triangles,
            edges,
            tri_edges,
            domain,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.boundary).count()
    }

    /// Edges of triangle `t`, entry `i` opposite vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn vertices_of(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t].v;
        [self.points[a], self.points[b], self.points[c]]
    }

    /// Local indices (opposite vertex) of the boundary edges of triangle `t`.
    pub fn boundary_edges_of(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&i| self.edges[self.tri_edges[t][i]].boundary)
    }

    /// Vertices touched by at least one boundary edge, ascending.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut on = vec![false; self.points.len()];
        for e in self.edges.iter().filter(|e| e.boundary) {
            on[e.endpoints[0]] = true;
            on[e.endpoints[1]] = true;
        }
        (0..on.len()).filter(|&v| on[v]).collect()
    }

    pub fn boundary_length(&self) -> f64 {
        self.edges
            .iter()
            .filter(|e| e.boundary)
            .map(|e| self.points[e.endpoints[0]].dist(&self.points[e.endpoints[1]]))
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| signed_area(&self.vertices_of(t)))
            .sum()
    }
}

/// Shoelace formula; positive for counter-clockwise vertices.
pub fn signed_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y))
}

/// Smallest interior angle of a triangle, in degrees.
pub fn min_angle_deg(p: &[Point; 3]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let c = p[(i + 2) % 3];
        let (ux, uy) = (b.x - a.x, b.y - a.y);
        let (vx, vy) = (c.x - a.x, c.y - a.y);
        let cos = (ux * vx + uy * vy) / (ux.hypot(uy) * vx.hypot(vy));
        min = min.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
    }
    min
}

/// Per-element geometric quantities entering the projection-error constant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryTable {
    /// Longest edge length of each triangle.
    pub h: Vec<f64>,
    pub area: Vec<f64>,
    /// Height over the boundary edge, `2|K|/|e|`, for triangles with a
    /// boundary edge. With several boundary edges the smallest height is kept.
    pub boundary_height: Vec<Option<f64>>,
    pub max_h: f64,
    /// `max h_K / sqrt(H_K)` over boundary triangles; `None` without any.
    pub max_h_over_sqrt_height: Option<f64>,
}

impl GeometryTable {
    pub fn num_boundary_triangles(&self) -> usize {
        self.boundary_height.iter().filter(|h| h.is_some()).count()
    }
}

pub fn compute_geometry(mesh: &Mesh) -> Result<GeometryTable, MeshError> {
    let nt = mesh.num_triangles();
    let mut h = Vec::with_capacity(nt);
    let mut area = Vec::with_capacity(nt);
    let mut boundary_height = Vec::with_capacity(nt);
    let mut max_h = 0.0f64;
    let mut max_ratio: Option<f64> = None;

    for t in 0..nt {
        let p = mesh.vertices_of(t);
        let a = signed_area(&p);
        if a <= AREA_TOL {
            return Err(MeshError::DegenerateTriangle { triangle: t, area: a });
        }
        // edge i is opposite vertex i
        let len = [p[1].dist(&p[2]), p[2].dist(&p[0]), p[0].dist(&p[1])];
        let hk = len[0].max(len[1]).max(len[2]);
        let height = mesh
            .boundary_edges_of(t)
            .map(|i| 2.0 * a / len[i])
            .min_by(f64::total_cmp);
        if let Some(hb) = height {
            let r = hk / hb.sqrt();
            max_ratio = Some(max_ratio.map_or(r, |m: f64| m.max(r)));
        }
        max_h = max_h.max(hk);
        h.push(hk);
        area.push(a);
        boundary_height.push(height);
    }

    Ok(GeometryTable {
        h,
        area,
        boundary_height,
        max_h,
        max_h_over_sqrt_height: max_ratio,
    })
}

/// Outcome of [`check_admissibility`]. Empty violation lists mean the mesh
/// may be used with the lower-bound pipeline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdmissibilityReport {
    /// Edges shared by more than two triangles.
    pub overshared_edges: Vec<usize>,
    /// Interior edges traversed in the same direction by both neighbours.
    pub orientation_conflicts: Vec<usize>,
    /// Vertices lying in the interior of a boundary edge (hanging nodes).
    pub hanging_vertices: Vec<usize>,
    /// Vertices not referenced by any triangle.
    pub unused_vertices: Vec<usize>,
    /// Triangles with two or three boundary edges.
    pub multi_boundary_triangles: Vec<usize>,
    /// Triangles with signed area at most [`AREA_TOL`].
    pub nonpositive_area: Vec<usize>,
    /// `(computed, declared)` total area when they differ beyond 1e-12 relative.
    pub area_mismatch: Option<(f64, f64)>,
}

impl AdmissibilityReport {
    pub fn is_conforming(&self) -> bool {
        self.overshared_edges.is_empty()
            && self.orientation_conflicts.is_empty()
            && self.hanging_vertices.is_empty()
            && self.unused_vertices.is_empty()
            && self.area_mismatch.is_none()
    }

    pub fn passed(&self) -> bool {
        self.is_conforming() && self.multi_boundary_triangles.is_empty() && self.nonpositive_area.is_empty()
    }

    /// Triangles named by any violation, ascending and deduplicated.
    pub fn offending_triangles(&self, mesh: &Mesh) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .multi_boundary_triangles
            .iter()
            .chain(&self.nonpositive_area)
            .copied()
            .collect();
        for &e in self.overshared_edges.iter().chain(&self.orientation_conflicts) {
            out.extend(&mesh.edges()[e].incident);
        }
        for &v in &self.hanging_vertices {
            out.extend(
                mesh.triangles()
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.v.contains(&v))
                    .map(|(i, _)| i),
            );
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn summary(&self) -> String {
        if self.passed() {
            return "admissible".to_string();
        }
        let mut parts = Vec::new();
        let mut push = |name: &str, v: &[usize]| {
            if !v.is_empty() {
                parts.push(format!("{name}: {}", preview(v)));
            }
        };
        push("edges with >2 triangles", &self.overshared_edges);
        push("orientation conflicts on edges", &self.orientation_conflicts);
        push("hanging vertices", &self.hanging_vertices);
        push("unused vertices", &self.unused_vertices);
        push(
            "triangles with several boundary edges",
            &self.multi_boundary_triangles,
        );
        push("triangles with non-positive area", &self.nonpositive_area);
        if let Some((got, want)) = self.area_mismatch {
            parts.push(format!("total area {got} differs from domain area {want}"));
        }
        parts.join("; ")
    }
}

fn preview(v: &[usize]) -> String {
    const SHOW: usize = 8;
    let head: Vec<String> = v.iter().take(SHOW).map(|i| i.to_string()).collect();
    if v.len() > SHOW {
        format!("[{}, ... ({} total)]", head.join(", "), v.len())
    } else {
        format!("[{}]", head.join(", "))
    }
}

/// Checks that the mesh is conforming, that no triangle has more than one
/// boundary edge and that all areas are positive. Never fails; violations are
/// collected in the report.
pub fn check_admissibility(mesh: &Mesh) -> AdmissibilityReport {
    let mut report = AdmissibilityReport::default();

    for (t, _) in mesh.triangles().iter().enumerate() {
        if signed_area(&mesh.vertices_of(t)) <= AREA_TOL {
            report.nonpositive_area.push(t);
        }
        if mesh.boundary_edges_of(t).count() > 1 {
            report.multi_boundary_triangles.push(t);
        }
    }

    for (ei, e) in mesh.edges().iter().enumerate() {
        match e.incident.len() {
            1 => {}
            2 => {
                // neighbours of a consistently oriented edge traverse it in
                // opposite directions
                let dir = |t: usize| {
                    let v = mesh.triangles()[t].v;
                    (0..3).find_map(|i| {
                        let (a, b) = (v[i], v[(i + 1) % 3]);
                        if [a.min(b), a.max(b)] == e.endpoints {
                            Some(a == e.endpoints[0])
                        } else {
                            None
                        }
                    })
                };
                if dir(e.incident[0]) == dir(e.incident[1]) {
                    report.orientation_conflicts.push(ei);
                }
            }
            _ => report.overshared_edges.push(ei),
        }
    }

    let mut used = vec![false; mesh.num_vertices()];
    for t in mesh.triangles() {
        for &v in &t.v {
            used[v] = true;
        }
    }
    report.unused_vertices = (0..used.len()).filter(|&v| !used[v]).collect();
    report.hanging_vertices = hanging_vertices(mesh);

    if let Some(want) = mesh.domain().area() {
        let got = mesh.total_area();
        if ((got - want) / want).abs() > 1e-12 {
            report.area_mismatch = Some((got, want));
        }
    }
    report
}

/// Vertices lying strictly inside a boundary edge. A hanging node splits the
/// neighbouring side into two edges, which leaves the long edge with a single
/// incident triangle, so scanning boundary edges is sufficient.
fn hanging_vertices(mesh: &Mesh) -> Vec<usize> {
    let pts = mesh.points();
    // bucket vertices on a coarse grid to avoid the quadratic scan
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    if pts.is_empty() {
        return Vec::new();
    }
    let cells = ((pts.len() as f64).sqrt().ceil() as usize).max(1);
    let wx = ((xmax - xmin) / cells as f64).max(f64::MIN_POSITIVE);
    let wy = ((ymax - ymin) / cells as f64).max(f64::MIN_POSITIVE);
    let cell_of = |x: f64, y: f64| {
        let i = (((x - xmin) / wx) as usize).min(cells - 1);
        let j = (((y - ymin) / wy) as usize).min(cells - 1);
        (i, j)
    };
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (v, p) in pts.iter().enumerate() {
        let (i, j) = cell_of(p.x, p.y);
        grid[j * cells + i].push(v);
    }

    let mut out = Vec::new();
    for e in mesh.edges().iter().filter(|e| e.boundary) {
        let [a, b] = e.endpoints;
        let (pa, pb) = (pts[a], pts[b]);
        let len = pa.dist(&pb);
        let (i0, j0) = cell_of(pa.x.min(pb.x), pa.y.min(pb.y));
        let (i1, j1) = cell_of(pa.x.max(pb.x), pa.y.max(pb.y));
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &v in &grid[j * cells + i] {
                    if v == a || v == b {
                        continue;
                    }
                    let p = pts[v];
                    let cross = (pb.x - pa.x) * (p.y - pa.y) - (pb.y - pa.y) * (p.x - pa.x);
                    if cross.abs() > 1e-12 * len * len {
                        continue;
                    }
                    let s = ((p.x - pa.x) * (pb.x - pa.x) + (p.y - pa.y) * (pb.y - pa.y)) / (len * len);
                    if s > 1e-12 && s < 1.0 - 1e-12 {
                        out.push(v);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}
