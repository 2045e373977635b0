//! Element matrices and global assembly for the Crouzeix-Raviart and P1
//! spaces.
//!
//! `M` is the Gram matrix of the (broken) H^1 inner product, gradient plus
//! L^2 part; `N` is the L^2(boundary) Gram matrix of the traces. All entries
//! are integrated exactly on the affine element.
//!
//! Crouzeix-Raviart basis on a triangle with barycentric coordinates
//! `l_0, l_1, l_2`: `phi_i = 1 - 2 l_i`, which equals 1 on the edge opposite
//! vertex `i` and has zero mean on the other two edges. Local dof `i` is
//! therefore the edge opposite vertex `i`.

use rayon::prelude::*;

use crate::error::{AssemblyError, MeshError};
use crate::mesh::{check_admissibility, signed_area, Mesh, Point, AREA_TOL};
use crate::sparse::{SparseSymMatrix, SymTripletBuilder};

pub type Local3 = [[f64; 3]; 3];
pub type Local2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// Crouzeix-Raviart, one dof per edge.
    CrouzeixRaviart,
    /// Conforming piecewise linear Lagrange, one dof per vertex.
    P1,
}

impl ElementKind {
    pub fn name(&self) -> &'static str {
        match self {
            ElementKind::CrouzeixRaviart => "CR",
            ElementKind::P1 => "P1",
        }
    }
}

/// Area and barycentric gradients of an affine triangle.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Gradient of the barycentric coordinate of vertex `i`.
    pub grad: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn new(vertices: [Point; 3]) -> Result<Self, AssemblyError> {
        let area = signed_area(&vertices);
        if area <= AREA_TOL {
            return Err(AssemblyError::DegenerateTriangle { triangle: 0, area });
        }
        let mut grad = [[0.0; 2]; 3];
        for (i, g) in grad.iter_mut().enumerate() {
            let b = vertices[(i + 1) % 3];
            let c = vertices[(i + 2) % 3];
            // inward normal of the opposite edge scaled by its length
            *g = [-(c.y - b.y) / (2.0 * area), (c.x - b.x) / (2.0 * area)];
        }
        Ok(Self { vertices, area, grad })
    }

    /// Length of the edge opposite vertex `i`.
    pub fn edge_length(&self, i: usize) -> f64 {
        self.vertices[(i + 1) % 3].dist(&self.vertices[(i + 2) % 3])
    }
}

/// `int_K grad l_i . grad l_j`.
pub fn local_p1_stiffness(g: &TriangleGeometry) -> Local3 {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
        }
    }
    k
}

/// `int_K l_i l_j = |K| (1 + delta_ij) / 12`.
pub fn local_p1_mass(g: &TriangleGeometry) -> Local3 {
    let mut m = [[g.area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = g.area / 6.0;
    }
    m
}

pub fn local_p1_m(g: &TriangleGeometry) -> Local3 {
    add3(&local_p1_stiffness(g), &local_p1_mass(g))
}

/// Boundary mass of one edge with P1 traces: `|e|/6 [[2,1],[1,2]]`.
pub fn local_p1_n(edge_length: f64) -> Local2 {
    let d = edge_length / 3.0;
    let o = edge_length / 6.0;
    [[d, o], [o, d]]
}

/// `grad phi_i = -2 grad l_i`, so the stiffness is four times the P1 one.
pub fn local_cr_stiffness(g: &TriangleGeometry) -> Local3 {
    let mut k = local_p1_stiffness(g);
    for row in &mut k {
        for v in row.iter_mut() {
            *v *= 4.0;
        }
    }
    k
}

/// `int_K (1 - 2 l_i)(1 - 2 l_j) = |K| delta_ij / 3`.
pub fn local_cr_mass(g: &TriangleGeometry) -> Local3 {
    let d = g.area / 3.0;
    [[d, 0.0, 0.0], [0.0, d, 0.0], [0.0, 0.0, d]]
}

pub fn local_cr_m(g: &TriangleGeometry) -> Local3 {
    add3(&local_cr_stiffness(g), &local_cr_mass(g))
}

/// Trace mass on the edge opposite local vertex `edge`, in the natural local
/// ordering. Along that edge `phi_edge = 1` and the other two basis functions
/// are `2s - 1` and `1 - 2s`, giving `|e|` on the edge dof, `|e|/3` on the
/// other two diagonal entries, `-|e|/3` between them and zero coupling.
pub fn local_cr_n(g: &TriangleGeometry, edge: usize) -> Result<Local3, AssemblyError> {
    if edge > 2 {
        return Err(AssemblyError::NotAnEdge(edge));
    }
    let len = g.edge_length(edge);
    let mut n = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            n[a][b] = match (a == edge, b == edge) {
                (true, true) => len,
                (false, false) if a == b => len / 3.0,
                (false, false) => -len / 3.0,
                _ => 0.0,
            };
        }
    }
    Ok(n)
}

fn add3(a: &Local3, b: &Local3) -> Local3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] += b[i][j];
        }
    }
    c
}

/// Local-to-global degree-of-freedom map.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub kind: ElementKind,
    pub dof_count: usize,
    /// Per triangle: CR, edge opposite local vertex `i`; P1, vertex `i`.
    pub local: Vec<[usize; 3]>,
    /// Dofs whose row of `N` is structurally nonzero, ascending.
    pub boundary_support: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, kind: ElementKind) -> Self {
        match kind {
            ElementKind::CrouzeixRaviart => {
                let local: Vec<[usize; 3]> = (0..mesh.num_triangles())
                    .map(|t| mesh.triangle_edges(t))
                    .collect();
                let mut on = vec![false; mesh.num_edges()];
                for t in 0..mesh.num_triangles() {
                    if mesh.boundary_edges_of(t).next().is_some() {
                        for &e in &local[t] {
                            on[e] = true;
                        }
                    }
                }
                Self {
                    kind,
                    dof_count: mesh.num_edges(),
                    local,
                    boundary_support: (0..on.len()).filter(|&i| on[i]).collect(),
                }
            }
            ElementKind::P1 => Self {
                kind,
                dof_count: mesh.num_vertices(),
                local: mesh.triangles().iter().map(|t| t.v).collect(),
                boundary_support: mesh.boundary_vertices(),
            },
        }
    }
}

/// Assembled pencil matrices of one discrete space.
#[derive(Debug, Clone)]
pub struct Assembled {
    /// H^1 Gram matrix (SPD).
    pub m: SparseSymMatrix,
    /// Boundary trace Gram matrix (PSD).
    pub n: SparseSymMatrix,
    pub dofs: DofMap,
    /// Lower bound on the smallest eigenvalue of `m` obtained element by
    /// element from the mass part: `min_i sum_{K ∋ i} |K|/3` for CR (diagonal
    /// mass) and `min_i sum_{K ∋ i} |K|/12` for P1 (local mass minus
    /// `|K|/12 I` is positive semidefinite).
    pub m_floor: f64,
}

pub fn assemble(mesh: &Mesh, kind: ElementKind) -> Result<Assembled, AssemblyError> {
    let report = check_admissibility(mesh);
    if !report.passed() {
        return Err(MeshError::Inadmissible(Box::new(report)).into());
    }

    let geometry: Vec<TriangleGeometry> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            TriangleGeometry::new(mesh.vertices_of(t)).map_err(|e| match e {
                AssemblyError::DegenerateTriangle { area, .. } => {
                    AssemblyError::DegenerateTriangle { triangle: t, area }
                }
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;

    let dofs = DofMap::new(mesh, kind);
    let nt = mesh.num_triangles();
    let mut mb = SymTripletBuilder::with_capacity(dofs.dof_count, 6 * nt);
    let mut nb = SymTripletBuilder::new(dofs.dof_count);
    let mut patch_mass = vec![0.0f64; dofs.dof_count];

    let local_m: Vec<Local3> = geometry
        .par_iter()
        .map(|g| match kind {
            ElementKind::CrouzeixRaviart => local_cr_m(g),
            ElementKind::P1 => local_p1_m(g),
        })
        .collect();

    for t in 0..nt {
        let map = dofs.local[t];
        mb.add_block(&map, &local_m[t]);
        let share = match kind {
            ElementKind::CrouzeixRaviart => geometry[t].area / 3.0,
            ElementKind::P1 => geometry[t].area / 12.0,
        };
        for &d in &map {
            patch_mass[d] += share;
        }
        for e in mesh.boundary_edges_of(t) {
            match kind {
                // the trace on a boundary edge involves all three local dofs
                ElementKind::CrouzeixRaviart => {
                    nb.add_block(&map, &local_cr_n(&geometry[t], e)?);
                }
                ElementKind::P1 => {
                    let ends = [map[(e + 1) % 3], map[(e + 2) % 3]];
                    nb.add_block(&ends, &local_p1_n(geometry[t].edge_length(e)));
                }
            }
        }
    }

    Ok(Assembled {
        m: mb.finalize(),
        n: nb.finalize(),
        m_floor: patch_mass.iter().cloned().fold(f64::INFINITY, f64::min),
        dofs,
    })
}
