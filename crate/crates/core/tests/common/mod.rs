//! Independent reference computations shared by the integration tests and
//! the acceptance harness. Nothing here calls into the assembly or
//! eigensolver code under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, Vector3};
use steklov::mesh::{Mesh, Point};

/// Degree-4 rule on a triangle: barycentric points and weights summing to 1.
const TRI_RULE: [([f64; 3], f64); 6] = [
    (
        [0.108103018168070, 0.445948490915965, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.108103018168070, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.445948490915965, 0.108103018168070],
        0.223381589678011,
    ),
    (
        [0.816847572980459, 0.091576213509771, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.816847572980459, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.091576213509771, 0.816847572980459],
        0.109951743655322,
    ),
];

/// Three-point Gauss-Legendre on [0, 1] (exact to degree 5).
fn gauss3() -> [(f64, f64); 3] {
    let a = (0.6f64).sqrt() / 2.0;
    [(0.5 - a, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + a, 5.0 / 18.0)]
}

/// An affine function `c0 + c1 x + c2 y`.
#[derive(Clone, Copy, Debug)]
pub struct Affine([f64; 3]);

impl Affine {
    pub fn eval(&self, p: Point) -> f64 {
        self.0[0] + self.0[1] * p.x + self.0[2] * p.y
    }
    pub fn grad(&self) -> [f64; 2] {
        [self.0[1], self.0[2]]
    }
}

/// The three affine functions taking value `delta_ij` at `nodes[j]`.
pub fn nodal_basis(nodes: [Point; 3]) -> [Affine; 3] {
    let a = Matrix3::from_fn(|j, c| match c {
        0 => 1.0,
        1 => nodes[j].x,
        _ => nodes[j].y,
    });
    let inv = a.try_inverse().expect("collinear nodes");
    std::array::from_fn(|i| {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        let c = inv * e;
        Affine([c[0], c[1], c[2]])
    })
}

pub fn midpoint(a: Point, b: Point) -> Point {
    Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
}

/// Crouzeix-Raviart basis: local function `i` is one at the midpoint of the
/// edge opposite vertex `i` and zero at the other two midpoints.
pub fn cr_basis(v: [Point; 3]) -> [Affine; 3] {
    nodal_basis(std::array::from_fn(|i| midpoint(v[(i + 1) % 3], v[(i + 2) % 3])))
}

pub fn p1_basis(v: [Point; 3]) -> [Affine; 3] {
    nodal_basis(v)
}

pub fn area(v: [Point; 3]) -> f64 {
    0.5 * ((v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y)).abs()
}

fn tri_point(v: [Point; 3], b: [f64; 3]) -> Point {
    Point::new(
        b[0] * v[0].x + b[1] * v[1].x + b[2] * v[2].x,
        b[0] * v[0].y + b[1] * v[1].y + b[2] * v[2].y,
    )
}

/// `int_K grad phi_i . grad phi_j + phi_i phi_j` by quadrature.
pub fn quad_m(v: [Point; 3], basis: &[Affine; 3]) -> [[f64; 3]; 3] {
    let area = area(v);
    let mut m = [[0.0; 3]; 3];
    for (b, w) in TRI_RULE {
        let p = tri_point(v, b);
        for i in 0..3 {
            for j in 0..3 {
                let (gi, gj) = (basis[i].grad(), basis[j].grad());
                let f = gi[0] * gj[0] + gi[1] * gj[1] + basis[i].eval(p) * basis[j].eval(p);
                m[i][j] += area * w * f;
            }
        }
    }
    m
}

/// `int_e phi_i phi_j` over the segment from `a` to `b`.
pub fn quad_edge(a: Point, b: Point, basis: &[Affine; 3]) -> [[f64; 3]; 3] {
    let len = a.dist(&b);
    let mut n = [[0.0; 3]; 3];
    for (s, w) in gauss3() {
        let p = Point::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
        for i in 0..3 {
            for j in 0..3 {
                n[i][j] += len * w * basis[i].eval(p) * basis[j].eval(p);
            }
        }
    }
    n
}

pub fn max_rel_diff3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / scale
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Space {
    Cr,
    P1,
}

/// Dense `(M, N)` built from scratch: quadrature local matrices, edges
/// numbered by looking up the mesh edge list, boundary edges found by
/// counting incident triangles.
pub fn dense_pencil(mesh: &Mesh, space: Space) -> (DMatrix<f64>, DMatrix<f64>) {
    let pts = mesh.points();
    let edge_index = |a: usize, b: usize| -> usize {
        let key = [a.min(b), a.max(b)];
        mesh.edges()
            .iter()
            .position(|e| e.endpoints == key)
            .expect("edge missing")
    };
    let mut count = std::collections::HashMap::new();
    for t in mesh.triangles() {
        for i in 0..3 {
            let (a, b) = (t.v[(i + 1) % 3], t.v[(i + 2) % 3]);
            *count.entry([a.min(b), a.max(b)]).or_insert(0usize) += 1;
        }
    }
    let dim = match space {
        Space::Cr => mesh.edges().len(),
        Space::P1 => pts.len(),
    };
    let mut m = DMatrix::zeros(dim, dim);
    let mut n = DMatrix::zeros(dim, dim);
    for t in mesh.triangles() {
        let v = [pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]];
        let (basis, map) = match space {
            Space::Cr => (
                cr_basis(v),
                std::array::from_fn::<usize, 3, _>(|i| edge_index(t.v[(i + 1) % 3], t.v[(i + 2) % 3])),
            ),
            Space::P1 => (p1_basis(v), t.v),
        };
        let lm = quad_m(v, &basis);
        for i in 0..3 {
            for j in 0..3 {
                m[(map[i], map[j])] += lm[i][j];
            }
        }
        for i in 0..3 {
            let (a, b) = (t.v[(i + 1) % 3], t.v[(i + 2) % 3]);
            if count[&[a.min(b), a.max(b)]] == 1 {
                let ln = quad_edge(pts[a], pts[b], &basis);
                for r in 0..3 {
                    for c in 0..3 {
                        n[(map[r], map[c])] += ln[r][c];
                    }
                }
            }
        }
    }
    (m, n)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].powi(2))
            .sum();
        if off < 1e-32 * m.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * kp - s * kq;
                    m[(k, q)] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * pk - s * qk;
                    m[(q, k)] = s * pk + c * qk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues `mu` of `N x = mu M x` (M SPD) through `L^-1 N L^-T`,
/// descending.
pub fn dense_pencil_eigenvalues(m: &DMatrix<f64>, n: &DMatrix<f64>) -> Vec<f64> {
    let l = m.clone().cholesky().expect("M not SPD").l();
    let linv = l.try_inverse().expect("singular factor");
    let c = &linv * n * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev = jacobi_eigenvalues(&c);
    ev.reverse();
    ev
}

/// Numerical rank by the same Jacobi routine (eigenvalues of a symmetric
/// PSD matrix above `rel * max`).
pub fn psd_rank(a: &DMatrix<f64>, rel: f64) -> usize {
    let ev = jacobi_eigenvalues(a);
    let top = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    ev.iter().filter(|&&x| x > rel * top).count()
}
