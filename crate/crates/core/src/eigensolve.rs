//! The generalized pencil `A x = mu B x` with `A` the boundary trace matrix
//! (positive semidefinite, large kernel) and `B` the H^1 Gram matrix (SPD).
//! Discrete Steklov eigenvalues are `lambda = 1/mu` over the nonzero `mu`.
//!
//! `A` vanishes outside the rows of the boundary support `b`, so eliminating
//! the remaining (interior) dofs with the Schur complement
//! `S = B_bb - B_bi B_ii^{-1} B_ib` leaves the dense pencil `A_bb y = mu S y`
//! with exactly the nonzero spectrum of the full one. Eigenvectors lift back
//! through `x_i = -B_ii^{-1} B_ib y`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::Assembled;
use crate::dense_eigen::symmetric_eigen;
use crate::error::SolverError;
use crate::linsolve::{conjugate_gradient, relative_residual, EnvelopeCholesky, SymRows};
use crate::sparse::SparseSymMatrix;

/// Eigenvalues `mu <= KERNEL_CUT_REL * mu_max` are treated as zero.
pub const KERNEL_CUT_REL: f64 = 1e-10;

/// Required relative residual of interior solves.
pub const INTERIOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Pencil {
    /// Left matrix, positive semidefinite.
    pub a: SparseSymMatrix,
    /// Right matrix, positive definite.
    pub b: SparseSymMatrix,
    /// Lower bound on the smallest eigenvalue of `b`: the larger of its
    /// Gershgorin floor and any externally supplied bound.
    pub b_floor: f64,
}

impl Pencil {
    pub fn new(a: SparseSymMatrix, b: SparseSymMatrix) -> Result<Self, SolverError> {
        if a.dim() != b.dim() {
            return Err(SolverError::DimensionMismatch(a.dim(), b.dim()));
        }
        let b_floor = gershgorin_floor(&b);
        Ok(Self { a, b, b_floor })
    }

    /// Pencil `(N, M)` of an assembled space. The floor combines the
    /// Gershgorin bound with the element-wise mass bound, which stays
    /// positive for P1 where the Gershgorin bound degenerates to zero.
    pub fn from_assembled(asm: &Assembled) -> Self {
        let b_floor = gershgorin_floor(&asm.m).max(asm.m_floor);
        Self {
            a: asm.n.clone(),
            b: asm.m.clone(),
            b_floor,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

pub fn gershgorin_floor(b: &SparseSymMatrix) -> f64 {
    b.gershgorin_floor()
}

enum InteriorSolver {
    Cholesky(EnvelopeCholesky),
    ConjugateGradient,
}

/// Boundary Schur complement of a pencil together with what is needed to
/// lift reduced eigenvectors back to the full space.
pub struct SchurReduction {
    /// `B_bb - B_bi B_ii^{-1} B_ib`
    pub s: DMatrix<f64>,
    /// `A` restricted to the boundary support, symmetrized.
    pub a_bb: DMatrix<f64>,
    /// Boundary support of `A`, ascending global indices.
    pub b_set: Vec<usize>,
    /// Remaining global indices, ascending.
    pub interior: Vec<usize>,
    dim: usize,
    interior_rows: SymRows,
    /// Per boundary column `j`: nonzeros `(interior position, B_ij)`.
    coupling: Vec<Vec<(usize, f64)>>,
    solver: InteriorSolver,
}

pub fn schur_reduce(pencil: &Pencil) -> Result<SchurReduction, SolverError> {
    let n = pencil.dim();
    let b_set = pencil.a.row_support();
    let mut is_b = vec![false; n];
    for &i in &b_set {
        is_b[i] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&i| !is_b[i]).collect();
    let mut pos = vec![0usize; n];
    for (k, &i) in b_set.iter().enumerate() {
        pos[i] = k;
    }
    for (k, &i) in interior.iter().enumerate() {
        pos[i] = k;
    }

    let nb = b_set.len();
    let ni = interior.len();
    let mut b_bb = DMatrix::zeros(nb, nb);
    let mut interior_rows: SymRows = vec![Vec::new(); ni];
    let mut coupling: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
    for (r, c, v) in pencil.b.iter() {
        match (is_b[r], is_b[c]) {
            (true, true) => {
                b_bb[(pos[r], pos[c])] = v;
                b_bb[(pos[c], pos[r])] = v;
            }
            (false, false) => {
                interior_rows[pos[r]].push((pos[c], v));
                if r != c {
                    interior_rows[pos[c]].push((pos[r], v));
                }
            }
            (true, false) => coupling[pos[r]].push((pos[c], v)),
            (false, true) => coupling[pos[c]].push((pos[r], v)),
        }
    }
    for row in &mut interior_rows {
        row.sort_by_key(|&(c, _)| c);
    }

    let a_bb = symmetrize(pencil.a.dense_submatrix(&b_set));

    let dense_column = |j: usize| {
        let mut col = vec![0.0; ni];
        for &(i, v) in &coupling[j] {
            col[i] += v;
        }
        col
    };

    let (s, solver) = if ni == 0 {
        (b_bb, InteriorSolver::ConjugateGradient)
    } else {
        match EnvelopeCholesky::factor(&interior_rows) {
            Ok(chol) => {
                // S = B_bb - W^T W with W = L^{-1} P B_ib
                let cols: Vec<Vec<f64>> = (0..nb)
                    .into_par_iter()
                    .map(|j| chol.forward(&dense_column(j)))
                    .collect();
                let w = DMatrix::from_iterator(ni, nb, cols.into_iter().flatten());
                let s = b_bb - w.tr_mul(&w);
                (s, InteriorSolver::Cholesky(chol))
            }
            Err(_) => {
                let cols: Vec<Vec<f64>> = (0..nb)
                    .into_par_iter()
                    .map(|j| {
                        conjugate_gradient(
                            &interior_rows,
                            &dense_column(j),
                            None,
                            INTERIOR_TOL,
                            20 * ni + 100,
                        )
                    })
                    .collect::<Result<_, _>>()?;
                let mut s = b_bb;
                for (j, z) in cols.iter().enumerate() {
                    for (k, cpl) in coupling.iter().enumerate() {
                        let dot: f64 = cpl.iter().map(|&(i, v)| v * z[i]).sum();
                        s[(k, j)] -= dot;
                    }
                }
                (s, InteriorSolver::ConjugateGradient)
            }
        }
    };

    Ok(SchurReduction {
        s: symmetrize(s),
        a_bb,
        b_set,
        interior,
        dim: n,
        interior_rows,
        coupling,
        solver,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

impl SchurReduction {
    /// Full-space vector from a reduced one: `x_b = y`,
    /// `x_i = -B_ii^{-1} B_ib y`, solved to [`INTERIOR_TOL`].
    pub fn lift(&self, y: &[f64]) -> Result<Vec<f64>, SolverError> {
        let ni = self.interior.len();
        let mut x = vec![0.0; self.dim];
        for (k, &g) in self.b_set.iter().enumerate() {
            x[g] = y[k];
        }
        if ni == 0 {
            return Ok(x);
        }
        let mut rhs = vec![0.0; ni];
        for (j, cpl) in self.coupling.iter().enumerate() {
            for &(i, v) in cpl {
                rhs[i] -= v * y[j];
            }
        }
        let z = match &self.solver {
            InteriorSolver::Cholesky(chol) => {
                let mut z = chol.solve(&rhs);
                // iterative refinement if the direct solve falls short
                for _ in 0..3 {
                    if relative_residual(&self.interior_rows, &z, &rhs) <= INTERIOR_TOL {
                        break;
                    }
                    let az = crate::linsolve::matvec_rows(&self.interior_rows, &z);
                    let r: Vec<f64> = rhs.iter().zip(&az).map(|(b, a)| b - a).collect();
                    let dz = chol.solve(&r);
                    z.iter_mut().zip(&dz).for_each(|(a, d)| *a += d);
                }
                let res = relative_residual(&self.interior_rows, &z, &rhs);
                if res > INTERIOR_TOL {
                    return Err(SolverError::NoConvergence {
                        residual: res,
                        iterations: 3,
                    });
                }
                z
            }
            InteriorSolver::ConjugateGradient => {
                conjugate_gradient(&self.interior_rows, &rhs, None, INTERIOR_TOL, 20 * ni + 100)?
            }
        };
        for (k, &g) in self.interior.iter().enumerate() {
            x[g] = z[k];
        }
        Ok(x)
    }

    /// The `k` largest nonzero eigenvalues of the full pencil with
    /// `B`-orthonormal full-space eigenvectors.
    pub fn solve_largest(&self, k: usize) -> Result<Spectrum, SolverError> {
        let reduced = solve_pencil_largest(&self.a_bb, &self.s, k)?;
        let vectors = reduced
            .vectors
            .par_iter()
            .map(|y| self.lift(y.as_slice()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Spectrum {
            mu: reduced.mu,
            vectors,
            kernel_cut: reduced.kernel_cut,
        })
    }
}

/// Eigenpairs of a dense pencil `A y = mu S y`.
#[derive(Debug, Clone)]
pub struct ReducedSpectrum {
    /// Descending.
    pub mu: Vec<f64>,
    /// `S`-orthonormal.
    pub vectors: Vec<DVector<f64>>,
    pub kernel_cut: f64,
}

/// `k` largest eigenvalues of `A y = mu S y` for dense symmetric `A` (PSD) and
/// `S` (SPD), via `S = L L^T` and the symmetric eigenproblem of
/// `L^{-1} A L^{-T}`.
pub fn solve_pencil_largest(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    k: usize,
) -> Result<ReducedSpectrum, SolverError> {
    if a.shape() != s.shape() || a.nrows() != a.ncols() {
        return Err(SolverError::DimensionMismatch(a.nrows(), s.nrows()));
    }
    let chol = s.clone().cholesky().ok_or(SolverError::NotPositiveDefinite {
        pivot: usize::MAX,
        value: f64::NAN,
    })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or(SolverError::NotPositiveDefinite {
            pivot: usize::MAX,
            value: 0.0,
        })?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(SolverError::NotPositiveDefinite {
            pivot: usize::MAX,
            value: 0.0,
        })?;
    let (values, vectors_z) = symmetric_eigen(&symmetrize(c))?;

    // descending
    let order: Vec<usize> = (0..values.len()).rev().collect();
    let mu_max = order.first().map_or(0.0, |&i| values[i]);
    let kernel_cut = KERNEL_CUT_REL * mu_max.max(0.0);
    let available = order
        .iter()
        .take_while(|&&i| mu_max > 0.0 && values[i] > kernel_cut)
        .count();
    if k > available {
        return Err(SolverError::TooManyRequested {
            requested: k,
            available,
        });
    }

    let lt = l.transpose();
    let mut mu = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        mu.push(values[i]);
        let z = vectors_z.column(i).into_owned();
        let y = lt
            .solve_upper_triangular(&z)
            .ok_or(SolverError::NotPositiveDefinite {
                pivot: usize::MAX,
                value: 0.0,
            })?;
        vectors.push(y);
    }
    Ok(ReducedSpectrum {
        mu,
        vectors,
        kernel_cut,
    })
}

/// Computed eigenpairs of the full pencil.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Descending, all above `kernel_cut`.
    pub mu: Vec<f64>,
    /// Full-space eigenvectors, `B`-orthonormal.
    pub vectors: Vec<Vec<f64>>,
    pub kernel_cut: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// Schur reduction followed by [`SchurReduction::solve_largest`].
pub fn solve_largest(pencil: &Pencil, k: usize) -> Result<Spectrum, SolverError> {
    schur_reduce(pencil)?.solve_largest(k)
}

/// `lambda_i = 1/mu_i` for the first `k` entries, ascending.
pub fn to_lambda(spectrum: &Spectrum, k: usize) -> Result<Vec<f64>, SolverError> {
    if k > spectrum.mu.len() {
        return Err(SolverError::TooManyRequested {
            requested: k,
            available: spectrum.mu.len(),
        });
    }
    spectrum.mu[..k]
        .iter()
        .enumerate()
        .map(|(index, &mu)| {
            if mu <= spectrum.kernel_cut || mu <= 0.0 {
                Err(SolverError::KernelMode {
                    index,
                    value: mu,
                    cut: spectrum.kernel_cut,
                })
            } else {
                Ok(1.0 / mu)
            }
        })
        .collect()
}

/// Residual enclosure of one computed eigenvalue of the pencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    /// Computed eigenvalue `rho` of the pencil (mu-space).
    pub center: f64,
    /// Some pencil eigenvalue lies in `[center - radius, center + radius]`.
    pub radius: f64,
}

impl Enclosure {
    pub fn mu_interval(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    /// Corresponding interval for `lambda = 1/mu`; `None` when the enclosure
    /// reaches zero.
    pub fn lambda_interval(&self) -> Option<(f64, f64)> {
        let (lo, hi) = self.mu_interval();
        (lo > 0.0).then(|| (1.0 / hi, 1.0 / lo))
    }
}

/// Residual bound for an approximate eigenpair `(rho, x)` of `A x = mu B x`:
///
/// `radius = ||A x - rho B x||_2 / (floor(B) ||x||_2)`.
///
/// For `B` SPD there is an eigenvalue within `||r||_{B^{-1}} / ||x||_B` of
/// `rho`, and both norms are bounded through the smallest eigenvalue of `B`,
/// itself bounded below by `pencil.b_floor`. The residual is evaluated in
/// floating point without directed rounding, so the enclosure is
/// quasi-rigorous.
pub fn certify(pencil: &Pencil, rho: f64, x: &[f64]) -> Result<Enclosure, SolverError> {
    if !(pencil.b_floor > 0.0) {
        return Err(SolverError::CertificationUnavailable(format!(
            "lower bound on the spectrum of B is {:e}",
            pencil.b_floor
        )));
    }
    let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if xnorm == 0.0 {
        return Err(SolverError::CertificationUnavailable("zero vector".into()));
    }
    let ax = pencil.a.matvec(x);
    let bx = pencil.b.matvec(x);
    let rnorm = ax
        .iter()
        .zip(&bx)
        .map(|(a, b)| (a - rho * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(Enclosure {
        center: rho,
        radius: rnorm / (pencil.b_floor * xnorm),
    })
}

/// CSV dump `index,mu,lambda,radius` (one-based index; empty radius when
/// not certified).
pub fn spectrum_csv(spectrum: &Spectrum, enclosures: Option<&[Enclosure]>) -> String {
    let mut out = String::from("index,mu,lambda,radius\n");
    for (i, &mu) in spectrum.mu.iter().enumerate() {
        let radius = enclosures
            .and_then(|e| e.get(i))
            .map_or(String::new(), |e| format!("{:e}", e.radius));
        let _ = writeln!(out, "{},{:e},{:e},{}", i + 1, mu, 1.0 / mu, radius);
    }
    out
}
