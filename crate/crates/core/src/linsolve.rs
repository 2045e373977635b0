//! Sparse symmetric positive definite solves: reverse Cuthill-McKee ordering
//! with an envelope (profile) Cholesky factorisation, and Jacobi-preconditioned
//! conjugate gradients as a fallback.

use std::collections::VecDeque;

use crate::error::SolverError;

/// Full symmetric rows: `rows[i]` lists `(j, a_ij)` for all stored `j`,
/// including the diagonal.
pub type SymRows = Vec<Vec<(usize, f64)>>;

pub fn matvec_rows(rows: &SymRows, x: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Reverse Cuthill-McKee permutation; `perm[new] = old`.
pub fn reverse_cuthill_mckee(rows: &SymRows) -> Vec<usize> {
    let n = rows.len();
    let degree: Vec<usize> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().filter(|&&(j, _)| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, mark: &mut Vec<usize>, stamp: usize| -> (usize, usize) {
        // returns (eccentricity, a minimum-degree node of the last level)
        let mut queue = VecDeque::from([start]);
        mark[start] = stamp;
        let mut depth = 0;
        let mut last_level = vec![start];
        while !queue.is_empty() {
            let mut next = Vec::new();
            for _ in 0..queue.len() {
                let u = queue.pop_front().unwrap();
                for &(v, _) in &rows[u] {
                    if mark[v] != stamp && v != u {
                        mark[v] = stamp;
                        next.push(v);
                        queue.push_back(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            depth += 1;
            last_level = next;
        }
        let far = *last_level.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        (depth, far)
    };

    let mut mark = vec![usize::MAX; n];
    let mut stamp = 0;
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start node of this component
        let mut start = seed;
        let (mut ecc, mut far) = bfs_levels(start, &mut mark, stamp);
        stamp += 1;
        for _ in 0..8 {
            let (e, f) = bfs_levels(far, &mut mark, stamp);
            stamp += 1;
            if e <= ecc {
                break;
            }
            start = far;
            ecc = e;
            far = f;
        }
        let begin = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = begin;
        while head < order.len() {
            let u = order[head];
            head += 1;
            let mut nbrs: Vec<usize> = rows[u].iter().map(|&(v, _)| v).filter(|&v| !visited[v]).collect();
            nbrs.sort_by_key(|&v| (degree[v], v));
            for v in nbrs {
                visited[v] = true;
                order.push(v);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `P A P^T = L L^T` stored row by row over the envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// `inv[old] = new`
    inv: Vec<usize>,
    /// First stored column of each (permuted) row.
    first: Vec<usize>,
    /// Start of each row in `data`; row `i` holds columns `first[i]..=i`.
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(rows: &SymRows) -> Result<Self, SolverError> {
        let perm = reverse_cuthill_mckee(rows);
        Self::factor_with_permutation(rows, perm)
    }

    pub fn factor_with_permutation(rows: &SymRows, perm: Vec<usize>) -> Result<Self, SolverError> {
        let n = rows.len();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &(j, _) in &rows[old] {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0f64; offset[n]];
        for (new, &old) in perm.iter().enumerate() {
            for &(j, v) in &rows[old] {
                let c = inv[j];
                if c <= new {
                    data[offset[new] + c - first[new]] += v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[offset[i] + j - fi];
                if k0 < j {
                    let ri = &data[offset[i] + k0 - fi..offset[i] + j - fi];
                    let rj = &data[offset[j] + k0 - fj..offset[j] + j - fj];
                    s -= ri.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>();
                }
                if j < i {
                    data[offset[i] + j - fi] = s / data[offset[j + 1] - 1];
                } else {
                    if !(s > 0.0) {
                        return Err(SolverError::NotPositiveDefinite {
                            pivot: perm[i],
                            value: s,
                        });
                    }
                    data[offset[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self {
            perm,
            inv,
            first,
            offset,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    fn diag(&self, i: usize) -> f64 {
        self.data[self.offset[i + 1] - 1]
    }

    /// `y = L^{-1} P b`, returned in permuted ordering. Leading zeros of the
    /// permuted right-hand side are skipped.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        let start = y.iter().position(|&v| v != 0.0).unwrap_or(n);
        for i in start..n {
            let fi = self.first[i].max(start);
            let row = &self.data[self.offset[i] + fi - self.first[i]..self.offset[i + 1] - 1];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.diag(i);
        }
        y
    }

    /// Solves `L^T P x = y` for `y` in permuted ordering; `x` in original
    /// ordering.
    pub fn backward(&self, mut y: Vec<f64>) -> Vec<f64> {
        let n = self.dim();
        for i in (0..n).rev() {
            y[i] /= self.diag(i);
            let xi = y[i];
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1] - 1];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (old, &new) in self.inv.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(self.forward(b))
    }
}

/// Jacobi-preconditioned conjugate gradients to relative residual `tol`.
pub fn conjugate_gradient(
    rows: &SymRows,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, SolverError> {
    let n = rows.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let dinv: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d = r.iter().find(|&&(j, _)| j == i).map_or(0.0, |&(_, v)| v);
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let ax = matvec_rows(rows, &x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut res = norm(&r) / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok(x);
        }
        let ap = matvec_rows(rows, &p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(SolverError::NoConvergence {
                residual: res,
                iterations: it,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r) / bnorm;
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(SolverError::NoConvergence {
            residual: res,
            iterations: max_iter,
        })
    }
}

/// Relative residual `||b - A x|| / ||b||` (zero for `b = 0` and `x = 0`).
pub fn relative_residual(rows: &SymRows, x: &[f64], b: &[f64]) -> f64 {
    let ax = matvec_rows(rows, x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bn = norm(b);
    if bn == 0.0 {
        norm(&r)
    } else {
        norm(&r) / bn
    }
}
