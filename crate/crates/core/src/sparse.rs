//! Symmetric sparse matrices stored as their upper triangle.

use std::fmt::Write as _;

use nalgebra::DMatrix;

/// Accumulates `(row, col, value)` contributions of a symmetric matrix.
/// Entries are normalised to `row <= col`; duplicates are summed on
/// [`finalize`](Self::finalize).
#[derive(Debug, Clone)]
pub struct SymTripletBuilder {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymTripletBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self {
            dim,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row.min(col), row.max(col), value));
    }

    /// Adds a dense local block `local[a][b]` at global indices `map`. Only the
    /// upper triangle of the block is read.
    pub fn add_block<const N: usize>(&mut self, map: &[usize; N], local: &[[f64; N]; N]) {
        for a in 0..N {
            for b in a..N {
                if local[a][b] != 0.0 {
                    self.add(map[a], map[b], local[a][b]);
                }
            }
        }
    }

    /// Sorts by coordinate and sums duplicates. The sort is stable, so the
    /// summation order (and therefore every bit of the result) depends only
    /// on the insertion order.
    pub fn finalize(mut self) -> SparseSymMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut rows = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymMatrix {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Finalised symmetric matrix: upper triangle in compressed rows with unique,
/// sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut b = SymTripletBuilder::new(dim);
        for i in 0..dim {
            b.add(i, i, 1.0);
        }
        b.finalize()
    }

    /// Upper triangle of a dense symmetric matrix (entries that are exactly
    /// zero are skipped).
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut b = SymTripletBuilder::new(m.nrows());
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                if m[(i, j)] != 0.0 {
                    b.add(i, j, m[(i, j)]);
                }
            }
        }
        b.finalize()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored upper-triangle entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries `(row, col, value)` with `row <= col`, sorted.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = (row.min(col), row.max(col));
        let span = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match span.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for (r, c, v) in self.iter() {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// Indices of rows (equivalently columns) holding a nonzero entry.
    pub fn row_support(&self) -> Vec<usize> {
        let mut on = vec![false; self.dim];
        for (r, c, v) in self.iter() {
            if v != 0.0 {
                on[r] = true;
                on[c] = true;
            }
        }
        (0..self.dim).filter(|&i| on[i]).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }

    /// Dense principal submatrix on `idx`.
    pub fn dense_submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        let mut pos = vec![usize::MAX; self.dim];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = DMatrix::zeros(idx.len(), idx.len());
        for (r, c, v) in self.iter() {
            let (pr, pc) = (pos[r], pos[c]);
            if pr != usize::MAX && pc != usize::MAX {
                m[(pr, pc)] = v;
                m[(pc, pr)] = v;
            }
        }
        m
    }

    /// Full symmetric adjacency: for each row, `(col, value)` over both
    /// triangles, columns ascending.
    pub fn full_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        for (r, c, v) in self.iter() {
            rows[r].push((c, v));
            if r != c {
                rows[c].push((r, v));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
        }
        rows
    }

    /// `min_i (a_ii - sum_{j != i} |a_ij|)`; a lower bound on the smallest
    /// eigenvalue whenever it is positive.
    pub fn gershgorin_floor(&self) -> f64 {
        let mut radius = vec![0.0f64; self.dim];
        let mut diag = vec![0.0f64; self.dim];
        for (r, c, v) in self.iter() {
            if r == c {
                diag[r] = v;
            } else {
                radius[r] += v.abs();
                radius[c] += v.abs();
            }
        }
        diag.iter()
            .zip(&radius)
            .map(|(d, r)| d - r)
            .fold(f64::INFINITY, f64::min)
    }

    /// Coordinate text dump: `<dim>` followed by `<row> <col> <value>` lines
    /// (upper triangle, full precision).
    pub fn to_coordinate_string(&self) -> String {
        let mut out = format!("{}\n", self.dim);
        for (r, c, v) in self.iter() {
            let _ = writeln!(out, "{r} {c} {v:e}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_summed_and_sorted() {
        let mut b = SymTripletBuilder::new(3);
        b.add(2, 0, 1.0);
        b.add(0, 2, 0.5);
        b.add(1, 1, 2.0);
        b.add(0, 0, 1.0);
        let m = b.finalize();
        assert_eq!(m.nnz(), 3);
        let e: Vec<_> = m.iter().collect();
        assert_eq!(e, vec![(0, 0, 1.0), (0, 2, 1.5), (1, 1, 2.0)]);
        assert_eq!(m.get(2, 0), 1.5);
        assert_eq!(m.get(1, 2), 0.0);
    }

    #[test]
    fn matvec_uses_both_triangles() {
        let d = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 4.0]);
        let m = SparseSymMatrix::from_dense(&d);
        let x = [1.0, -2.0, 0.5];
        let y = m.matvec(&x);
        let want = &d * nalgebra::DVector::from_column_slice(&x);
        for i in 0..3 {
            assert!((y[i] - want[i]).abs() < 1e-15);
        }
        assert_eq!(m.to_dense(), d);
    }

    #[test]
    fn gershgorin_examples() {
        assert_eq!(SparseSymMatrix::identity(4).gershgorin_floor(), 1.0);
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert_eq!(SparseSymMatrix::from_dense(&d).gershgorin_floor(), 1.0);
    }

    #[test]
    fn coordinate_dump() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = SparseSymMatrix::from_dense(&d).to_coordinate_string();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "2");
        assert_eq!(lines.len(), 4);
        let v: f64 = lines[2].split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 1.0);
    }
}
