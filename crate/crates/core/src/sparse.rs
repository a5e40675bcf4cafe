//! Compressed-row storage for symmetric real matrices. The full pattern
//! (both triangles) is stored; symmetry is validated on construction.

use crate::dense::DenseMatrix;
use crate::{Error, Result};

/// Relative tolerance for the numeric symmetry check `|a_ij - a_ji| <= tol * max(1, |a_ij|)`.
const SYMMETRY_TOL: f64 = 1e-12;

/// Sparse symmetric matrix in compressed-row form, full pattern.
///
/// Invariants enforced on construction: `row_ptr` is monotone, column indices
/// are sorted and in range within each row, and the matrix is structurally
/// and numerically symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Build from triplets `(row, col, value)`. Duplicate coordinates are
    /// summed, explicit zeros are kept, and symmetry is checked.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: i.max(j) + 1,
                });
            }
        }
        // Count, fill, then sort and merge duplicates row by row.
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0f64; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for i in 0..n {
            let lo = counts[i];
            let hi = counts[i + 1];
            let mut row: Vec<(usize, f64)> =
                cols[lo..hi].iter().copied().zip(vals[lo..hi].iter().copied()).collect();
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            for (j, v) in merged {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.check_symmetry()?;
        Ok(m)
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Zero matrix of order `n` (empty pattern).
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Symmetric tridiagonal matrix `tridiag(lower, diag, upper)` of order `n`.
    /// The off-diagonal bands must agree.
    pub fn tridiag(n: usize, lower: f64, diag: f64, upper: f64) -> Result<Self> {
        if lower != upper {
            return Err(Error::AsymmetricBands { lower, upper });
        }
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, lower));
            }
            t.push((i, i, diag));
            if i + 1 < n {
                t.push((i, i + 1, upper));
            }
        }
        Self::from_triplets(n, &t)
    }

    /// Kronecker sum `I (x) V + V (x) I` of order `m^2` for a square `V` of
    /// order `m`: the 2D extension of the 1D stencil `V`.
    pub fn kron_sum(v: &SparseSymMatrix) -> Result<Self> {
        let m = v.n;
        let n = m * m;
        let mut t = Vec::with_capacity(2 * v.nnz() * m);
        // I (x) V: within-block coupling, block b occupies rows b*m..(b+1)*m.
        for b in 0..m {
            for i in 0..m {
                for (j, val) in v.row(i) {
                    t.push((b * m + i, b * m + j, val));
                }
            }
        }
        // V (x) I: block coupling, V[b][c] couples rows b*m+i with c*m+i.
        for b in 0..m {
            for (c, val) in v.row(b) {
                for i in 0..m {
                    t.push((b * m + i, c * m + i, val));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterator over the `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// Entry `(i, j)` or zero if absent from the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => 0.0,
        }
    }

    fn check_symmetry(&self) -> Result<()> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let vt = self.get(j, i);
                // A structurally missing transpose entry shows up as an exact
                // zero here and fails the same test unless v is tiny too.
                if (v - vt).abs() > SYMMETRY_TOL * 1.0f64.max(v.abs()) {
                    return Err(Error::SymmetryViolation { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Sparse matrix-vector product `A v`.
    pub fn spmv(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.spmv_into(v, &mut out);
        Ok(out)
    }

    /// `out = A v`, no allocation. Lengths must already match.
    pub fn spmv_into(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut s = 0.0;
            for p in lo..hi {
                s += self.values[p] * v[self.col_idx[p]];
            }
            out[i] = s;
        }
    }

    /// Linear combination `a*self + b*other` over the union pattern.
    pub fn linear_combination(&self, a: f64, b: f64, other: &SparseSymMatrix) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push((i, j, a * v));
            }
            for (j, v) in other.row(i) {
                t.push((i, j, b * v));
            }
        }
        Self::from_triplets(self.n, &t)
    }

    /// `a*self + s*I`.
    pub fn shift(&self, a: f64, s: f64) -> Self {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push((i, j, a * v));
            }
            t.push((i, i, s));
        }
        Self::from_triplets(self.n, &t).expect("shift preserves symmetry")
    }

    /// Scale all entries by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.values {
            *v *= c;
        }
        m
    }

    /// Dense copy, guarded by the oracle cap.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.n > crate::ORACLE_CAP {
            return Err(Error::OracleCapExceeded {
                n: self.n,
                cap: crate::ORACLE_CAP,
            });
        }
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        Ok(d)
    }
}
