//! Inner solver for the real SPD subsystems that every outer iteration
//! produces: a cached sparse Cholesky factorization (up-looking, elimination
//! tree based) or, opt-in, unpreconditioned conjugate gradients.

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::sparse::SparseSymMatrix;
use crate::vector::{axpy, dot, norm2, ComplexVector};
use crate::{Error, Result};

/// How the inner SPD systems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSolveKind {
    DirectCholesky,
    ConjugateGradient,
}

/// Row/column ordering applied before a direct factorization. Iteration
/// counts of the outer methods are permutation-invariant; this only trades
/// fill for setup cost.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Ordering {
    #[default]
    Natural,
    ReverseCuthillMcKee,
    /// Caller-provided permutation, `perm[new] = old`.
    Custom(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolveChoice {
    pub kind: InnerSolveKind,
    /// Relative residual target for CG.
    pub cg_tolerance: f64,
    /// CG iteration cap; `None` means `10 * n`.
    pub cg_max_iterations: Option<usize>,
    pub ordering: Ordering,
}

impl Default for InnerSolveChoice {
    fn default() -> Self {
        Self {
            kind: InnerSolveKind::DirectCholesky,
            cg_tolerance: 1e-12,
            cg_max_iterations: None,
            ordering: Ordering::Natural,
        }
    }
}

impl InnerSolveChoice {
    pub fn direct() -> Self {
        Self::default()
    }

    pub fn conjugate_gradient() -> Self {
        Self {
            kind: InnerSolveKind::ConjugateGradient,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cg_tolerance.is_nan() || self.cg_tolerance <= 0.0 || self.cg_tolerance >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "cg tolerance {} not in (0, 1)",
                self.cg_tolerance
            )));
        }
        if let Some(m) = self.cg_max_iterations {
            if m == 0 {
                return Err(Error::InvalidConfig(
                    "cg max iterations must be >= 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Sparse lower Cholesky factor in column form. `cols[j]` holds the strictly
/// sub-diagonal entries of column `j` with ascending row indices.
#[derive(Debug)]
struct CholeskyFactor {
    diag: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    /// `perm[new] = old`
    perm: Vec<usize>,
}

#[derive(Debug)]
enum Backend {
    Direct(CholeskyFactor),
    Iterative {
        matrix: SparseSymMatrix,
        tolerance: f64,
        max_iterations: usize,
    },
}

/// Handle for repeated solves against one SPD matrix. Immutable after
/// construction; concurrent solves are fine.
#[derive(Debug)]
pub struct SpdFactorization {
    n: usize,
    fingerprint: u64,
    kind: InnerSolveKind,
    backend: Backend,
    solves: AtomicU64,
}

/// Eagerly factorize (direct mode) or record the matrix (iterative mode).
pub fn factorize(a: &SparseSymMatrix, choice: &InnerSolveChoice) -> Result<SpdFactorization> {
    choice.validate()?;
    let n = a.order();
    let backend = match choice.kind {
        InnerSolveKind::DirectCholesky => {
            let perm = match &choice.ordering {
                Ordering::Natural => (0..n).collect(),
                Ordering::ReverseCuthillMcKee => reverse_cuthill_mckee(a),
                Ordering::Custom(p) => {
                    if p.len() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            got: p.len(),
                        });
                    }
                    p.clone()
                }
            };
            Backend::Direct(sparse_cholesky(a, perm)?)
        }
        InnerSolveKind::ConjugateGradient => Backend::Iterative {
            matrix: a.clone(),
            tolerance: choice.cg_tolerance,
            max_iterations: choice.cg_max_iterations.unwrap_or(10 * n.max(1)),
        },
    };
    Ok(SpdFactorization {
        n,
        fingerprint: fingerprint(a),
        kind: choice.kind,
        backend,
        solves: AtomicU64::new(0),
    })
}

impl SpdFactorization {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> InnerSolveKind {
        self.kind
    }

    /// Dimension-plus-checksum identity of the factored matrix.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Number of `solve_real` calls served so far.
    pub fn solve_count(&self) -> u64 {
        self.solves.load(AtomicOrdering::Relaxed)
    }

    /// Solve `A x = rhs` for one real right-hand side.
    pub fn solve_real(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        self.solves.fetch_add(1, AtomicOrdering::Relaxed);
        match &self.backend {
            Backend::Direct(f) => Ok(f.solve(rhs)),
            Backend::Iterative {
                matrix,
                tolerance,
                max_iterations,
            } => cg_solve(matrix, rhs, *tolerance, *max_iterations),
        }
    }

    /// Solve for a complex right-hand side: one factorization, two real
    /// solve passes.
    pub fn solve_complex(&self, rhs: &ComplexVector) -> Result<ComplexVector> {
        let re = self.solve_real(&rhs.re)?;
        let im = self.solve_real(&rhs.im)?;
        Ok(ComplexVector { re, im })
    }

    /// Relative Frobenius error of `L L^T` against the permuted input, for
    /// direct factorizations of modest order. `None` in iterative mode.
    pub fn reconstruction_error(&self, a: &SparseSymMatrix) -> Option<f64> {
        let f = match &self.backend {
            Backend::Direct(f) => f,
            Backend::Iterative { .. } => return None,
        };
        let n = self.n;
        // Dense L L^T in permuted coordinates.
        let mut llt = vec![0.0; n * n];
        let mut colk: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            colk.clear();
            colk.push((j, f.diag[j]));
            colk.extend_from_slice(&f.cols[j]);
            for &(i, a_) in &colk {
                for &(k, b_) in &colk {
                    llt[i * n + k] += a_ * b_;
                }
            }
        }
        let mut err = 0.0;
        let mut nrm = 0.0;
        for i in 0..n {
            for j in 0..n {
                let aij = a.get(f.perm[i], f.perm[j]);
                let d = llt[i * n + j] - aij;
                err += d * d;
                nrm += aij * aij;
            }
        }
        Some((err / nrm.max(1e-300)).sqrt())
    }
}

fn fingerprint(a: &SparseSymMatrix) -> u64 {
    let mut h: u64 = a.order() as u64;
    for (p, (&j, &v)) in a.col_idx().iter().zip(a.values()).enumerate() {
        let bits = v.to_bits();
        h = h
            .rotate_left(7)
            .wrapping_add(bits ^ ((j as u64) << 1) ^ (p as u64));
    }
    h
}

/// Up-looking sparse Cholesky of `P A P^T`. Fails with the pivot index on
/// the first nonpositive pivot.
fn sparse_cholesky(a: &SparseSymMatrix, perm: Vec<usize>) -> Result<CholeskyFactor> {
    let n = a.order();
    let mut inv_perm = vec![0usize; n];
    for (newi, &oldi) in perm.iter().enumerate() {
        inv_perm[oldi] = newi;
    }

    // Upper triangle of B = P A P^T in column form: column k lists (i, v)
    // with i <= k. Row perm[k] of A supplies column k of B.
    let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for k in 0..n {
        for (oldj, v) in a.row(perm[k]) {
            let i = inv_perm[oldj];
            if i <= k {
                upper[k].push((i, v));
            }
        }
    }

    let parent = elimination_tree(n, &upper);

    let mut diag = vec![0.0f64; n];
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut x = vec![0.0f64; n];
    let mut marks = vec![usize::MAX; n];
    let mut stack = vec![0usize; n];
    let mut path = vec![0usize; n];

    for k in 0..n {
        // Scatter column k of the upper triangle; collect the reach of its
        // pattern through the elimination tree (topological order).
        let mut top = n;
        marks[k] = k;
        let mut d = 0.0;
        for &(i, v) in &upper[k] {
            if i == k {
                d = v;
                continue;
            }
            x[i] = v;
            let mut len = 0;
            let mut j = i;
            while marks[j] != k {
                path[len] = j;
                len += 1;
                marks[j] = k;
                j = parent[j];
            }
            while len > 0 {
                len -= 1;
                top -= 1;
                stack[top] = path[len];
            }
        }
        // Sparse triangular solve along the pattern.
        for &j in &stack[top..n] {
            let lkj = x[j] / diag[j];
            x[j] = 0.0;
            for &(i, lij) in &cols[j] {
                x[i] -= lij * lkj;
            }
            d -= lkj * lkj;
            cols[j].push((k, lkj));
        }
        if d <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: k });
        }
        diag[k] = d.sqrt();
    }

    Ok(CholeskyFactor { diag, cols, perm })
}

/// Elimination tree of the permuted matrix from its upper-triangle columns.
fn elimination_tree(n: usize, upper: &[Vec<(usize, f64)>]) -> Vec<usize> {
    let mut parent = vec![usize::MAX; n];
    let mut ancestor = vec![usize::MAX; n];
    for (k, col) in upper.iter().enumerate() {
        for &(i, _) in col {
            let mut j = i;
            while j != usize::MAX && j < k {
                let next = ancestor[j];
                ancestor[j] = k;
                if next == usize::MAX {
                    parent[j] = k;
                }
                j = next;
            }
        }
    }
    parent
}

impl CholeskyFactor {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = rhs[self.perm[i]];
        }
        // Forward: L y = P rhs
        for j in 0..n {
            y[j] /= self.diag[j];
            let yj = y[j];
            for &(i, lij) in &self.cols[j] {
                y[i] -= lij * yj;
            }
        }
        // Backward: L^T w = y
        for j in (0..n).rev() {
            let mut s = y[j];
            for &(i, lij) in &self.cols[j] {
                s -= lij * y[i];
            }
            y[j] = s / self.diag[j];
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

/// Unpreconditioned conjugate gradients from the zero guess.
fn cg_solve(a: &SparseSymMatrix, b: &[f64], tol: f64, max_iterations: usize) -> Result<Vec<f64>> {
    let n = a.order();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 1..=max_iterations {
        a.spmv_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: it - 1 });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() / bnorm <= tol {
            return Ok(x);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::CgDidNotConverge {
        iterations: max_iterations,
        relative_residual: rr.sqrt() / bnorm,
    })
}

/// Reverse Cuthill-McKee ordering: BFS from a low-degree node, neighbours by
/// ascending degree, order reversed. Returns `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSymMatrix) -> Vec<usize> {
    let n = a.order();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    while let Some(start) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]) {
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = a
                .row(u)
                .map(|(j, _)| j)
                .filter(|&j| !visited[j])
                .collect();
            nbrs.sort_unstable_by_key(|&j| degree[j]);
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}
