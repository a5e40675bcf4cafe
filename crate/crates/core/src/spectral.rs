//! Spectral machinery: generalized eigenvalues of the pencil `(T, W)`, the
//! scalar amplification function of the two-step iteration, the
//! optimal-parameter formulas, dense iteration-matrix and splitting oracles,
//! and experimental grid-search tuning.

use num_complex::Complex64;

use crate::dense::{DenseComplexMatrix, DenseMatrix};
use crate::problems::Problem;
use crate::solver::{run, MethodKind, SolverConfig};
use crate::sparse::SparseSymMatrix;
use crate::{Error, Result, ORACLE_CAP};

/// Eigenvalues within this distance of 1 are assigned to the lower block
/// when classifying the spectrum.
const UNIT_TOL: f64 = 1e-12;

/// Where the generalized spectrum sits relative to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumCase {
    AllBelowOne,
    AllAboveOne,
    Straddling,
}

/// Working quantities of the optimal-parameter computation: `beta = mu + 1/mu`
/// per eigenvalue, the case tag, and the split index for the straddling case
/// (`mus[k] <= 1 <= mus[k+1]`).
#[derive(Debug, Clone)]
pub struct OptimalAlphaWork {
    pub betas: Vec<f64>,
    pub case: SpectrumCase,
    pub split_index: Option<usize>,
}

/// Spectral summary: sorted generalized eigenvalues, the selected bracket
/// `(gamma, delta)`, `eta`, the two reciprocal optimal parameters and the
/// optimal spectral radius.
#[derive(Debug, Clone)]
pub struct SpectralInfo {
    pub mus: Vec<f64>,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
    pub alpha_opt_minus: f64,
    pub alpha_opt_plus: f64,
    pub rho_opt: f64,
    pub case: SpectrumCase,
}

/// Grid-search outcome: the tuned parameter and the full `(alpha, iterations)`
/// trace.
#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best_alpha: f64,
    pub best_iterations: usize,
    pub grid: Vec<(f64, usize)>,
}

/// All eigenvalues of the symmetric-definite pencil `T v = mu W v`
/// (equivalently of `S = W^{-1/2} T W^{-1/2}`), ascending. Dense Cholesky
/// reduction to a standard symmetric eigenproblem.
pub fn generalized_eigs(w: &SparseSymMatrix, t: &SparseSymMatrix) -> Result<Vec<f64>> {
    let n = w.order();
    if t.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.order(),
        });
    }
    if n > ORACLE_CAP {
        return Err(Error::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let wd = w.to_dense()?;
    let td = t.to_dense()?;
    let l = wd.cholesky()?;
    // M = L^{-1} T L^{-T}: forward-substitute twice.
    let y = lower_solve_matrix(&l, &td);
    let m = lower_solve_matrix(&l, &y.transpose());
    // Symmetrize away the last rounding before the eigensolve.
    let mut s = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    Ok(s.sym_eigenvalues())
}

/// Solve `L X = B` for lower-triangular `L`, dense right-hand sides.
fn lower_solve_matrix(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = l.rows();
    let cols = b.cols();
    let mut x = DenseMatrix::zeros(n, cols);
    for c in 0..cols {
        for i in 0..n {
            let mut s = b[(i, c)];
            for j in 0..i {
                s -= l[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// The scalar amplification factor of one full two-step sweep on the
/// eigenvalue `mu`: `(mu - a)(1 - a mu) / ((mu + a)(1 + a mu))`.
pub fn scalar_amplification(mu: f64, alpha: f64) -> f64 {
    (mu - alpha) * (1.0 - alpha * mu) / ((mu + alpha) * (1.0 + alpha * mu))
}

/// Spectral radius of the two-step iteration matrix over the given
/// generalized spectrum: `max_j |lambda_{mu_j}(alpha)|`.
pub fn tscsp_spectral_radius(mus: &[f64], alpha: f64) -> Result<f64> {
    if mus.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    Ok(mus
        .iter()
        .map(|&mu| scalar_amplification(mu, alpha).abs())
        .fold(0.0, f64::max))
}

/// Classify a strictly positive spectrum against 1 and compute the betas.
pub fn classify_spectrum(mus: &[f64]) -> Result<OptimalAlphaWork> {
    if mus.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    for &mu in mus {
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::NonpositiveEigenvalue { value: mu });
        }
    }
    let mut sorted = mus.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let betas = sorted.iter().map(|&mu| mu + 1.0 / mu).collect();
    let has_below = sorted[0] < 1.0 - UNIT_TOL;
    let has_above = *sorted.last().unwrap() > 1.0 + UNIT_TOL;
    let (case, split_index) = match (has_below, has_above) {
        (_, false) => (SpectrumCase::AllBelowOne, None),
        (false, true) => (SpectrumCase::AllAboveOne, None),
        (true, true) => {
            // Last index still on the lower side; near-1 eigenvalues belong
            // to the lower block.
            let k = sorted
                .iter()
                .rposition(|&mu| mu <= 1.0 + UNIT_TOL)
                .expect("has_below implies a lower element");
            (SpectrumCase::Straddling, Some(k))
        }
    };
    Ok(OptimalAlphaWork {
        betas,
        case,
        split_index,
    })
}

/// Optimal parameters for the two-step iteration.
///
/// Bracket selection: with the spectrum entirely on one side of 1, take
/// `gamma = mu_1`, `delta = mu_n`; with a straddling spectrum split at `k`,
/// take `(gamma, delta) = (mu_{k+1}, mu_n)` when `mu_1 mu_n >= 1` and
/// `(mu_1, mu_k)` otherwise. Then `eta = sqrt((1 + gamma^2)(1 + delta^2) /
/// (gamma delta))` and the optimal parameters are the reciprocal roots of
/// `alpha^2 - eta alpha + 1 = 0`.
pub fn optimal_alpha(mus: &[f64]) -> Result<SpectralInfo> {
    let work = classify_spectrum(mus)?;
    let mut sorted = mus.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let (gamma, delta) = match work.case {
        SpectrumCase::AllBelowOne | SpectrumCase::AllAboveOne => (sorted[0], sorted[n - 1]),
        SpectrumCase::Straddling => {
            let k = work.split_index.unwrap();
            if sorted[0] * sorted[n - 1] >= 1.0 {
                (sorted[k + 1], sorted[n - 1])
            } else {
                (sorted[0], sorted[k])
            }
        }
    };
    let eta = ((1.0 + gamma * gamma) * (1.0 + delta * delta) / (gamma * delta)).sqrt();
    let disc = (eta * eta - 4.0).max(0.0);
    let alpha_plus = 0.5 * (eta + disc.sqrt());
    // The stable root: the pair multiplies to 1 by Vieta.
    let alpha_minus = 1.0 / alpha_plus;
    let rho_opt =
        ((delta * delta - eta * delta + 1.0) / (delta * delta + eta * delta + 1.0)).abs();
    Ok(SpectralInfo {
        mus: sorted,
        gamma,
        delta,
        eta,
        alpha_opt_minus: alpha_minus,
        alpha_opt_plus: alpha_plus,
        rho_opt,
        case: work.case,
    })
}

/// Dense iteration matrix of one full outer sweep of the given method.
///
/// Orders match the state space: `n` for the four complex-form methods, `2n`
/// for the real block form of GSOR.
pub fn dense_iteration_matrix(
    w: &SparseSymMatrix,
    t: &SparseSymMatrix,
    alpha: f64,
    method: MethodKind,
) -> Result<DenseComplexMatrix> {
    let n = w.order();
    if n > ORACLE_CAP {
        return Err(Error::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let wd = w.to_dense()?;
    let td = t.to_dense()?;
    let comb = |aw: f64, at: f64| -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = aw * wd[(i, j)] + at * td[(i, j)];
            }
        }
        m
    };
    let shift_c = |scale_w: Complex64, diag: Complex64, from_t: bool| -> DenseComplexMatrix {
        let mut m = DenseComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = if from_t { td[(i, j)] } else { wd[(i, j)] };
                m[(i, j)] = scale_w * v;
            }
            m[(i, i)] += diag;
        }
        m
    };
    match method {
        MethodKind::Tscsp => {
            // (W + aT)^{-1} (T - aW) (aW + T)^{-1} (W - aT), a real matrix.
            let x1 = comb(alpha, 1.0).lu_solve_matrix(&comb(1.0, -alpha))?;
            let y = comb(-alpha, 1.0).matmul(&x1);
            let g = comb(1.0, alpha).lu_solve_matrix(&y)?;
            Ok(g.to_complex())
        }
        MethodKind::Scsp => {
            // i (aW + T)^{-1} (W - aT)
            let x1 = comb(alpha, 1.0).lu_solve_matrix(&comb(1.0, -alpha))?;
            Ok(x1.to_complex().scaled(Complex64::new(0.0, 1.0)))
        }
        MethodKind::Mhss => {
            // (aI + T)^{-1} (aI + iW) (aI + W)^{-1} (aI - iT)
            let i = Complex64::new(0.0, 1.0);
            let a = Complex64::new(alpha, 0.0);
            let a_w = shift_c(Complex64::new(1.0, 0.0), a, false);
            let a_t = shift_c(Complex64::new(1.0, 0.0), a, true);
            let a_minus_it = shift_c(-i, a, true);
            let a_plus_iw = shift_c(i, a, false);
            let u = a_w.lu_solve_matrix(&a_minus_it)?;
            let v = a_plus_iw.matmul(&u);
            a_t.lu_solve_matrix(&v)
        }
        MethodKind::Pmhss => {
            // (aW + T)^{-1} (a + i) W ((a+1) W)^{-1} (aW - iT)
            let i = Complex64::new(0.0, 1.0);
            let zero = Complex64::new(0.0, 0.0);
            let aw_minus_it = {
                let mut m = shift_c(-i, zero, true);
                for r in 0..n {
                    for c in 0..n {
                        m[(r, c)] += Complex64::new(alpha * wd[(r, c)], 0.0);
                    }
                }
                m
            };
            let w_scaled = shift_c(Complex64::new(alpha + 1.0, 0.0), zero, false);
            let u = w_scaled.lu_solve_matrix(&aw_minus_it)?;
            let v = shift_c(Complex64::new(alpha, 1.0), zero, false).matmul(&u);
            comb(alpha, 1.0).to_complex().lu_solve_matrix(&v)
        }
        MethodKind::Gsor => {
            // Real 2n x 2n block map on (x; y) with Shat = W^{-1} T:
            //   x' = (1-a) x + a Shat y
            //   y' = -a(1-a) Shat x + ((1-a) I - a^2 Shat^2) y
            let shat = wd.lu_solve_matrix(&td)?;
            let shat2 = shat.matmul(&shat);
            let mut g = DenseComplexMatrix::zeros(2 * n, 2 * n);
            for r in 0..n {
                g[(r, r)] = Complex64::new(1.0 - alpha, 0.0);
                g[(n + r, n + r)] = Complex64::new(1.0 - alpha, 0.0);
                for c in 0..n {
                    g[(r, n + c)] = Complex64::new(alpha * shat[(r, c)], 0.0);
                    g[(n + r, c)] = Complex64::new(-alpha * (1.0 - alpha) * shat[(r, c)], 0.0);
                    g[(n + r, n + c)] += Complex64::new(-alpha * alpha * shat2[(r, c)], 0.0);
                }
            }
            Ok(g)
        }
    }
}

/// Spectral radius of the dense two-step iteration matrix computed
/// independently of the scalar formula: build the matrix from the sweep
/// composition, conjugate with `W^{1/2}` (an exact similarity), and
/// eigensolve the resulting symmetric matrix.
pub fn dense_tscsp_radius(
    w: &SparseSymMatrix,
    t: &SparseSymMatrix,
    alpha: f64,
) -> Result<f64> {
    let n = w.order();
    if n > ORACLE_CAP {
        return Err(Error::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let g = {
        let wd = w.to_dense()?;
        let td = t.to_dense()?;
        let comb = |aw: f64, at: f64| -> DenseMatrix {
            let mut m = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = aw * wd[(i, j)] + at * td[(i, j)];
                }
            }
            m
        };
        let x1 = comb(alpha, 1.0).lu_solve_matrix(&comb(1.0, -alpha))?;
        let y = comb(-alpha, 1.0).matmul(&x1);
        comb(1.0, alpha).lu_solve_matrix(&y)?
    };
    // W^{1/2} via the eigendecomposition of W.
    let (evals, evecs) = w.to_dense()?.sym_eigen();
    if evals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { pivot: 0 });
    }
    let mut w_half = DenseMatrix::zeros(n, n);
    let mut w_half_inv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            let mut si = 0.0;
            for k in 0..n {
                let r = evals[k].sqrt();
                s += evecs[(i, k)] * r * evecs[(j, k)];
                si += evecs[(i, k)] / r * evecs[(j, k)];
            }
            w_half[(i, j)] = s;
            w_half_inv[(i, j)] = si;
        }
    }
    let ghat = w_half.matmul(&g).matmul(&w_half_inv);
    // Similar to a symmetric matrix; symmetrize the rounding residue.
    let mut s = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = 0.5 * (ghat[(i, j)] + ghat[(j, i)]);
        }
    }
    let eigs = s.sym_eigenvalues();
    Ok(eigs.iter().fold(0.0f64, |m, &e| m.max(e.abs())))
}

/// The splitting pair `(M_a, N_a)` with `A = M_a - N_a` and
/// `G_a = M_a^{-1} N_a`:
/// `M_a = (1/2a)(T + aW)(W - iT)^{-1}(W + aT)`,
/// `N_a = (1/2a)(T - aW)(W - iT)^{-1}(W - aT)`.
pub fn splitting_matrices(
    w: &SparseSymMatrix,
    t: &SparseSymMatrix,
    alpha: f64,
) -> Result<(DenseComplexMatrix, DenseComplexMatrix)> {
    let n = w.order();
    if n > ORACLE_CAP {
        return Err(Error::OracleCapExceeded { n, cap: ORACLE_CAP });
    }
    let wd = w.to_dense()?;
    let td = t.to_dense()?;
    let mut w_minus_it = DenseComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            w_minus_it[(i, j)] = Complex64::new(wd[(i, j)], -td[(i, j)]);
        }
    }
    let x = w_minus_it.inverse()?;
    let comb = |aw: f64, at: f64| -> DenseComplexMatrix {
        let mut m = DenseComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(aw * wd[(i, j)] + at * td[(i, j)], 0.0);
            }
        }
        m
    };
    let half = Complex64::new(1.0 / (2.0 * alpha), 0.0);
    let m = comb(alpha, 1.0).matmul(&x).matmul(&comb(1.0, alpha)).scaled(half);
    let nn = comb(-alpha, 1.0).matmul(&x).matmul(&comb(1.0, -alpha)).scaled(half);
    Ok((m, nn))
}

/// Upper endpoint `2 / (1 + rho(W^{-1} T))` of the GSOR convergence interval.
pub fn gsor_convergence_interval(w: &SparseSymMatrix, t: &SparseSymMatrix) -> Result<f64> {
    let mus = generalized_eigs(w, t)?;
    let rho = mus.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    Ok(2.0 / (1.0 + rho))
}

/// Run the configured method at every `alpha` on the grid `lo, lo + step,
/// ..., <= hi`, counting a non-converged run as `max_iterations + 1` so a
/// divergent parameter never wins. Ties go to the smaller `alpha`.
pub fn grid_search_alpha(
    p: &Problem,
    base: &SolverConfig,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<TuneResult> {
    let bad = |v: f64| v.is_nan() || v <= 0.0;
    if bad(lo) || bad(step) || hi.is_nan() || hi <= lo {
        return Err(Error::InvalidConfig(format!(
            "bad grid: lo={lo}, hi={hi}, step={step}"
        )));
    }
    let mut grid = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    let mut k = 0usize;
    loop {
        let alpha = lo + step * k as f64;
        if alpha > hi + step * 1e-9 {
            break;
        }
        let mut cfg = base.clone();
        cfg.alpha = alpha;
        cfg.record_history = false;
        let report = run(p, &cfg)?;
        let count = if report.converged {
            report.iterations
        } else {
            cfg.max_iterations + 1
        };
        grid.push((alpha, count));
        let better = match best {
            None => true,
            Some((_, best_count)) => count < best_count,
        };
        if better {
            best = Some((alpha, count));
        }
        k += 1;
    }
    let (best_alpha, best_iterations) = best.ok_or(Error::NoConvergentGridPoint)?;
    if best_iterations > base.max_iterations {
        return Err(Error::NoConvergentGridPoint);
    }
    Ok(TuneResult {
        best_alpha,
        best_iterations,
        grid,
    })
}
