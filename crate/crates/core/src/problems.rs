//! The four benchmark problem families: construction exactly as specified,
//! including right-hand sides and the `h^2` normalization where it applies,
//! plus Matrix Market export/import with a JSON sidecar.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io;
use crate::sparse::SparseSymMatrix;
use crate::vector::ComplexVector;
use crate::{Error, Result};

/// Which benchmark problem, with its shape parameters.
///
/// Sizes: examples 1-3 live on an `m x m` grid (`n = m^2`); example 4 is a
/// tridiagonal pair of order `n` directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemSpec {
    /// Time-stepped negative Laplacian: `W = K + (3 - sqrt(3))/tau I`,
    /// `T = K + (3 + sqrt(3))/tau I`, normalized by `h^2`.
    Ex1 { m: usize, tau: f64 },
    /// Damped structure: `W = K - omega^2 I`, `T = 10 omega I + mu K`,
    /// `b = (1+i) A 1`, normalized by `h^2`.
    Ex2 { m: usize, omega: f64, mu_damp: f64 },
    /// Dirichlet `T`, periodic-coupled `W` with corner blocks,
    /// `b = (1+i) A 1`, no normalization.
    Ex3 { m: usize },
    /// Artificial tridiagonal pair `W = tridiag(-1+theta1, 2, -1+theta1)`,
    /// `T = tridiag(-1+theta2, 2, -1+theta2)`, `b = A 1`.
    Ex4 { n: usize, theta1: f64, theta2: f64 },
}

impl ProblemSpec {
    /// Example 1 with the default time step `tau = h = 1/(m+1)`.
    pub fn ex1(m: usize) -> Self {
        Self::Ex1 {
            m,
            tau: 1.0 / (m as f64 + 1.0),
        }
    }

    /// Example 2 with the defaults `omega = 4`, `mu = 0.02`.
    pub fn ex2(m: usize) -> Self {
        Self::Ex2 {
            m,
            omega: 4.0,
            mu_damp: 0.02,
        }
    }

    pub fn ex3(m: usize) -> Self {
        Self::Ex3 { m }
    }

    /// Example 4 with the defaults `theta1 = 1.5`, `theta2 = 0.2`.
    pub fn ex4(n: usize) -> Self {
        Self::Ex4 {
            n,
            theta1: 1.5,
            theta2: 0.2,
        }
    }

    pub fn example_id(&self) -> u8 {
        match self {
            Self::Ex1 { .. } => 1,
            Self::Ex2 { .. } => 2,
            Self::Ex3 { .. } => 3,
            Self::Ex4 { .. } => 4,
        }
    }

    /// System order: `m^2` for the grid examples, `n` for example 4.
    pub fn dimension(&self) -> usize {
        match *self {
            Self::Ex1 { m, .. } | Self::Ex2 { m, .. } | Self::Ex3 { m } => m * m,
            Self::Ex4 { n, .. } => n,
        }
    }

    /// The size parameter as tabulated: `m` for examples 1-3, `n` for 4.
    pub fn size_param(&self) -> usize {
        match *self {
            Self::Ex1 { m, .. } | Self::Ex2 { m, .. } | Self::Ex3 { m } => m,
            Self::Ex4 { n, .. } => n,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        match *self {
            Self::Ex1 { m, tau } => build_example1(m, tau),
            Self::Ex2 { m, omega, mu_damp } => build_example2(m, omega, mu_damp),
            Self::Ex3 { m } => build_example3(m),
            Self::Ex4 { n, theta1, theta2 } => build_example4(n, theta1, theta2),
        }
    }
}

/// One instance of `(W + iT) z = b` plus its provenance.
#[derive(Debug, Clone)]
pub struct Problem {
    pub w: SparseSymMatrix,
    pub t: SparseSymMatrix,
    pub b: ComplexVector,
    pub n: usize,
    pub spec: ProblemSpec,
    pub normalized: bool,
}

/// Shared 2D negative-Laplacian stencil: `K = I (x) V_m + V_m (x) I` with
/// `V_m = h^{-2} tridiag(-1, 2, -1)`, `h = 1/(m+1)`.
fn laplacian_k(m: usize) -> Result<SparseSymMatrix> {
    let h = 1.0 / (m as f64 + 1.0);
    let s = 1.0 / (h * h);
    let v = SparseSymMatrix::tridiag(m, -s, 2.0 * s, -s)?;
    SparseSymMatrix::kron_sum(&v)
}

/// `b = (1 + i) A 1` expanded into real pairs: `re = W1 - T1`, `im = W1 + T1`.
fn rhs_one_plus_i_a_ones(w: &SparseSymMatrix, t: &SparseSymMatrix) -> Result<ComplexVector> {
    let ones = vec![1.0; w.order()];
    let wu = w.spmv(&ones)?;
    let tu = t.spmv(&ones)?;
    let re = wu.iter().zip(&tu).map(|(a, b)| a - b).collect();
    let im = wu.iter().zip(&tu).map(|(a, b)| a + b).collect();
    ComplexVector::new(re, im)
}

pub fn build_example1(m: usize, tau: f64) -> Result<Problem> {
    if m == 0 || tau <= 0.0 {
        return Err(Error::InvalidConfig(format!("m={m}, tau={tau}")));
    }
    let h = 1.0 / (m as f64 + 1.0);
    let n = m * m;
    let k = laplacian_k(m)?;
    let sqrt3 = 3.0f64.sqrt();
    let w = k.shift(1.0, (3.0 - sqrt3) / tau);
    let t = k.shift(1.0, (3.0 + sqrt3) / tau);
    // b_j = (1 - i) j / (tau (j+1)^2), 1-based j.
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for j in 1..=n {
        let v = j as f64 / (tau * ((j + 1) as f64).powi(2));
        re.push(v);
        im.push(-v);
    }
    let mut b = ComplexVector::new(re, im)?;
    // Normalize the whole system by h^2.
    let h2 = h * h;
    let w = w.scaled(h2);
    let t = t.scaled(h2);
    b.scale(h2);
    Ok(Problem {
        w,
        t,
        b,
        n,
        spec: ProblemSpec::Ex1 { m, tau },
        normalized: true,
    })
}

pub fn build_example2(m: usize, omega: f64, mu_damp: f64) -> Result<Problem> {
    if m == 0 {
        return Err(Error::InvalidConfig(format!("m={m}")));
    }
    let h = 1.0 / (m as f64 + 1.0);
    let n = m * m;
    let k = laplacian_k(m)?;
    // M = I, C_V = 10 I, C_H = mu K.
    let w = k.shift(1.0, -omega * omega);
    let t = k.shift(mu_damp, 10.0 * omega);
    let mut b = rhs_one_plus_i_a_ones(&w, &t)?;
    let h2 = h * h;
    let w = w.scaled(h2);
    let t = t.scaled(h2);
    b.scale(h2);
    Ok(Problem {
        w,
        t,
        b,
        n,
        spec: ProblemSpec::Ex2 { m, omega, mu_damp },
        normalized: true,
    })
}

pub fn build_example3(m: usize) -> Result<Problem> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!("m={m} (need m >= 2)")));
    }
    let n = m * m;
    let v = SparseSymMatrix::tridiag(m, -1.0, 2.0, -1.0)?;
    let t = SparseSymMatrix::kron_sum(&v)?;
    // V_c = V - e1 em^T - em e1^T: the corner-coupled (periodic) stencil.
    let mut vc_trip: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..m {
        for (j, val) in v.row(i) {
            vc_trip.push((i, j, val));
        }
    }
    vc_trip.push((0, m - 1, -1.0));
    vc_trip.push((m - 1, 0, -1.0));
    let vc = SparseSymMatrix::from_triplets(m, &vc_trip)?;
    // W = 10 (I (x) Vc + Vc (x) I) + 9 (e1 em^T + em e1^T) (x) I.
    let kc = SparseSymMatrix::kron_sum(&vc)?;
    let mut w_trip: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for (j, val) in kc.row(i) {
            w_trip.push((i, j, 10.0 * val));
        }
    }
    for r in 0..m {
        w_trip.push((r, (m - 1) * m + r, 9.0));
        w_trip.push(((m - 1) * m + r, r, 9.0));
    }
    let w = SparseSymMatrix::from_triplets(n, &w_trip)?;
    let b = rhs_one_plus_i_a_ones(&w, &t)?;
    Ok(Problem {
        w,
        t,
        b,
        n,
        spec: ProblemSpec::Ex3 { m },
        normalized: false,
    })
}

pub fn build_example4(n: usize, theta1: f64, theta2: f64) -> Result<Problem> {
    if n == 0 {
        return Err(Error::InvalidConfig(format!("n={n}")));
    }
    let w = SparseSymMatrix::tridiag(n, -1.0 + theta1, 2.0, -1.0 + theta1)?;
    let t = SparseSymMatrix::tridiag(n, -1.0 + theta2, 2.0, -1.0 + theta2)?;
    // b = A 1: re = W1, im = T1.
    let ones = vec![1.0; n];
    let b = ComplexVector::new(w.spmv(&ones)?, t.spmv(&ones)?)?;
    Ok(Problem {
        w,
        t,
        b,
        n,
        spec: ProblemSpec::Ex4 { n, theta1, theta2 },
        normalized: false,
    })
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    example: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_damp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta2: Option<f64>,
    normalized: bool,
}

impl Sidecar {
    fn from_problem(p: &Problem) -> Self {
        let mut s = Sidecar {
            example: p.spec.example_id(),
            m: None,
            n: None,
            tau: None,
            omega: None,
            mu_damp: None,
            theta1: None,
            theta2: None,
            normalized: p.normalized,
        };
        match p.spec {
            ProblemSpec::Ex1 { m, tau } => {
                s.m = Some(m);
                s.tau = Some(tau);
            }
            ProblemSpec::Ex2 { m, omega, mu_damp } => {
                s.m = Some(m);
                s.omega = Some(omega);
                s.mu_damp = Some(mu_damp);
            }
            ProblemSpec::Ex3 { m } => s.m = Some(m),
            ProblemSpec::Ex4 { n, theta1, theta2 } => {
                s.n = Some(n);
                s.theta1 = Some(theta1);
                s.theta2 = Some(theta2);
            }
        }
        s
    }

    fn to_spec(&self) -> Result<ProblemSpec> {
        let missing = |f: &str| Error::MalformedFile(format!("sidecar missing field {f}"));
        Ok(match self.example {
            1 => ProblemSpec::Ex1 {
                m: self.m.ok_or_else(|| missing("m"))?,
                tau: self.tau.ok_or_else(|| missing("tau"))?,
            },
            2 => ProblemSpec::Ex2 {
                m: self.m.ok_or_else(|| missing("m"))?,
                omega: self.omega.ok_or_else(|| missing("omega"))?,
                mu_damp: self.mu_damp.ok_or_else(|| missing("mu_damp"))?,
            },
            3 => ProblemSpec::Ex3 {
                m: self.m.ok_or_else(|| missing("m"))?,
            },
            4 => ProblemSpec::Ex4 {
                n: self.n.ok_or_else(|| missing("n"))?,
                theta1: self.theta1.ok_or_else(|| missing("theta1"))?,
                theta2: self.theta2.ok_or_else(|| missing("theta2"))?,
            },
            other => {
                return Err(Error::MalformedFile(format!("unknown example id {other}")))
            }
        })
    }
}

/// Write `W.mtx`, `T.mtx`, `b.vec` and `problem.json` under `dir`.
pub fn export_problem(p: &Problem, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_matrix_market(&p.w, &dir.join("W.mtx"))?;
    io::write_matrix_market(&p.t, &dir.join("T.mtx"))?;
    io::write_complex_vector_text(&p.b, &dir.join("b.vec"))?;
    let sidecar = Sidecar::from_problem(p);
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::MalformedFile(e.to_string()))?;
    std::fs::write(dir.join("problem.json"), json)?;
    Ok(())
}

/// Reconstruct a problem written by [`export_problem`], value-identical.
pub fn import_problem(dir: &Path) -> Result<Problem> {
    let w = io::read_matrix_market(&dir.join("W.mtx"))?;
    let t = io::read_matrix_market(&dir.join("T.mtx"))?;
    let b = io::read_complex_vector_text(&dir.join("b.vec"))?;
    let raw = std::fs::read_to_string(dir.join("problem.json"))?;
    let sidecar: Sidecar =
        serde_json::from_str(&raw).map_err(|e| Error::MalformedFile(e.to_string()))?;
    let n = w.order();
    if t.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.order(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    Ok(Problem {
        w,
        t,
        b,
        n,
        spec: sidecar.to_spec()?,
        normalized: sidecar.normalized,
    })
}
