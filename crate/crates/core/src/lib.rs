//! Splitting iterations for complex symmetric linear systems `(W + iT) z = b`.
//!
//! `W` and `T` are real symmetric matrices, `W` positive definite and `T`
//! positive semidefinite. All complex objects are carried as pairs of real
//! objects, so every inner subsystem is a real symmetric positive definite
//! solve handled by a cached sparse Cholesky factorization (or conjugate
//! gradients).
//!
//! The crate provides:
//!
//! * [`sparse`] — compressed-row symmetric matrices, stencil and Kronecker-sum
//!   builders, matrix-vector products;
//! * [`factor`] — the inner SPD solver: sparse Cholesky with an optional
//!   fill-reducing ordering, plus a CG fallback;
//! * [`solver`] — the five outer iterations (TSCSP, SCSP, MHSS, PMHSS, GSOR)
//!   behind one driver with the relative-residual stopping test;
//! * [`spectral`] — generalized eigenvalues of the pencil `(T, W)`, the scalar
//!   amplification function, optimal-parameter formulas, dense
//!   iteration-matrix oracles, and grid-search tuning;
//! * [`problems`] — the four benchmark problem families and their
//!   export/import;
//! * [`io`] — Matrix Market and vector dump formats;
//! * [`dense`] — small dense kernels (LU, Cholesky, Jacobi eigensolver)
//!   backing the spectral oracles.

// The numeric kernels index several same-length slices per loop.
#![allow(clippy::needless_range_loop)]

pub mod dense;
pub mod factor;
pub mod io;
pub mod problems;
pub mod solver;
pub mod sparse;
pub mod spectral;
pub mod vector;

pub use factor::{InnerSolveChoice, InnerSolveKind, Ordering, SpdFactorization};
pub use problems::{Problem, ProblemSpec};
pub use solver::{run, MethodKind, SolveReport, SolverConfig};
pub use sparse::SparseSymMatrix;
pub use spectral::{
    grid_search_alpha, optimal_alpha, tscsp_spectral_radius, SpectralInfo, TuneResult,
};
pub use vector::{ComplexVector, RealVector};

use thiserror::Error;

/// Order cap for the dense spectral oracles. Dense eigensolves and matrix
/// inverses are `O(n^3)`; anything past this is a mistake, not a use case.
pub const ORACLE_CAP: usize = 400;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tridiagonal bands must be symmetric (lower {lower} != upper {upper})")]
    AsymmetricBands { lower: f64, upper: f64 },
    #[error("matrix is not symmetric at entry ({row}, {col})")]
    SymmetryViolation { row: usize, col: usize },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("conjugate gradients did not converge in {iterations} iterations (relres {relative_residual:.3e})")]
    CgDidNotConverge {
        iterations: usize,
        relative_residual: f64,
    },
    #[error("right-hand side has zero norm")]
    ZeroRightHandSide,
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("eigenvalue {value} is not strictly positive")]
    NonpositiveEigenvalue { value: f64 },
    #[error("order {n} exceeds the dense oracle cap {cap}")]
    OracleCapExceeded { n: usize, cap: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no grid point converged")]
    NoConvergentGridPoint,
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
