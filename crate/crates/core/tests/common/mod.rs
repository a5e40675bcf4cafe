//! Shared helpers for the integration suites: a deterministic RNG and
//! random SPD instance generators with controllable spectra.

use scsplit::dense::DenseMatrix;
use scsplit::problems::{Problem, ProblemSpec};
use scsplit::sparse::SparseSymMatrix;
use scsplit::vector::ComplexVector;

/// SplitMix64: tiny, deterministic, good enough for test instance generation.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random orthogonal matrix as a product of Givens rotations.
pub fn random_orthogonal(n: usize, rng: &mut SplitMix64) -> DenseMatrix {
    let mut q = DenseMatrix::identity(n);
    for _ in 0..(2 * n * n) {
        let i = rng.below(n);
        let mut j = rng.below(n - 1);
        if j >= i {
            j += 1;
        }
        let theta = rng.f64() * std::f64::consts::TAU;
        let (c, s) = (theta.cos(), theta.sin());
        for r in 0..n {
            let qi = q[(r, i)];
            let qj = q[(r, j)];
            q[(r, i)] = c * qi - s * qj;
            q[(r, j)] = s * qi + c * qj;
        }
    }
    q
}

/// Random SPD matrix `Q diag(d) Q^T` with eigenvalues uniform in `[lo, hi]`.
pub fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut SplitMix64) -> SparseSymMatrix {
    let q = random_orthogonal(n, rng);
    let d: Vec<f64> = (0..n).map(|_| rng.range(lo, hi)).collect();
    spd_from_eigs(&q, &d)
}

/// Assemble `Q diag(d) Q^T` exactly symmetrically.
pub fn spd_from_eigs(q: &DenseMatrix, d: &[f64]) -> SparseSymMatrix {
    let n = d.len();
    let mut triplets = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += q[(i, k)] * d[k] * q[(j, k)];
            }
            triplets.push((i, j, s));
            if i != j {
                triplets.push((j, i, s));
            }
        }
    }
    SparseSymMatrix::from_triplets(n, &triplets).expect("constructed symmetric")
}

/// Random pair of SPD matrices with eigenvalues in [0.5, 2].
pub fn random_spd_pair(n: usize, rng: &mut SplitMix64) -> (SparseSymMatrix, SparseSymMatrix) {
    let w = random_spd(n, 0.5, 2.0, rng);
    let t = random_spd(n, 0.5, 2.0, rng);
    (w, t)
}

/// Wrap a synthetic `(W, T)` pair with a random nonzero right-hand side.
/// The `ProblemSpec` tag is a placeholder; synthetic instances have no
/// benchmark row.
pub fn synthetic_problem(
    w: SparseSymMatrix,
    t: SparseSymMatrix,
    rng: &mut SplitMix64,
) -> Problem {
    let n = w.order();
    let re: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
    let im: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
    Problem {
        w,
        t,
        b: ComplexVector::new(re, im).unwrap(),
        n,
        spec: ProblemSpec::ex4(n),
        normalized: false,
    }
}
