//! Real and complex vectors. A complex vector is a pair of real vectors; the
//! split form is what the solvers operate on, complex arithmetic never
//! touches storage.

use crate::sparse::SparseSymMatrix;
use crate::{Error, Result};

/// Dense real vector.
pub type RealVector = Vec<f64>;

/// Complex vector `z = re + i*im` stored as two real vectors of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    pub re: RealVector,
    pub im: RealVector,
}

impl ComplexVector {
    pub fn new(re: RealVector, im: RealVector) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch {
                expected: re.len(),
                got: im.len(),
            });
        }
        Ok(Self { re, im })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// Euclidean norm of the complex vector, `sqrt(||re||^2 + ||im||^2)`.
    pub fn norm(&self) -> f64 {
        let s: f64 = self
            .re
            .iter()
            .chain(self.im.iter())
            .map(|v| v * v)
            .sum();
        s.sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.re.iter_mut().chain(self.im.iter_mut()) {
            *v *= c;
        }
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y = a*x + y`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Apply the complex system matrix: `(W + iT)(x + iy) = (Wx - Ty) + i(Wy + Tx)`.
pub fn apply_system(
    w: &SparseSymMatrix,
    t: &SparseSymMatrix,
    z: &ComplexVector,
) -> Result<ComplexVector> {
    if w.order() != t.order() {
        return Err(Error::DimensionMismatch {
            expected: w.order(),
            got: t.order(),
        });
    }
    let wx = w.spmv(&z.re)?;
    let ty = t.spmv(&z.im)?;
    let wy = w.spmv(&z.im)?;
    let tx = t.spmv(&z.re)?;
    let re = wx.iter().zip(&ty).map(|(a, b)| a - b).collect();
    let im = wy.iter().zip(&tx).map(|(a, b)| a + b).collect();
    Ok(ComplexVector { re, im })
}

/// Relative residual `||b - (W + iT)z||_2 / ||b||_2`.
pub fn residual_relnorm(
    w: &SparseSymMatrix,
    t: &SparseSymMatrix,
    b: &ComplexVector,
    z: &ComplexVector,
) -> Result<f64> {
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Err(Error::ZeroRightHandSide);
    }
    let az = apply_system(w, t, z)?;
    let mut s = 0.0;
    for i in 0..b.len() {
        let dr = b.re[i] - az.re[i];
        let di = b.im[i] - az.im[i];
        s += dr * dr + di * di;
    }
    Ok(s.sqrt() / bnorm)
}
