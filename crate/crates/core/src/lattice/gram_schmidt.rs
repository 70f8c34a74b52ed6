use alloc::vec;
use alloc::vec::Vec;

use super::dot;
use crate::{Error, Result};

/// Relative squared-norm threshold below which a Gram-Schmidt vector counts
/// as zero; about the rounding noise of one projection.
const RANK_TOLERANCE: f64 = 64.0 * f64::EPSILON;

/// Orthogonalised vectors `d*_j`, coefficients `mu[k][j]` and `|d*_j|^2`.
///
/// `coeffs` is square with ones on the diagonal and zeros above it.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSchmidt {
    pub vectors: Vec<Vec<f64>>,
    pub coeffs: Vec<Vec<f64>>,
    pub norms_sq: Vec<f64>,
}

pub fn gram_schmidt(columns: &[Vec<f64>]) -> Result<GramSchmidt> {
    let m = columns.len();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut coeffs = vec![vec![0.0; m]; m];
    let mut norms_sq = Vec::with_capacity(m);
    for (k, col) in columns.iter().enumerate() {
        if k > 0 && col.len() != columns[0].len() {
            return Err(Error::DimensionMismatch {
                expected: columns[0].len(),
                got: col.len(),
            });
        }
        let mut v = col.clone();
        for j in 0..k {
            let mu = dot(col, &vectors[j]) / norms_sq[j];
            coeffs[k][j] = mu;
            for (vi, gi) in v.iter_mut().zip(&vectors[j]) {
                *vi -= mu * gi;
            }
        }
        coeffs[k][k] = 1.0;
        let n = dot(&v, &v);
        let scale = dot(col, col);
        if n <= RANK_TOLERANCE * scale || n == 0.0 {
            return Err(Error::DegenerateBasis { index: k, norm_sq: n });
        }
        vectors.push(v);
        norms_sq.push(n);
    }
    Ok(GramSchmidt {
        vectors,
        coeffs,
        norms_sq,
    })
}
