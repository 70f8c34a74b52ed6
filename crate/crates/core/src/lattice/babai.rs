use alloc::vec;
use alloc::vec::Vec;

use super::lll::ReducedBasis;
use super::{dot, round_half_even};
use crate::{Error, Result};

/// Result of the nearest-plane rounding.
///
/// `point = sum_j coeffs[j] * D_j` over the reduced basis `D`. The residual
/// sign `residual_signs[j]` is `+1` when the unrounded coefficient was at or
/// above its rounding and `-1` below, i.e. the direction towards the other
/// neighbouring plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BabaiSolution {
    pub point: Vec<i64>,
    pub coeffs: Vec<i64>,
    pub residual_signs: Vec<i8>,
    pub distance: f64,
}

impl BabaiSolution {
    pub fn distance_sq(&self) -> f64 {
        self.distance * self.distance
    }
}

pub fn babai_nearest_plane(reduced: &ReducedBasis, target: &[f64]) -> Result<BabaiSolution> {
    let m = reduced.rank();
    let dim = reduced.vectors[0].len();
    if target.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: target.len(),
        });
    }
    let basis = reduced.vectors_f64();
    let mut rest = target.to_vec();
    let mut coeffs = vec![0i64; m];
    let mut residual_signs = vec![1i8; m];
    for k in (0..m).rev() {
        let c = dot(&rest, &reduced.gs.vectors[k]) / reduced.gs.norms_sq[k];
        let z = round_half_even(c);
        coeffs[k] = z as i64;
        residual_signs[k] = if c - z >= 0.0 { 1 } else { -1 };
        for (r, b) in rest.iter_mut().zip(&basis[k]) {
            *r -= z * b;
        }
    }
    let mut point = vec![0i64; dim];
    for (&z, v) in coeffs.iter().zip(&reduced.vectors) {
        for (p, &x) in point.iter_mut().zip(v) {
            *p = z
                .checked_mul(x)
                .and_then(|zx| p.checked_add(zx))
                .ok_or(Error::Overflow("Babai lattice point"))?;
        }
    }
    let distance = libm::sqrt(
        target
            .iter()
            .zip(&point)
            .map(|(t, &p)| (t - p as f64) * (t - p as f64))
            .sum(),
    );
    Ok(BabaiSolution {
        point,
        coeffs,
        residual_signs,
        distance,
    })
}
