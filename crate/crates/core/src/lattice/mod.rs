//! The random prime lattice, its LLL reduction and Babai's nearest-plane
//! approximation to the closest vector.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::numtheory::{first_primes, ln_scaled_rounded, round_log2};
use crate::{Error, Result};

mod babai;
mod gram_schmidt;
mod lll;

pub use babai::{babai_nearest_plane, BabaiSolution};
pub use gram_schmidt::{gram_schmidt, GramSchmidt};
pub use lll::{lll_reduce, ReducedBasis, DEFAULT_LLL_DELTA};

/// Largest precision exponent accepted; keeps every entry exact in `f64`.
pub const MAX_PRECISION: u32 = 12;

/// `m = floor(l * n / round(log2 n))` with `n = round(log2 N)`.
pub fn lattice_dimension(n: &BigUint, lattice_parameter: u32) -> Result<usize> {
    if *n < BigUint::from(4u32) {
        return Err(Error::InvalidInput(format!("N = {n} is too small for a lattice")));
    }
    if lattice_parameter == 0 {
        return Err(Error::Config("lattice parameter must be positive".into()));
    }
    let bits = round_log2(n)?;
    let log_bits = round_log2(&BigUint::from(bits))?;
    let m = (lattice_parameter as u64 * bits / log_bits) as usize;
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "N = {n} gives lattice dimension {m}; at least 2 is required"
        )));
    }
    Ok(m)
}

/// A closest-vector instance over the first `m` primes.
///
/// Column `j` of the basis is `f(j) e_j + round(10^c ln p_j) e_{m+1}`; the
/// target is `round(10^c ln N) e_{m+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvpInstance {
    pub dimension: usize,
    pub precision: u32,
    /// `m` columns of length `m + 1`.
    pub basis: Vec<Vec<i64>>,
    pub target: Vec<i64>,
    pub diag_perm: Vec<u64>,
    pub prime_basis: Vec<u64>,
}

impl CvpInstance {
    pub fn target_f64(&self) -> Vec<f64> {
        self.target.iter().map(|&x| x as f64).collect()
    }

    /// Row `m + 1` of the basis.
    pub fn log_row(&self) -> Vec<i64> {
        self.basis.iter().map(|col| col[self.dimension]).collect()
    }
}

/// Multiset `(ceil(1/2), ceil(2/2), ..., ceil(m/2))`.
pub fn diagonal_weights(m: usize) -> Vec<u64> {
    (1..=m as u64).map(|i| i.div_ceil(2)).collect()
}

pub fn build_cvp_instance<R: Rng + ?Sized>(
    m: usize,
    precision: u32,
    n: &BigUint,
    rng: &mut R,
) -> Result<CvpInstance> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("lattice dimension {m} < 2")));
    }
    if precision == 0 || precision > MAX_PRECISION {
        return Err(Error::Config(format!(
            "precision must be in 1..={MAX_PRECISION}, got {precision}"
        )));
    }
    if *n < BigUint::from(4u32) {
        return Err(Error::InvalidInput(format!("N = {n} is too small")));
    }
    let prime_basis = first_primes(m)?;
    let mut diag_perm = diagonal_weights(m);
    diag_perm.shuffle(rng);

    let mut basis = Vec::with_capacity(m);
    for (j, (&p, &f)) in prime_basis.iter().zip(&diag_perm).enumerate() {
        let mut col = vec![0i64; m + 1];
        col[j] = f as i64;
        col[m] = ln_scaled_rounded(&BigUint::from(p), precision)?;
        basis.push(col);
    }
    let mut target = vec![0i64; m + 1];
    target[m] = ln_scaled_rounded(n, precision)?;

    Ok(CvpInstance {
        dimension: m,
        precision,
        basis,
        target,
        diag_perm,
        prime_basis,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn round_half_even(x: f64) -> f64 {
    libm::rint(x)
}
