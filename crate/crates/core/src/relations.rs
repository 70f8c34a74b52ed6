//! From low-energy states to smooth-relation pairs `(u, v)`.
//!
//! A coefficient vector `e` over the prime basis gives `u = prod_{e_j>0}
//! p_j^e_j` and `v = prod_{e_j<0} p_j^-e_j`. The pair is kept when
//! `u - vN` is nonzero and smooth over the factor base, which yields the
//! congruence `u = sign * prod p_i^b_i (mod N)`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, Zero};

use crate::ising::Bitstring;
use crate::lattice::BabaiSolution;
use crate::numtheory::{factor_magnitude, product_of_powers, FactorBase, Sign};
use crate::{Error, Result};

pub const DEFAULT_SLACK: usize = 2;

/// Default smoothness bound `2 m^2`.
pub fn default_smoothness_bound(m: usize) -> u64 {
    2 * (m as u64) * (m as u64)
}

/// Number of distinct pairs to collect before combining: `B2 + slack`.
pub fn required_sr_pairs(m: usize, smoothness_bound: u64, slack: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::Config(format!("lattice dimension {m} < 2")));
    }
    if smoothness_bound < 2 {
        return Err(Error::Config(format!("smoothness bound {smoothness_bound} < 2")));
    }
    if slack == 0 {
        return Err(Error::Config("slack must be at least 1".into()));
    }
    Ok(smoothness_bound as usize + slack)
}

/// `z(x)_j = z_j + x_j kappa_j` for each state.
pub fn states_to_coeff_vectors(states: &[Bitstring], babai: &BabaiSolution) -> Result<Vec<Vec<i64>>> {
    let m = babai.coeffs.len();
    states
        .iter()
        .map(|x| {
            if x.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: x.len(),
                });
            }
            Ok(babai
                .coeffs
                .iter()
                .zip(&babai.residual_signs)
                .zip(x.bits())
                .map(|((&z, &k), flip)| if flip { z + k as i64 } else { z })
                .collect())
        })
        .collect()
}

/// Splits an exponent vector into `(u, v)`.
pub fn coeff_vector_to_uv(exponents: &[i64], primes: &[u64]) -> Result<(BigUint, BigUint)> {
    if exponents.len() != primes.len() {
        return Err(Error::DimensionMismatch {
            expected: primes.len(),
            got: exponents.len(),
        });
    }
    let mut u = BigUint::one();
    let mut v = BigUint::one();
    for (&e, &p) in exponents.iter().zip(primes) {
        let pow = |k: u64| -> Result<BigUint> {
            let k = u32::try_from(k).map_err(|_| Error::Overflow("prime exponent"))?;
            Ok(BigUint::from(p).pow(k))
        };
        if e > 0 {
            u *= pow(e as u64)?;
        } else if e < 0 {
            v *= pow(e.unsigned_abs())?;
        }
    }
    Ok((u, v))
}

/// A smooth-relation pair with both factorisations over the factor base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrPair {
    pub u: BigUint,
    pub v: BigUint,
    /// Sign of `u - vN`.
    pub residual_sign: Sign,
    pub u_exponents: Vec<u32>,
    /// Exponents of `|u - vN|`.
    pub residual_exponents: Vec<u32>,
}

impl SrPair {
    pub fn key(&self) -> (BigUint, BigUint) {
        (self.u.clone(), self.v.clone())
    }

    /// `u - vN` rebuilt from the residual factorisation.
    pub fn residual(&self, base: &FactorBase) -> BigInt {
        let mag = product_of_powers(base.primes(), &self.residual_exponents);
        match self.residual_sign {
            Sign::Positive => BigInt::from_biguint(BigSign::Plus, mag),
            Sign::Negative => BigInt::from_biguint(BigSign::Minus, mag),
        }
    }

    /// `u = sign * prod p^b (mod N)`.
    pub fn congruence_holds(&self, n: &BigUint, base: &FactorBase) -> bool {
        let n_int = BigInt::from(n.clone());
        let lhs = BigInt::from(self.u.clone()) % &n_int;
        let rhs = self.residual(base) % &n_int;
        ((lhs - rhs) % &n_int).is_zero()
    }
}

/// Tests whether `(u, v)` is a smooth relation for `N` over `base`.
///
/// `u` must itself be smooth over `base` (it is a product of lattice primes
/// in the pipeline); otherwise the pair is rejected.
pub fn test_sr_pair(u: &BigUint, v: &BigUint, n: &BigUint, base: &FactorBase) -> Result<Option<SrPair>> {
    if u.is_zero() || v.is_zero() {
        return Err(Error::InvalidInput("u and v must be positive".into()));
    }
    let vn = v * n;
    let (residual_sign, magnitude) = match u.cmp(&vn) {
        core::cmp::Ordering::Equal => return Ok(None),
        core::cmp::Ordering::Greater => (Sign::Positive, u - &vn),
        core::cmp::Ordering::Less => (Sign::Negative, &vn - u),
    };
    let Some(residual_exponents) = factor_magnitude(&magnitude, base) else {
        return Ok(None);
    };
    let Some(u_exponents) = factor_magnitude(u, base) else {
        return Ok(None);
    };
    Ok(Some(SrPair {
        u: u.clone(),
        v: v.clone(),
        residual_sign,
        u_exponents,
        residual_exponents,
    }))
}

/// Insertion-ordered, duplicate-free collection of pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLedger {
    pairs: Vec<SrPair>,
    keys: BTreeSet<(BigUint, BigUint)>,
    required: usize,
}

impl PairLedger {
    pub fn new(required: usize) -> Self {
        Self {
            pairs: Vec::new(),
            keys: BTreeSet::new(),
            required,
        }
    }

    /// Adds `pair` unless its `(u, v)` is already present; returns whether
    /// it was added.
    pub fn insert(&mut self, pair: SrPair) -> bool {
        if !self.keys.insert(pair.key()) {
            return false;
        }
        self.pairs.push(pair);
        true
    }

    pub fn pairs(&self) -> &[SrPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn required(&self) -> usize {
        self.required
    }

    pub fn is_full(&self) -> bool {
        self.pairs.len() >= self.required
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn babai(coeffs: Vec<i64>, signs: Vec<i8>) -> BabaiSolution {
        BabaiSolution {
            point: vec![0; coeffs.len() + 1],
            coeffs,
            residual_signs: signs,
            distance: 0.0,
        }
    }

    #[test]
    fn required_examples() {
        assert_eq!(required_sr_pairs(12, 288, 2).unwrap(), 290);
        assert_eq!(required_sr_pairs(23, 1058, 2).unwrap(), 1060);
        assert_eq!(required_sr_pairs(15, 450, 2).unwrap(), 452);
        assert_eq!(default_smoothness_bound(12), 288);
        assert!(required_sr_pairs(1, 10, 2).is_err());
        assert!(required_sr_pairs(3, 1, 2).is_err());
        assert!(required_sr_pairs(3, 10, 0).is_err());
    }

    #[test]
    fn state_mapping() {
        let s = babai(vec![0, 4], vec![1, -1]);
        let got = states_to_coeff_vectors(&["10".parse().unwrap(), "00".parse().unwrap()], &s).unwrap();
        assert_eq!(got, vec![vec![1, 4], vec![0, 4]]);
        let s = babai(vec![0, 0], vec![1, 1]);
        assert_eq!(states_to_coeff_vectors(&["11".parse().unwrap()], &s).unwrap(), vec![vec![1, 1]]);
        assert!(states_to_coeff_vectors(&["1".parse().unwrap()], &s).is_err());
    }

    #[test]
    fn uv_examples() {
        assert_eq!(coeff_vector_to_uv(&[3, -2], &[2, 3]).unwrap(), (b(8), b(9)));
        assert_eq!(coeff_vector_to_uv(&[0, 0, 0], &[2, 3, 5]).unwrap(), (b(1), b(1)));
        assert_eq!(coeff_vector_to_uv(&[-1, 2, 0], &[2, 3, 5]).unwrap(), (b(9), b(2)));
        assert!(coeff_vector_to_uv(&[1], &[2, 3]).is_err());
    }

    #[test]
    fn sr_examples() {
        let base = FactorBase::primes_up_to(7).unwrap();
        let p = test_sr_pair(&b(81), &b(1), &b(77), &base).unwrap().unwrap();
        assert_eq!(p.residual_sign, Sign::Positive);
        assert_eq!(p.residual_exponents, vec![2, 0, 0, 0]);
        assert_eq!(p.u_exponents, vec![0, 4, 0, 0]);
        assert!(p.congruence_holds(&b(77), &base));

        assert_eq!(test_sr_pair(&b(8), &b(9), &b(77), &base).unwrap(), None);
        assert_eq!(test_sr_pair(&b(77), &b(1), &b(77), &base).unwrap(), None);
        assert!(test_sr_pair(&b(0), &b(1), &b(77), &base).is_err());
    }

    #[test]
    fn unit_pair_sign_logic() {
        let base = FactorBase::primes_up_to(7).unwrap();
        // N - 1 = 63 = 3^2 * 7 is smooth
        let p = test_sr_pair(&b(1), &b(1), &b(64), &base).unwrap().unwrap();
        assert_eq!(p.residual_sign, Sign::Negative);
        assert_eq!(p.residual(&base), BigInt::from(-63));
        assert!(p.congruence_holds(&b(64), &base));
        // N - 1 = 76 = 4 * 19 is not
        assert_eq!(test_sr_pair(&b(1), &b(1), &b(77), &base).unwrap(), None);
    }

    #[test]
    fn ledger_dedups() {
        let base = FactorBase::primes_up_to(7).unwrap();
        let p = test_sr_pair(&b(81), &b(1), &b(77), &base).unwrap().unwrap();
        let mut ledger = PairLedger::new(2);
        assert!(ledger.insert(p.clone()));
        let before = ledger.clone();
        assert!(!ledger.insert(p));
        assert_eq!(ledger, before);
        assert!(!ledger.is_full());
    }

    /// For tiny cases the state pipeline and direct enumeration of the cube
    /// must accept exactly the same pairs.
    #[test]
    fn cube_enumeration_agrees_with_state_pipeline() {
        let base = FactorBase::primes_up_to(50).unwrap();
        let primes = [2u64, 3, 5];
        let n = b(91);
        let s = babai(vec![2, -1, 1], vec![1, -1, 1]);
        let states: Vec<Bitstring> = (0..8).map(|v| Bitstring::new(v, 3).unwrap()).collect();
        let via_pipeline: BTreeSet<(BigUint, BigUint)> = states_to_coeff_vectors(&states, &s)
            .unwrap()
            .iter()
            .filter_map(|e| {
                let (u, v) = coeff_vector_to_uv(e, &primes).unwrap();
                test_sr_pair(&u, &v, &n, &base).unwrap().map(|p| p.key())
            })
            .collect();
        let mut direct = BTreeSet::new();
        for x0 in 0..2i64 {
            for x1 in 0..2i64 {
                for x2 in 0..2i64 {
                    let e = [2 + x0, -1 - x1, 1 + x2];
                    let mut u = 1u64;
                    let mut v = 1u64;
                    for (k, &p) in e.iter().zip(&primes) {
                        if *k > 0 {
                            u *= p.pow(*k as u32);
                        } else {
                            v *= p.pow((-*k) as u32);
                        }
                    }
                    let d = (u as i64 - (v * 91) as i64).unsigned_abs();
                    let mut r = d;
                    for &p in base.primes() {
                        while r > 0 && r % p == 0 {
                            r /= p;
                        }
                    }
                    if d != 0 && r == 1 {
                        direct.insert((b(u), b(v)));
                    }
                }
            }
        }
        assert_eq!(direct.len(), 3);
        assert_eq!(via_pipeline, direct);
    }
}
