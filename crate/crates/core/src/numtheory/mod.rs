//! Primes, factor bases, smoothness tests and a few big-integer helpers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

mod logarithm;
mod primality;

pub use logarithm::{ln_scaled_rounded, round_log2};
pub use primality::{is_prime, perfect_power};

/// Largest prime count accepted by [`first_primes`].
pub const MAX_PRIME_COUNT: usize = 1_000_000;

/// Sign of a nonzero integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Negative
    }
}

/// Sieve of Eratosthenes up to and including `limit`.
fn sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// The `k` smallest primes in ascending order.
pub fn first_primes(k: usize) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Config("prime count must be positive".into()));
    }
    if k > MAX_PRIME_COUNT {
        return Err(Error::Config(format!(
            "prime count {k} exceeds the supported maximum {MAX_PRIME_COUNT}"
        )));
    }
    // p_k < k (ln k + ln ln k) for k >= 6
    let bound = if k < 6 {
        13
    } else {
        let kf = k as f64;
        let lk = libm::log(kf);
        (kf * (lk + libm::log(lk))) as u64 + 1
    };
    let mut primes = sieve(bound);
    primes.truncate(k);
    debug_assert_eq!(primes.len(), k);
    Ok(primes)
}

/// An ascending list of primes together with the bound they cover.
///
/// Every prime `<= bound` is present and no larger prime is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorBase {
    primes: Vec<u64>,
    bound: u64,
}

impl FactorBase {
    /// All primes `<= bound`.
    pub fn primes_up_to(bound: u64) -> Result<Self> {
        if bound < 2 {
            return Err(Error::InvalidInput(format!(
                "smoothness bound must be at least 2, got {bound}"
            )));
        }
        Ok(Self {
            primes: sieve(bound),
            bound,
        })
    }

    /// The first `count` primes; the bound is the largest of them.
    pub fn first(count: usize) -> Result<Self> {
        let primes = first_primes(count)?;
        let bound = *primes.last().expect("count >= 1");
        Ok(Self { primes, bound })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Whether `primes` is a prefix of this base.
    pub fn starts_with(&self, primes: &[u64]) -> bool {
        self.primes.starts_with(primes)
    }
}

/// `sign * prod(p_i ^ e_i)` over a factor base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothDecomposition {
    pub sign: Sign,
    pub exponents: Vec<u32>,
}

impl SmoothDecomposition {
    /// Multiplies the decomposition back out.
    pub fn reconstruct(&self, base: &FactorBase) -> BigInt {
        let mag = product_of_powers(base.primes(), &self.exponents);
        match self.sign {
            Sign::Positive => BigInt::from_biguint(BigSign::Plus, mag),
            Sign::Negative => BigInt::from_biguint(BigSign::Minus, mag),
        }
    }
}

/// `prod(primes[i] ^ exponents[i])`.
pub fn product_of_powers(primes: &[u64], exponents: &[u32]) -> BigUint {
    let mut acc = BigUint::one();
    for (&p, &e) in primes.iter().zip(exponents) {
        if e > 0 {
            acc *= BigUint::from(p).pow(e);
        }
    }
    acc
}

/// Factors `x` completely over `base` by trial division.
///
/// Returns `Ok(None)` when a cofactor larger than one remains.
pub fn factor_over_base(x: &BigInt, base: &FactorBase) -> Result<Option<SmoothDecomposition>> {
    if x.is_zero() {
        return Err(Error::InvalidInput("cannot decompose zero".into()));
    }
    let sign = if x.sign() == BigSign::Minus {
        Sign::Negative
    } else {
        Sign::Positive
    };
    Ok(factor_magnitude(x.magnitude(), base).map(|exponents| SmoothDecomposition { sign, exponents }))
}

/// Exponent vector of a positive integer over `base`, if it is smooth.
pub(crate) fn factor_magnitude(x: &BigUint, base: &FactorBase) -> Option<Vec<u32>> {
    debug_assert!(!x.is_zero());
    let primes = base.primes();
    let mut exponents = vec![0u32; primes.len()];
    let mut rest = x.clone();
    for (i, &p) in primes.iter().enumerate() {
        if let Some(small) = rest.to_u128() {
            return divide_out_u128(small, &primes[i..], &mut exponents[i..]).then_some(exponents);
        }
        loop {
            let (q, r) = (&rest / p, &rest % p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            exponents[i] += 1;
        }
    }
    rest.is_one().then_some(exponents)
}

fn divide_out_u128(mut rest: u128, primes: &[u64], exponents: &mut [u32]) -> bool {
    for (e, &p) in exponents.iter_mut().zip(primes) {
        if rest == 1 {
            break;
        }
        let p = p as u128;
        while rest % p == 0 {
            rest /= p;
            *e += 1;
        }
    }
    rest == 1
}
