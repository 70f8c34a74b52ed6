//! Fixed-point natural logarithms of big integers, rounded to the nearest
//! integer after scaling by a power of ten.

use alloc::format;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// `sum_{n odd} w^n / n` in fixed point with `prec` fractional bits.
fn atanh_fixed(w: &BigUint, prec: u64) -> BigUint {
    let w2 = (w * w) >> prec;
    let mut term = w.clone();
    let mut sum = BigUint::zero();
    let mut n = 1u64;
    while !term.is_zero() {
        sum += &term / n;
        term = (&term * &w2) >> prec;
        n += 2;
    }
    sum
}

/// `ln(x)` in fixed point with `prec` fractional bits, `x >= 1`.
///
/// Absolute error is below `(bits(x) + 2) * (prec + 4)` units in the last place.
fn ln_fixed(x: &BigUint, prec: u64) -> BigUint {
    let k = x.bits() - 1;
    let one = BigUint::one() << prec;
    let y = if prec >= k {
        x << (prec - k)
    } else {
        x >> (k - prec)
    };
    let w = ((&y - &one) << prec) / (&y + &one);
    let ln_y = atanh_fixed(&w, prec) << 1u32;
    let ln2 = atanh_fixed(&(&one / 3u32), prec) << 1u32;
    ln2 * k + ln_y
}

/// Rounds `value / 2^prec` half-to-even; also reports whether the fractional
/// part sits farther than `margin` ulps from one half.
fn round_fixed(value: &BigUint, prec: u64, margin: &BigUint) -> (BigUint, bool) {
    let q = value >> prec;
    let frac = value - (&q << prec);
    let half = BigUint::one() << (prec - 1);
    let distance = if frac >= half { &frac - &half } else { &half - &frac };
    let stable = distance > *margin;
    let up = match frac.cmp(&half) {
        core::cmp::Ordering::Greater => true,
        core::cmp::Ordering::Less => false,
        core::cmp::Ordering::Equal => q.is_odd(),
    };
    (if up { q + 1u32 } else { q }, stable)
}

fn scaled_at(x: &BigUint, scale: &BigUint, prec: u64) -> (BigUint, bool) {
    let ln = ln_fixed(x, prec);
    let err_ulps = BigUint::from((x.bits() + 2) * (prec + 4));
    round_fixed(&(ln * scale), prec, &(err_ulps * scale))
}

/// `round_half_even(10^c * ln(x))` for `x >= 1`.
///
/// Starts from `c + 20` significant decimal digits past the scaled point and
/// widens until the rounding decision is outside the error bound, then checks
/// that twice the working precision gives the same integer.
pub fn ln_scaled_rounded(x: &BigUint, c: u32) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::InvalidInput("logarithm of zero".into()));
    }
    let scale = BigUint::from(10u32).pow(c);
    // bits for the scaled value's fraction plus guard bits for the error bound
    let mut prec = ((c as u64 + 20) * 3322).div_ceil(1000)
        + scale.bits()
        + 2 * (64 - (x.bits() + 64).leading_zeros() as u64)
        + 16;
    for _ in 0..16 {
        let (rounded, stable) = scaled_at(x, &scale, prec);
        if stable {
            let (check, _) = scaled_at(x, &scale, 2 * prec);
            if check != rounded {
                return Err(Error::Invariant(format!(
                    "logarithm rounding unstable for x with {} bits at c = {c}",
                    x.bits()
                )));
            }
            return rounded.to_i64().ok_or(Error::Overflow("scaled logarithm"));
        }
        prec *= 2;
    }
    Err(Error::Invariant("logarithm rounding did not stabilise".into()))
}

/// `round(log2(x))` for `x >= 1`.
///
/// With `k = bits(x) - 1`, the answer is `k + 1` iff `x^2 >= 2^(2k+1)`.
/// `log2(x)` is never an exact half for integers, so no tie rule is needed.
pub fn round_log2(x: &BigUint) -> Result<u64> {
    if x.is_zero() {
        return Err(Error::InvalidInput("log2 of zero".into()));
    }
    let k = x.bits() - 1;
    let threshold = BigUint::one() << (2 * k + 1);
    Ok(if x * x >= threshold { k + 1 } else { k })
}
