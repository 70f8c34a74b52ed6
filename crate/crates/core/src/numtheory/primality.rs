//! Deterministic primality screening: Miller-Rabin over fixed prime bases
//! followed by a strong Lucas probable-prime test.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

const MR_BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn miller_rabin(n: &BigUint, base: u32) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = BigUint::from(base).modpow(&d, n);
    if x == one || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    let n_int = BigInt::from(n.clone());
    let mut a = a.mod_floor(&n_int).magnitude().clone();
    let mut n = n.clone();
    let mut result = 1;
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1u32;
            let r = (&n % 8u32).to_u32().unwrap();
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        core::mem::swap(&mut a, &mut n);
        if (&a % 4u32).to_u32() == Some(3) && (&n % 4u32).to_u32() == Some(3) {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() { result } else { 0 }
}

/// Strong Lucas probable-prime test with Selfridge's parameter choice.
fn strong_lucas(n: &BigUint) -> bool {
    let root = n.sqrt();
    if &root * &root == *n {
        return false;
    }
    let n_int = BigInt::from(n.clone());
    let mut d = BigInt::from(5);
    loop {
        match jacobi(&d, n) {
            -1 => break,
            0 => {
                if d.abs() != n_int {
                    return false;
                }
            }
            _ => {}
        }
        d = if d.is_positive() { -(&d + 2u32) } else { -(&d - 2u32) };
    }
    let p = BigInt::one();
    let q: BigInt = (BigInt::one() - &d) / 4;

    let m: BigInt = &n_int + 1u32;
    let s = m.trailing_zeros().unwrap_or(0);
    let k = &m >> s;

    let modn = |v: BigInt| v.mod_floor(&n_int);
    let half = |v: BigInt| {
        let v = if v.is_odd() { v + &n_int } else { v };
        modn(v >> 1)
    };

    // binary ladder over the bits of k, U_1 = 1, V_1 = P
    let mut u = BigInt::one();
    let mut v = p.clone();
    let mut qk = modn(q.clone());
    let bits = k.bits();
    for i in (0..bits - 1).rev() {
        u = modn(&u * &v);
        v = modn(&v * &v - (&qk << 1));
        qk = modn(&qk * &qk);
        if k.bit(i) {
            let u_next = half(&p * &u + &v);
            let v_next = half(&d * &u + &p * &v);
            u = u_next;
            v = v_next;
            qk = modn(&qk * &q);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = modn(&v * &v - (&qk << 1));
        if v.is_zero() {
            return true;
        }
        qk = modn(&qk * &qk);
    }
    false
}

/// Primality by trial division for small inputs, otherwise Miller-Rabin with
/// the first twelve prime bases and a strong Lucas test.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
        for p in MR_BASES {
            let p = p as u64;
            if small == p {
                return true;
            }
            if small % p == 0 {
                return false;
            }
        }
        if small < 41 * 41 {
            return true;
        }
    } else if n.is_even() {
        return false;
    }
    MR_BASES.iter().all(|&b| miller_rabin(n, b)) && strong_lucas(n)
}

/// `Some((root, k))` with `root^k = n` and `k >= 2` maximal, if one exists.
pub fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if n <= &BigUint::one() {
        return None;
    }
    let max_k = n.bits() as u32;
    (2..=max_k).rev().find_map(|k| {
        let r = n.nth_root(k);
        (r > BigUint::one() && r.pow(k) == *n).then_some((r, k))
    })
}
