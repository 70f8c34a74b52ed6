use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::gram_schmidt::{gram_schmidt, GramSchmidt};
use crate::{Error, Result};

pub const DEFAULT_LLL_DELTA: f64 = 0.99;

/// Slack on the size-reduction and Lovasz checks for floating-point noise.
const CHECK_EPS: f64 = 1e-9;

/// An LLL-reduced basis with its Gram-Schmidt data.
///
/// `transform[j]` holds the integer coefficients of `vectors[j]` over the
/// input basis, so the reduction is `vectors = input * transform`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis {
    pub vectors: Vec<Vec<i64>>,
    pub gs: GramSchmidt,
    pub delta: f64,
    pub transform: Vec<Vec<i64>>,
}

impl ReducedBasis {
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors_f64(&self) -> Vec<Vec<f64>> {
        to_f64(&self.vectors)
    }

    /// Maps coefficients over the reduced basis to coefficients over the
    /// input basis.
    pub fn input_coefficients(&self, coeffs: &[i64]) -> Result<Vec<i64>> {
        if coeffs.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: coeffs.len(),
            });
        }
        let mut out = vec![0i64; self.rank()];
        for (&z, col) in coeffs.iter().zip(&self.transform) {
            if z == 0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(col) {
                *o = z
                    .checked_mul(t)
                    .and_then(|zt| o.checked_add(zt))
                    .ok_or(Error::Overflow("coefficient transform"))?;
            }
        }
        Ok(out)
    }

    /// Whether the size-reduction and Lovasz conditions hold.
    pub fn is_reduced(&self) -> bool {
        satisfies_lll(&self.gs, self.delta)
    }
}

fn to_f64(cols: &[Vec<i64>]) -> Vec<Vec<f64>> {
    cols.iter().map(|c| c.iter().map(|&x| x as f64).collect()).collect()
}

fn satisfies_lll(gs: &GramSchmidt, delta: f64) -> bool {
    let m = gs.norms_sq.len();
    for k in 0..m {
        for j in 0..k {
            if gs.coeffs[k][j].abs() > 0.5 + CHECK_EPS {
                return false;
            }
        }
        if k > 0 {
            let mu = gs.coeffs[k][k - 1];
            let rhs = (delta - mu * mu) * gs.norms_sq[k - 1];
            if gs.norms_sq[k] < rhs - CHECK_EPS * gs.norms_sq[k - 1] {
                return false;
            }
        }
    }
    true
}

fn axpy(dst: &mut [i64], q: i64, src: &[i64]) -> Result<()> {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = q
            .checked_mul(s)
            .and_then(|qs| d.checked_sub(qs))
            .ok_or(Error::Overflow("LLL size reduction"))?;
    }
    Ok(())
}

/// Fixed-point scale for the Lovasz constant.
const DELTA_SCALE_BITS: u32 = 40;

fn inner(a: &[i64], b: &[i64]) -> Result<BigInt> {
    let mut acc: i128 = 0;
    for (&x, &y) in a.iter().zip(b) {
        acc = acc
            .checked_add(x as i128 * y as i128)
            .ok_or(Error::Overflow("LLL inner product"))?;
    }
    Ok(BigInt::from(acc))
}

/// `round(num / den)` for `den > 0`, halves away from zero.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * &two))
}

/// Exact integral LLL state: `d[i]` are the Gram determinants of the first
/// `i` vectors (`d[0] = 1`) and `lambda[k][j] = d[j + 1] * mu[k][j]`.
struct Integral {
    b: Vec<Vec<i64>>,
    u: Vec<Vec<i64>>,
    d: Vec<BigInt>,
    lambda: Vec<Vec<BigInt>>,
}

impl Integral {
    /// `b_k -= q b_l` when `|mu[k][l]| > 1/2`.
    fn size_reduce(&mut self, k: usize, l: usize) -> Result<()> {
        let dl = &self.d[l + 1];
        let twice: BigInt = &self.lambda[k][l] * 2u32;
        if twice.magnitude() <= dl.magnitude() {
            return Ok(());
        }
        let q = round_div(&self.lambda[k][l], dl);
        let qi = q.to_i64().ok_or(Error::Overflow("LLL size reduction"))?;
        let (head, tail) = self.b.split_at_mut(k);
        axpy(&mut tail[0], qi, &head[l])?;
        let (head, tail) = self.u.split_at_mut(k);
        axpy(&mut tail[0], qi, &head[l])?;
        self.lambda[k][l] -= &q * dl;
        for i in 0..l {
            let t = &q * &self.lambda[l][i];
            self.lambda[k][i] -= t;
        }
        Ok(())
    }

    /// Exchanges `b_{k-1}` and `b_k` for `1 <= k < kmax`.
    fn swap(&mut self, k: usize, kmax: usize) {
        self.b.swap(k, k - 1);
        self.u.swap(k, k - 1);
        for j in 0..k - 1 {
            let t = core::mem::take(&mut self.lambda[k][j]);
            self.lambda[k][j] = core::mem::replace(&mut self.lambda[k - 1][j], t);
        }
        let lam = self.lambda[k][k - 1].clone();
        let (dk2, dk1, dk) = (&self.d[k - 1], &self.d[k], &self.d[k + 1]);
        let big_b = (dk2 * dk + &lam * &lam) / dk1;
        for i in k + 1..=kmax {
            let t = self.lambda[i][k].clone();
            self.lambda[i][k] = (dk * &self.lambda[i][k - 1] - &lam * &t) / dk1;
            self.lambda[i][k - 1] = (&big_b * &t + &lam * &self.lambda[i][k]) / dk;
        }
        self.d[k] = big_b;
    }
}

/// LLL reduction of integer columns.
///
/// Runs the integral (fraction-free) variant, so every decision is exact
/// and linear dependence is detected exactly. Floating-point Gram-Schmidt
/// data is computed only for the reduced basis.
pub fn lll_reduce(basis: &[Vec<i64>], delta: f64) -> Result<ReducedBasis> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::Config(format!("LLL delta must lie in (0.25, 1), got {delta}")));
    }
    let m = basis.len();
    if m == 0 {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    let dim = basis[0].len();
    if let Some(bad) = basis.iter().find(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    // Rounded up so the exact test is never weaker than `delta`.
    let scale = BigInt::from(1u64 << DELTA_SCALE_BITS);
    let p = BigInt::from(libm::ceil(delta * (1u64 << DELTA_SCALE_BITS) as f64) as u64);

    let mut st = Integral {
        b: basis.to_vec(),
        u: (0..m)
            .map(|j| {
                let mut e = vec![0i64; m];
                e[j] = 1;
                e
            })
            .collect(),
        d: vec![BigInt::one(); m + 1],
        lambda: vec![vec![BigInt::zero(); m]; m],
    };

    // kmax: vectors 0..=kmax have their lambda and d entries filled in.
    let mut kmax = 0;
    st.d[1] = inner(&st.b[0], &st.b[0])?;
    if st.d[1].is_zero() {
        return Err(Error::DegenerateBasis { index: 0, norm_sq: 0.0 });
    }
    let mut k = 1;
    while k < m {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut v = inner(&st.b[k], &st.b[j])?;
                for i in 0..j {
                    v = (&st.d[i + 1] * &v - &st.lambda[k][i] * &st.lambda[j][i]) / &st.d[i];
                }
                if j < k {
                    st.lambda[k][j] = v;
                } else {
                    if v.is_zero() {
                        return Err(Error::DegenerateBasis { index: k, norm_sq: 0.0 });
                    }
                    st.d[k + 1] = v;
                }
            }
        }
        st.size_reduce(k, k - 1)?;
        let lam = &st.lambda[k][k - 1];
        let lhs = &scale * (&st.d[k + 1] * &st.d[k - 1] + lam * lam);
        let rhs = &p * &st.d[k] * &st.d[k];
        if lhs < rhs {
            st.swap(k, kmax);
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                st.size_reduce(k, l)?;
            }
            k += 1;
        }
    }

    let gs = gram_schmidt(&to_f64(&st.b))?;
    if !satisfies_lll(&gs, delta) {
        return Err(Error::Invariant("reduced basis fails the floating-point LLL check".into()));
    }
    Ok(ReducedBasis {
        vectors: st.b,
        gs,
        delta,
        transform: st.u,
    })
}
