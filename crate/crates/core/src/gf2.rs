//! Relation matrix, mod-2 null space and the congruence-of-squares step.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::numtheory::FactorBase;
use crate::relations::SrPair;
use crate::{Error, Result};

/// Bit-packed vector over GF(2).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vector {
    len: usize,
    words: Vec<u64>,
}

impl Gf2Vector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &Self) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    fn lowest_one_below(&self, limit: usize) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                let i = wi * 64 + w.trailing_zeros() as usize;
                return (i < limit).then_some(i);
            }
        }
        None
    }
}

/// Dense GF(2) matrix stored by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Gf2Vector>,
}

impl Gf2Matrix {
    pub fn from_fn(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> bool) -> Self {
        let data = (0..rows)
            .map(|r| {
                let mut v = Gf2Vector::zeros(cols);
                for c in 0..cols {
                    if entry(r, c) {
                        v.set(c);
                    }
                }
                v
            })
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    /// `A z` over GF(2).
    pub fn mul_vec(&self, z: &Gf2Vector) -> Gf2Vector {
        let mut out = Gf2Vector::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            let parity = row.words.iter().zip(&z.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>();
            if parity % 2 == 1 {
                out.set(r);
            }
        }
        out
    }
}

/// Basis of `{z : A z = 0 (mod 2)}` plus the rank of `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Kernel {
    pub vectors: Vec<Gf2Vector>,
    pub rank: usize,
}

impl Gf2Kernel {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }
}

/// Gaussian elimination on the augmented rows `[column_j^T | e_j]`; rows
/// whose left part vanishes carry kernel vectors on the right.
pub fn null_space_mod2(a: &Gf2Matrix) -> Gf2Kernel {
    let (rows, cols) = (a.rows, a.cols);
    let width = rows + cols;
    let mut pivots: Vec<(usize, Gf2Vector)> = Vec::new();
    let mut vectors = Vec::new();
    for j in 0..cols {
        let mut r = Gf2Vector::zeros(width);
        for i in 0..rows {
            if a.get(i, j) {
                r.set(i);
            }
        }
        r.set(rows + j);
        for (p, row) in &pivots {
            if r.get(*p) {
                r.xor_assign(row);
            }
        }
        match r.lowest_one_below(rows) {
            Some(p) => pivots.push((p, r)),
            None => {
                let mut z = Gf2Vector::zeros(cols);
                for c in 0..cols {
                    if r.get(rows + c) {
                        z.set(c);
                    }
                }
                vectors.push(z);
            }
        }
    }
    Gf2Kernel {
        vectors,
        rank: pivots.len(),
    }
}

/// One row per factor-base prime plus a final sign row, one column per pair.
///
/// Prime rows hold `u_exponents - residual_exponents`; the sign row is 1 when
/// `u - vN < 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationMatrix {
    pub base: FactorBase,
    /// `columns[j]` has `base.len() + 1` entries.
    pub columns: Vec<Vec<i64>>,
    pub pairs: Vec<SrPair>,
}

impl RelationMatrix {
    pub fn rows(&self) -> usize {
        self.base.len() + 1
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn to_gf2(&self) -> Gf2Matrix {
        Gf2Matrix::from_fn(self.rows(), self.cols(), |r, c| self.columns[c][r] & 1 == 1)
    }
}

pub fn build_exponent_matrix(pairs: &[SrPair], base: &FactorBase) -> Result<RelationMatrix> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no relations to combine".into()));
    }
    let k = base.len();
    let mut columns = Vec::with_capacity(pairs.len());
    for (j, p) in pairs.iter().enumerate() {
        if p.u_exponents.len() != k || p.residual_exponents.len() != k {
            return Err(Error::InvalidInput(format!(
                "pair {j} was factored over a base of {} primes, expected {k}",
                p.u_exponents.len()
            )));
        }
        let mut col: Vec<i64> = p
            .u_exponents
            .iter()
            .zip(&p.residual_exponents)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect();
        col.push(p.residual_sign.is_negative() as i64);
        columns.push(col);
    }
    Ok(RelationMatrix {
        base: base.clone(),
        columns,
        pairs: pairs.to_vec(),
    })
}

/// Kernel vectors to try: the basis, then up to `combination_budget`
/// pairwise sums in lexicographic order.
fn candidate_vectors(kernel: &Gf2Kernel, combination_budget: usize) -> Vec<Gf2Vector> {
    let mut out = kernel.vectors.clone();
    let mut extra = 0;
    'outer: for i in 0..kernel.vectors.len() {
        for j in i + 1..kernel.vectors.len() {
            if extra == combination_budget {
                break 'outer;
            }
            let mut z = kernel.vectors[i].clone();
            z.xor_assign(&kernel.vectors[j]);
            out.push(z);
            extra += 1;
        }
    }
    out
}

/// The squares `X^2 = Y^2 (mod N)` produced by one kernel vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareCongruence {
    pub x: BigUint,
    pub y: BigUint,
}

/// `e = A z / 2`, `X = prod_{e>0} p^e`, `Y = prod_{e<0} p^-e`, both mod `N`.
pub fn congruence_for(m: &RelationMatrix, z: &Gf2Vector, n: &BigUint) -> Result<SquareCongruence> {
    if z.len() != m.cols() {
        return Err(Error::DimensionMismatch {
            expected: m.cols(),
            got: z.len(),
        });
    }
    let mut sum = vec![0i64; m.rows()];
    for c in z.ones() {
        for (s, &a) in sum.iter_mut().zip(&m.columns[c]) {
            *s += a;
        }
    }
    if let Some(r) = sum.iter().position(|s| s % 2 != 0) {
        return Err(Error::Invariant(format!("A z has an odd entry in row {r}")));
    }
    let mut x = BigUint::one();
    let mut y = BigUint::one();
    for (&p, &s) in m.base.primes().iter().zip(&sum) {
        let e = s / 2;
        if e > 0 {
            x = x * BigUint::from(p).modpow(&BigUint::from(e as u64), n) % n;
        } else if e < 0 {
            y = y * BigUint::from(p).modpow(&BigUint::from((-e) as u64), n) % n;
        }
    }
    if (&x * &x) % n != (&y * &y) % n {
        return Err(Error::Invariant("kernel vector does not give X^2 = Y^2 (mod N)".into()));
    }
    Ok(SquareCongruence { x, y })
}

/// Nontrivial factors from `gcd(X + Y, N)` and `gcd(X - Y, N)` over the
/// kernel basis and up to `combination_budget` pairwise sums.
pub fn extract_factors(m: &RelationMatrix, kernel: &Gf2Kernel, n: &BigUint, combination_budget: usize) -> Result<BTreeSet<BigUint>> {
    let one = BigUint::one();
    let mut factors = BTreeSet::new();
    for z in candidate_vectors(kernel, combination_budget) {
        let SquareCongruence { x, y } = congruence_for(m, &z, n)?;
        let sum = (&x + &y) % n;
        let diff = (&x + n - &y) % n;
        for g in [sum.gcd(n), diff.gcd(n)] {
            if g > one && g < *n && !g.is_zero() {
                factors.insert(g);
            }
        }
    }
    Ok(factors)
}
