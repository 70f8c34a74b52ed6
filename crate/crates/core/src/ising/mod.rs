//! Ising encoding of the `2^m` rounding-flip cube around a Babai point, and
//! two ways of finding its low-energy states.
//!
//! Bit `x_j = 1` means "move one step along `kappa_j * D_j`". Spins follow
//! `x = (1 - s) / 2`, so bit 0 is spin `+1`. In a [`Bitstring`] variable 0 is
//! the most significant bit; `"10"` sets `x_0`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::lattice::{BabaiSolution, CvpInstance, ReducedBasis};
use crate::{Error, Result};

mod brute;
mod optimize;
mod qaoa;

pub use brute::{brute_force_low_energy, BruteForce, ChunkExecutor, Sequential, DEFAULT_BRUTE_FORCE_CAP, DEFAULT_CHUNK_BITS};
pub use optimize::{grid_points_per_axis, minimize, Minimum};
pub use qaoa::{qaoa_sample, QaoaOutcome, QaoaSimulator, DEFAULT_OPT_BUDGET, DEFAULT_QAOA_DEPTH, MAX_STATEVECTOR_QUBITS};

/// Assignment of `len` binary variables; variable 0 is the most significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bitstring {
    len: u32,
    value: u64,
}

impl Bitstring {
    pub const MAX_LEN: u32 = 63;

    pub fn new(value: u64, len: u32) -> Result<Self> {
        if len == 0 || len > Self::MAX_LEN {
            return Err(Error::InvalidInput(alloc::format!("bitstring length {len} out of range")));
        }
        if value >> len != 0 {
            return Err(Error::InvalidInput(alloc::format!("value {value} does not fit in {len} bits")));
        }
        Ok(Self { len, value })
    }

    pub fn zeros(len: u32) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Self::new(value, bits.len() as u32)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Value of variable `j`.
    pub fn bit(&self, j: usize) -> bool {
        (self.value >> (self.len as usize - 1 - j)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|j| self.bit(j))
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidInput(alloc::format!("bad bit character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

/// `E(s) = offset + sum h_j s_j + sum_{i<j} J_ij s_i s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian {
    pub num_vars: usize,
    pub offset: f64,
    pub linear: Vec<f64>,
    /// Row-major `m x m`; only entries with `i < j` are used.
    pub couplings: Vec<f64>,
}

impl IsingHamiltonian {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            offset: 0.0,
            linear: vec![0.0; num_vars],
            couplings: vec![0.0; num_vars * num_vars],
        }
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        if a == b {
            0.0
        } else {
            self.couplings[a * self.num_vars + b]
        }
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        assert!(a != b, "no self-coupling");
        self.couplings[a * self.num_vars + b] = value;
    }

    pub fn energy(&self, x: Bitstring) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        Ok(self.energy_of_value(x.value()))
    }

    /// Energy of the assignment encoded by `value` (no length check).
    pub(crate) fn energy_of_value(&self, value: u64) -> f64 {
        let m = self.num_vars;
        let spin = |j: usize| if (value >> (m - 1 - j)) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = self.offset;
        for j in 0..m {
            e += self.linear[j] * spin(j);
        }
        for i in 0..m {
            let si = spin(i);
            for j in i + 1..m {
                e += self.couplings[i * m + j] * si * spin(j);
            }
        }
        e
    }

    /// Equivalent QUBO `c + sum a_j x_j + sum_{i<j} b_ij x_i x_j`.
    pub(crate) fn to_qubo(&self) -> Qubo {
        let m = self.num_vars;
        let mut constant = self.offset;
        let mut linear = vec![0.0; m];
        let mut quad = vec![0.0; m * m];
        for j in 0..m {
            constant += self.linear[j];
            linear[j] -= 2.0 * self.linear[j];
        }
        for i in 0..m {
            for j in i + 1..m {
                let c = self.couplings[i * m + j];
                constant += c;
                linear[i] -= 2.0 * c;
                linear[j] -= 2.0 * c;
                quad[i * m + j] = 4.0 * c;
                quad[j * m + i] = 4.0 * c;
            }
        }
        Qubo {
            constant,
            linear,
            quad,
        }
    }
}

pub fn energy(h: &IsingHamiltonian, x: Bitstring) -> Result<f64> {
    h.energy(x)
}

/// Symmetric-storage QUBO used by the enumerator.
#[derive(Debug, Clone)]
pub(crate) struct Qubo {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub quad: Vec<f64>,
}

/// A state with its energy and how often it was drawn (1 for enumeration).
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySample {
    pub bits: Bitstring,
    pub energy: f64,
    pub count: u64,
}

/// Squared-distance Hamiltonian of the flip cube around `babai`.
pub fn build_hamiltonian(cvp: &CvpInstance, babai: &BabaiSolution, reduced: &ReducedBasis) -> Result<IsingHamiltonian> {
    if cvp.dimension != reduced.rank() {
        return Err(Error::DimensionMismatch {
            expected: cvp.dimension,
            got: reduced.rank(),
        });
    }
    hamiltonian_for_target(&cvp.target_f64(), babai, reduced)
}

/// As [`build_hamiltonian`] for an arbitrary real target.
///
/// With `r = t - b` and `v(x) = b + sum x_j kappa_j D_j`,
/// `|t - v(x)|^2 = |r|^2 + sum x_j (|D_j|^2 - 2 kappa_j <r, D_j>)
///  + sum_{i<j} 2 x_i x_j kappa_i kappa_j <D_i, D_j>`.
pub fn hamiltonian_for_target(target: &[f64], babai: &BabaiSolution, reduced: &ReducedBasis) -> Result<IsingHamiltonian> {
    let m = reduced.rank();
    let dim = reduced.vectors[0].len();
    if babai.coeffs.len() != m || babai.residual_signs.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: babai.coeffs.len(),
        });
    }
    if target.len() != dim || babai.point.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: target.len(),
        });
    }
    let d = reduced.vectors_f64();
    let r: Vec<f64> = target.iter().zip(&babai.point).map(|(t, &b)| t - b as f64).collect();
    let kappa: Vec<f64> = babai.residual_signs.iter().map(|&k| k as f64).collect();
    let dot = crate::lattice::dot;

    let constant = dot(&r, &r);
    let a: Vec<f64> = (0..m).map(|j| dot(&d[j], &d[j]) - 2.0 * kappa[j] * dot(&r, &d[j])).collect();

    let mut h = IsingHamiltonian::zero(m);
    h.offset = constant;
    for j in 0..m {
        h.offset += a[j] / 2.0;
        h.linear[j] -= a[j] / 2.0;
    }
    for i in 0..m {
        for j in i + 1..m {
            let b = 2.0 * kappa[i] * kappa[j] * dot(&d[i], &d[j]);
            h.offset += b / 4.0;
            h.linear[i] -= b / 4.0;
            h.linear[j] -= b / 4.0;
            h.set_coupling(i, j, b / 4.0);
        }
    }
    Ok(h)
}

/// Lattice point `b + sum x_j kappa_j D_j` for a cube corner.
pub fn cube_point(babai: &BabaiSolution, reduced: &ReducedBasis, x: Bitstring) -> Result<Vec<i64>> {
    if x.len() != reduced.rank() {
        return Err(Error::DimensionMismatch {
            expected: reduced.rank(),
            got: x.len(),
        });
    }
    let mut p = babai.point.clone();
    for (j, flip) in x.bits().enumerate() {
        if flip {
            let k = babai.residual_signs[j] as i64;
            for (pi, &dj) in p.iter_mut().zip(&reduced.vectors[j]) {
                *pi += k * dj;
            }
        }
    }
    Ok(p)
}
