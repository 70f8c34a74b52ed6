//! Statevector simulation of the standard QAOA ansatz on an Ising
//! Hamiltonian, with a budgeted classical outer loop and shot sampling.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use super::optimize::minimize;
use super::{Bitstring, EnergySample, IsingHamiltonian};
use crate::{Error, Result};

pub const MAX_STATEVECTOR_QUBITS: usize = 20;
pub const DEFAULT_QAOA_DEPTH: usize = 2;
pub const DEFAULT_OPT_BUDGET: usize = 500;

/// Diagonal cost operator plus transverse-field mixer on `2^m` amplitudes.
///
/// Amplitude index `x` is the [`Bitstring`] value, so qubit `j` is bit
/// `m - 1 - j` of the index.
#[derive(Debug, Clone)]
pub struct QaoaSimulator {
    num_qubits: usize,
    energies: Vec<f64>,
}

impl QaoaSimulator {
    pub fn new(h: &IsingHamiltonian) -> Result<Self> {
        let m = h.num_vars;
        if m == 0 {
            return Err(Error::InvalidInput("Hamiltonian has no variables".into()));
        }
        if m > MAX_STATEVECTOR_QUBITS {
            return Err(Error::Infeasible(format!(
                "statevector of 2^{m} amplitudes exceeds the 2^{MAX_STATEVECTOR_QUBITS} cap"
            )));
        }
        let energies = (0..1u64 << m).map(|v| h.energy_of_value(v)).collect();
        Ok(Self { num_qubits: m, energies })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Diagonal of `exp(-i gamma H)`.
    pub fn phase_diagonal(&self, gamma: f64) -> Vec<Complex64> {
        self.energies.iter().map(|&e| Complex64::from_polar(1.0, -gamma * e)).collect()
    }

    pub fn uniform_state(&self) -> Vec<Complex64> {
        let n = self.energies.len();
        vec![Complex64::new(1.0 / libm::sqrt(n as f64), 0.0); n]
    }

    fn apply_phase(&self, state: &mut [Complex64], gamma: f64) {
        for (a, &e) in state.iter_mut().zip(&self.energies) {
            *a *= Complex64::from_polar(1.0, -gamma * e);
        }
    }

    /// `exp(-i beta X)` on every qubit.
    fn apply_mixer(&self, state: &mut [Complex64], beta: f64) {
        let c = libm::cos(beta);
        let s = libm::sin(beta);
        let mis = Complex64::new(0.0, -s);
        for q in 0..self.num_qubits {
            let stride = 1usize << q;
            let mut base = 0;
            while base < state.len() {
                for i in base..base + stride {
                    let a = state[i];
                    let b = state[i + stride];
                    state[i] = a * c + b * mis;
                    state[i + stride] = a * mis + b * c;
                }
                base += 2 * stride;
            }
        }
    }

    /// Final state for angles `gammas`, `betas`; `on_layer(l, state)` runs
    /// after each of the `p` layers.
    pub fn evolve_observed(&self, gammas: &[f64], betas: &[f64], on_layer: &mut dyn FnMut(usize, &[Complex64])) -> Vec<Complex64> {
        assert_eq!(gammas.len(), betas.len());
        let mut state = self.uniform_state();
        for (layer, (&g, &b)) in gammas.iter().zip(betas).enumerate() {
            self.apply_phase(&mut state, g);
            self.apply_mixer(&mut state, b);
            on_layer(layer, &state);
        }
        state
    }

    pub fn evolve(&self, gammas: &[f64], betas: &[f64]) -> Vec<Complex64> {
        self.evolve_observed(gammas, betas, &mut |_, _| {})
    }

    /// `<psi| H |psi>`.
    pub fn expectation(&self, state: &[Complex64]) -> f64 {
        state.iter().zip(&self.energies).map(|(a, &e)| a.norm_sqr() * e).sum()
    }
}

/// Optimised angles, the resulting expectation and the sampled states.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaOutcome {
    /// Unique sampled states, ascending by `(energy, bitstring)`.
    pub samples: Vec<EnergySample>,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub expectation: f64,
    pub uniform_expectation: f64,
    pub evaluations: usize,
}

/// Optimises a depth-`depth` QAOA circuit for `h` within `opt_budget`
/// expectation evaluations and draws `shots` measurements using `rng`.
pub fn qaoa_sample<R: Rng + ?Sized>(
    h: &IsingHamiltonian,
    depth: usize,
    shots: u64,
    opt_budget: usize,
    rng: &mut R,
) -> Result<QaoaOutcome> {
    if shots == 0 {
        return Err(Error::InvalidInput("QAOA needs at least one shot".into()));
    }
    if depth == 0 {
        return Err(Error::Config("QAOA depth must be positive".into()));
    }
    if opt_budget == 0 {
        return Err(Error::Config("optimizer budget must be positive".into()));
    }
    let sim = QaoaSimulator::new(h)?;
    let uniform_expectation = sim.expectation(&sim.uniform_state());

    let mut objective = |theta: &[f64]| {
        let state = sim.evolve(&theta[..depth], &theta[depth..]);
        sim.expectation(&state)
    };
    let best = minimize(2 * depth, opt_budget, &mut objective);
    let gammas = best.point[..depth].to_vec();
    let betas = best.point[depth..].to_vec();
    let state = sim.evolve(&gammas, &betas);

    let mut cumulative = Vec::with_capacity(state.len());
    let mut total = 0.0;
    for a in &state {
        total += a.norm_sqr();
        cumulative.push(total);
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..shots {
        let r = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= r).min(state.len() - 1);
        *counts.entry(idx as u64).or_insert(0) += 1;
    }
    let len = sim.num_qubits as u32;
    let mut samples: Vec<EnergySample> = counts
        .into_iter()
        .map(|(value, count)| EnergySample {
            bits: Bitstring { len, value },
            energy: sim.energies[value as usize],
            count,
        })
        .collect();
    samples.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.bits.cmp(&b.bits)));

    Ok(QaoaOutcome {
        samples,
        gammas,
        betas,
        expectation: best.value,
        uniform_expectation,
        evaluations: best.evaluations,
    })
}
