//! The iteration loop: random CVP instance, LLL and Babai, Ising search,
//! relation harvesting, then mod-2 linear algebra once enough pairs exist.
//!
//! [`Run`] exposes the loop one iteration at a time so callers can persist
//! [`RunState`] between iterations and resume later. Iteration `i` draws all
//! of its randomness from ChaCha20 stream `i` of the run seed, so a resumed
//! run is indistinguishable from an uninterrupted one.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::gf2::{build_exponent_matrix, extract_factors, null_space_mod2};
use crate::ising::{
    build_hamiltonian, qaoa_sample, Bitstring, BruteForce, ChunkExecutor, IsingHamiltonian, DEFAULT_BRUTE_FORCE_CAP,
    DEFAULT_CHUNK_BITS, DEFAULT_OPT_BUDGET, DEFAULT_QAOA_DEPTH, MAX_STATEVECTOR_QUBITS,
};
use crate::lattice::{
    babai_nearest_plane, build_cvp_instance, lattice_dimension, lll_reduce, BabaiSolution, CvpInstance, ReducedBasis,
    DEFAULT_LLL_DELTA,
};
use crate::numtheory::{first_primes, is_prime, perfect_power, FactorBase};
use crate::relations::{
    coeff_vector_to_uv, default_smoothness_bound, required_sr_pairs, states_to_coeff_vectors, test_sr_pair, PairLedger,
    DEFAULT_SLACK,
};
use crate::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 4;
pub const DEFAULT_MAX_ITERATIONS: u64 = 1000;
/// Sample counts default to `2^min(MAX_DEFAULT_SAMPLE_BITS, m)`.
pub const MAX_DEFAULT_SAMPLE_BITS: usize = 15;
/// Primes tried before the lattice dimension is known.
const PRESCREEN_PRIMES: usize = 10;
/// Inputs below this are not worth a lattice.
pub const MIN_N: u64 = 15;

/// Why `N` is not handed to the lattice loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    TooSmall,
    Prime,
    /// `N = a^k` with `k >= 2`.
    PerfectPower,
    /// A prime from the trial-division list divides `N`.
    SmallFactor,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::TooSmall => "N is too small",
            Rejection::Prime => "N is prime",
            Rejection::PerfectPower => "N is a perfect power",
            Rejection::SmallFactor => "N has a small prime factor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScreenOutcome {
    Ok,
    TrivialFactor(BigUint),
    Reject(Rejection),
}

/// Cheap checks before any lattice work, in this order: prime, division by
/// `trial_primes`, perfect power, size.
pub fn screen(n: &BigUint, trial_primes: &[u64]) -> ScreenOutcome {
    if *n < BigUint::from(2u32) {
        return ScreenOutcome::Reject(Rejection::TooSmall);
    }
    if is_prime(n) {
        return ScreenOutcome::Reject(Rejection::Prime);
    }
    for &p in trial_primes {
        let p = BigUint::from(p);
        if &p < n && (n % &p).is_zero() {
            return ScreenOutcome::TrivialFactor(p);
        }
    }
    if let Some((root, _)) = perfect_power(n) {
        return ScreenOutcome::TrivialFactor(root);
    }
    if *n < BigUint::from(MIN_N) {
        return ScreenOutcome::Reject(Rejection::TooSmall);
    }
    ScreenOutcome::Ok
}

fn require_screened(n: &BigUint, trial_primes: &[u64]) -> Result<()> {
    match screen(n, trial_primes) {
        ScreenOutcome::Ok => Ok(()),
        ScreenOutcome::Reject(reason) => Err(Error::Precondition { reason, factor: None }),
        ScreenOutcome::TrivialFactor(f) => {
            let reason = if perfect_power(n).is_some_and(|(root, _)| root == f) {
                Rejection::PerfectPower
            } else {
                Rejection::SmallFactor
            };
            Err(Error::Precondition {
                reason,
                factor: Some(f),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BruteForce,
    Qaoa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::BruteForce => "brute-force",
            Method::Qaoa => "qaoa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute-force" | "brute_force" => Ok(Method::BruteForce),
            "qaoa" => Ok(Method::Qaoa),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

/// How the smoothness bound `B2` turns into a factor base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FactorBaseRule {
    /// The first `B2` primes.
    #[default]
    FirstPrimes,
    /// Every prime `<= B2`.
    PrimesUpTo,
}

impl FactorBaseRule {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorBaseRule::FirstPrimes => "first-primes",
            FactorBaseRule::PrimesUpTo => "primes-up-to",
        }
    }

    pub fn build(self, smoothness_bound: u64) -> Result<FactorBase> {
        match self {
            FactorBaseRule::FirstPrimes => {
                let count = usize::try_from(smoothness_bound).map_err(|_| Error::Overflow("factor base size"))?;
                FactorBase::first(count)
            }
            FactorBaseRule::PrimesUpTo => FactorBase::primes_up_to(smoothness_bound),
        }
    }
}

impl fmt::Display for FactorBaseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FactorBaseRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-primes" => Ok(FactorBaseRule::FirstPrimes),
            "primes-up-to" => Ok(FactorBaseRule::PrimesUpTo),
            _ => Err(Error::Config(format!("unknown factor base rule {s:?}"))),
        }
    }
}

/// Everything that determines a run. Optional fields are derived from `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub n: BigUint,
    pub lattice_parameter: u32,
    pub precision: u32,
    /// `B2`; defaults to `2 m^2`.
    pub smoothness_bound: Option<u64>,
    pub slack: usize,
    pub method: Method,
    /// States kept per iteration by brute force.
    pub samples: Option<u64>,
    /// Measurements per iteration for QAOA.
    pub shots: Option<u64>,
    pub qaoa_depth: usize,
    pub opt_budget: usize,
    pub lll_delta: f64,
    pub max_iterations: u64,
    pub dimension_override: Option<usize>,
    pub seed: u64,
    pub brute_force_cap: usize,
    /// Pairwise kernel combinations tried after the basis vectors.
    pub combination_budget: usize,
    pub factor_base: FactorBaseRule,
}

impl PipelineConfig {
    pub fn new(n: BigUint, seed: u64) -> Self {
        Self {
            n,
            lattice_parameter: 1,
            precision: DEFAULT_PRECISION,
            smoothness_bound: None,
            slack: DEFAULT_SLACK,
            method: Method::BruteForce,
            samples: None,
            shots: None,
            qaoa_depth: DEFAULT_QAOA_DEPTH,
            opt_budget: DEFAULT_OPT_BUDGET,
            lll_delta: DEFAULT_LLL_DELTA,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            dimension_override: None,
            seed,
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
            combination_budget: 0,
            factor_base: FactorBaseRule::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("lattice parameter", self.lattice_parameter as u64),
            ("precision", self.precision as u64),
            ("slack", self.slack as u64),
            ("QAOA depth", self.qaoa_depth as u64),
            ("optimizer budget", self.opt_budget as u64),
            ("max iterations", self.max_iterations),
            ("samples", self.samples.unwrap_or(1)),
            ("shots", self.shots.unwrap_or(1)),
            ("smoothness bound", self.smoothness_bound.unwrap_or(1)),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !(self.lll_delta > 0.25 && self.lll_delta < 1.0) {
            return Err(Error::Config(format!("LLL delta {} not in (0.25, 1)", self.lll_delta)));
        }
        Ok(())
    }

    /// Fills in every derived quantity without running anything.
    pub fn resolve(&self) -> Result<Resolved> {
        self.validate()?;
        let m = match self.dimension_override {
            Some(m) if m < 2 => return Err(Error::Config(format!("dimension {m} < 2"))),
            Some(m) => m,
            None => lattice_dimension(&self.n, self.lattice_parameter)?,
        };
        let smoothness_bound = self.smoothness_bound.unwrap_or_else(|| default_smoothness_bound(m));
        let required = required_sr_pairs(m, smoothness_bound, self.slack)?;
        let default_samples = 1u64 << m.min(MAX_DEFAULT_SAMPLE_BITS);
        let samples = self.samples.unwrap_or(default_samples);
        let shots = self.shots.unwrap_or(default_samples);
        match self.method {
            Method::BruteForce => {
                if m > self.brute_force_cap {
                    return Err(Error::Infeasible(format!(
                        "m = {m} exceeds the brute-force cap of {}",
                        self.brute_force_cap
                    )));
                }
                if m < 64 && samples > 1u64 << m {
                    return Err(Error::Config(format!("{samples} samples requested from 2^{m} states")));
                }
            }
            Method::Qaoa => {
                if m > MAX_STATEVECTOR_QUBITS {
                    return Err(Error::Infeasible(format!(
                        "m = {m} exceeds the statevector cap of {MAX_STATEVECTOR_QUBITS} qubits"
                    )));
                }
            }
        }
        Ok(Resolved {
            m,
            bits: self.n.bits(),
            smoothness_bound,
            required,
            samples,
            shots,
        })
    }
}

/// Derived run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolved {
    pub m: usize,
    /// Bit length of `N`.
    pub bits: u64,
    pub smoothness_bound: u64,
    pub required: usize,
    pub samples: u64,
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Fail,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Fail => "fail",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success" => Ok(Outcome::Success),
            "fail" => Ok(Outcome::Fail),
            _ => Err(Error::InvalidInput(format!("unknown outcome {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iteration: u64,
    pub babai_distance: f64,
    /// Distinct states examined.
    pub states: usize,
    pub min_energy: Option<f64>,
    pub new_pairs: usize,
    pub cumulative_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub n: BigUint,
    pub bits: u64,
    pub m: usize,
    pub method: Method,
    pub smoothness_bound: u64,
    pub factor_base_size: usize,
    pub iterations: u64,
    pub sr_pairs: usize,
    pub required: usize,
    pub kernel_dimension: usize,
    pub outcome: Outcome,
    /// Nontrivial divisors of `N`, ascending.
    pub factors: Vec<BigUint>,
    /// Filled in by callers that own a clock; always 0 here.
    pub wall_time_secs: f64,
    pub seed: u64,
    pub pairs_per_iteration: Vec<usize>,
}

/// What a run carries from one iteration to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub ledger: PairLedger,
    pub traces: Vec<IterationTrace>,
    pub next_iteration: u64,
}

/// One iteration's lattice problem and its Hamiltonian.
#[derive(Debug, Clone)]
pub struct IterationInstance {
    pub cvp: CvpInstance,
    pub reduced: ReducedBasis,
    pub babai: BabaiSolution,
    pub hamiltonian: IsingHamiltonian,
}

/// RNG for iteration `iteration` of a run seeded with `seed`.
pub fn iteration_rng(seed: u64, iteration: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// Builds the CVP instance, reduced basis, Babai point and Hamiltonian for
/// one iteration, consuming the lattice part of `rng`.
pub fn build_iteration(n: &BigUint, m: usize, precision: u32, lll_delta: f64, rng: &mut ChaCha20Rng) -> Result<IterationInstance> {
    let cvp = build_cvp_instance(m, precision, n, rng)?;
    let reduced = lll_reduce(&cvp.basis, lll_delta)?;
    let babai = babai_nearest_plane(&reduced, &cvp.target_f64())?;
    let hamiltonian = build_hamiltonian(&cvp, &babai, &reduced)?;
    Ok(IterationInstance {
        cvp,
        reduced,
        babai,
        hamiltonian,
    })
}

/// A run in progress.
#[derive(Debug, Clone)]
pub struct Run {
    config: PipelineConfig,
    params: Resolved,
    base: FactorBase,
    state: RunState,
}

impl Run {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        Self::start(config, None)
    }

    /// Continues from a persisted state produced by the same configuration.
    pub fn resume(config: PipelineConfig, state: RunState) -> Result<Self> {
        Self::start(config, Some(state))
    }

    fn start(config: PipelineConfig, state: Option<RunState>) -> Result<Self> {
        require_screened(&config.n, &first_primes(PRESCREEN_PRIMES)?)?;
        let params = config.resolve()?;
        let base = config.factor_base.build(params.smoothness_bound)?;
        let lattice_primes = first_primes(params.m)?;
        let trial = if lattice_primes.len() > base.len() {
            &lattice_primes[..]
        } else {
            base.primes()
        };
        require_screened(&config.n, trial)?;

        let state = match state {
            None => RunState {
                ledger: PairLedger::new(params.required),
                traces: Vec::new(),
                next_iteration: 0,
            },
            Some(s) => {
                check_resumable(&s, &config, &params, &base)?;
                s
            }
        };
        Ok(Self {
            config,
            params,
            base,
            state,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn params(&self) -> &Resolved {
        &self.params
    }

    pub fn factor_base(&self) -> &FactorBase {
        &self.base
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn into_state(self) -> RunState {
        self.state
    }

    /// True once the ledger is full or the iteration cap is reached.
    pub fn is_done(&self) -> bool {
        self.state.ledger.is_full() || self.state.next_iteration >= self.config.max_iterations
    }

    /// Runs the next iteration and returns its trace.
    pub fn step(&mut self, exec: &dyn ChunkExecutor) -> Result<&IterationTrace> {
        if self.is_done() {
            return Err(Error::InvalidInput("run has already finished its iterations".into()));
        }
        let iteration = self.state.next_iteration;
        let n = &self.config.n;
        let mut rng = iteration_rng(self.config.seed, iteration);
        let inst = build_iteration(n, self.params.m, self.config.precision, self.config.lll_delta, &mut rng)?;

        let samples = match self.config.method {
            Method::BruteForce => BruteForce {
                cap: self.config.brute_force_cap,
                chunk_bits: DEFAULT_CHUNK_BITS,
            }
            .run(&inst.hamiltonian, self.params.samples, exec)?,
            Method::Qaoa => {
                qaoa_sample(
                    &inst.hamiltonian,
                    self.config.qaoa_depth,
                    self.params.shots,
                    self.config.opt_budget,
                    &mut rng,
                )?
                .samples
            }
        };
        let states: Vec<Bitstring> = samples.iter().map(|s| s.bits).collect();
        let min_energy = samples.first().map(|s| s.energy);

        let mut new_pairs = 0;
        for z in states_to_coeff_vectors(&states, &inst.babai)? {
            let e = inst.reduced.input_coefficients(&z)?;
            let (u, v) = coeff_vector_to_uv(&e, &inst.cvp.prime_basis)?;
            let Some(pair) = test_sr_pair(&u, &v, n, &self.base)? else {
                continue;
            };
            if !pair.congruence_holds(n, &self.base) {
                return Err(Error::Invariant(format!("pair ({u}, {v}) fails its congruence")));
            }
            if self.state.ledger.insert(pair) {
                new_pairs += 1;
            }
        }

        self.state.traces.push(IterationTrace {
            iteration,
            babai_distance: inst.babai.distance,
            states: states.len(),
            min_energy,
            new_pairs,
            cumulative_pairs: self.state.ledger.len(),
        });
        self.state.next_iteration += 1;
        Ok(self.state.traces.last().expect("just pushed"))
    }

    /// Combines whatever pairs were collected and reports.
    pub fn finish(&self) -> Result<RunReport> {
        let n = &self.config.n;
        let pairs = self.state.ledger.pairs();
        let (factors, kernel_dimension) = if pairs.is_empty() {
            (BTreeSet::new(), 0)
        } else {
            let matrix = build_exponent_matrix(pairs, &self.base)?;
            let kernel = null_space_mod2(&matrix.to_gf2());
            let factors = extract_factors(&matrix, &kernel, n, self.config.combination_budget)?;
            (factors, kernel.dimension())
        };
        for f in &factors {
            if f.is_one() || f >= n || !n.is_multiple_of(f) {
                return Err(Error::Invariant(format!("{f} is not a proper divisor of N")));
            }
        }
        let outcome = if factors.is_empty() {
            Outcome::Fail
        } else {
            Outcome::Success
        };
        Ok(RunReport {
            n: n.clone(),
            bits: self.params.bits,
            m: self.params.m,
            method: self.config.method,
            smoothness_bound: self.params.smoothness_bound,
            factor_base_size: self.base.len(),
            iterations: self.state.next_iteration,
            sr_pairs: pairs.len(),
            required: self.params.required,
            kernel_dimension,
            outcome,
            factors: factors.into_iter().collect(),
            wall_time_secs: 0.0,
            seed: self.config.seed,
            pairs_per_iteration: self.state.traces.iter().map(|t| t.new_pairs).collect(),
        })
    }
}

fn check_resumable(state: &RunState, config: &PipelineConfig, params: &Resolved, base: &FactorBase) -> Result<()> {
    let mismatch = |what: String| Err(Error::Config(format!("cannot resume: {what}")));
    if state.ledger.required() != params.required {
        return mismatch(format!(
            "ledger needs {} pairs, configuration needs {}",
            state.ledger.required(),
            params.required
        ));
    }
    if state.traces.len() as u64 != state.next_iteration {
        return mismatch(format!(
            "{} traces for {} iterations",
            state.traces.len(),
            state.next_iteration
        ));
    }
    if state.next_iteration > config.max_iterations {
        return mismatch(format!(
            "{} iterations already exceed the cap of {}",
            state.next_iteration, config.max_iterations
        ));
    }
    if let Some(p) = state
        .ledger
        .pairs()
        .iter()
        .find(|p| p.u_exponents.len() != base.len() || !p.congruence_holds(&config.n, base))
    {
        return mismatch(format!("pair ({}, {}) does not belong to this run", p.u, p.v));
    }
    Ok(())
}

/// Runs to completion on `exec`.
pub fn factor(config: PipelineConfig, exec: &dyn ChunkExecutor) -> Result<RunReport> {
    let mut run = Run::new(config)?;
    while !run.is_done() {
        run.step(exec)?;
    }
    run.finish()
}
