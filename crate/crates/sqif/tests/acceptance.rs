//! Acceptance checks, one line per criterion.
//!
//! `cargo test -p sqif --test acceptance` runs the mandatory set. Append
//! `-- --full` to also run the long table rerun and the commands without a
//! dimension override.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use rand::Rng;
use serde_json::Value;
use sqif::table::PUBLISHED;
use sqif_core::gf2::{build_exponent_matrix, congruence_for, extract_factors, null_space_mod2, Gf2Matrix};
use sqif_core::ising::{brute_force_low_energy, cube_point, qaoa_sample, Bitstring, IsingHamiltonian, QaoaSimulator};
use sqif_core::lattice::{build_cvp_instance, lattice_dimension, lll_reduce};
use sqif_core::numtheory::FactorBase;
use sqif_core::pipeline::{build_iteration, iteration_rng, PipelineConfig, Run};
use sqif_core::relations::test_sr_pair;
use sqif_core::{BigInt, BigUint};

use common::{sqif, without_wall_time};

const N40: &str = "624911573291";
const N48: &str = "261980999226229";
const SEEDS: [u64; 3] = [1, 2, 3];
/// Seed for the random instances of the property checks.
const PROPERTY_SEED: u64 = 20_240_101;

struct Check {
    id: &'static str,
    passed: Option<bool>,
    detail: String,
}

impl Check {
    fn new(id: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { id, passed: Some(passed), detail: detail.into() }
    }

    fn skipped(id: &'static str, detail: impl Into<String>) -> Self {
        Self { id, passed: None, detail: detail.into() }
    }

    fn print(&self) {
        let tag = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        println!("[{tag}] {:<4} {}", self.id, self.detail);
    }
}

fn big(s: &str) -> BigUint {
    s.parse().unwrap()
}

/// Runs `factor` and returns the exit code with the parsed report, if any.
fn factor(args: &[&str]) -> (i32, Option<Value>) {
    let mut argv = vec!["factor"];
    argv.extend_from_slice(args);
    let out = sqif(&argv);
    let doc = serde_json::from_str::<Value>(&out.stdout).ok();
    (out.code, doc.and_then(|d| d.get("report").cloned()).filter(|r| !r.is_null()))
}

fn field_u64(report: &Value, key: &str) -> u64 {
    report[key].as_u64().unwrap_or_default()
}

/// Factors in the report that properly divide `n`, with their cofactors
/// multiplying back to `n`.
fn sound_factors(report: &Value, n: &BigUint) -> bool {
    let Some(factors) = report["factors"].as_array() else {
        return false;
    };
    !factors.is_empty()
        && factors.iter().all(|f| {
            let f: BigUint = f.as_str().unwrap_or("0").parse().unwrap_or_default();
            let one = BigUint::from(1u32);
            f > one && &f < n && (n % &f) == BigUint::default() && &f * (n / &f) == *n
        })
}

/// Brute-force reproduction over the fixed seeds. Passes if any seed succeeds.
fn reproduction(id: &'static str, n: &str, dimension: Option<&str>, cap: u64, published: &str) -> Check {
    let nn = big(n);
    let cap_s = cap.to_string();
    let mut runs = Vec::new();
    let mut passed = false;
    for seed in SEEDS {
        let seed_s = seed.to_string();
        let mut args = vec!["--n", n, "--lattice-parameter", "1", "--method", "brute-force", "--seed", &seed_s, "--max-iterations", &cap_s];
        if let Some(d) = dimension {
            args.extend_from_slice(&["--dimension", d]);
        }
        let (code, report) = factor(&args);
        let run = match &report {
            Some(r) => {
                let ok = code == 0 && sound_factors(r, &nn) && field_u64(r, "iterations") <= cap;
                passed |= ok;
                format!(
                    "seed {seed}: m={} {} at {} iterations, {} pairs",
                    field_u64(r, "m"),
                    r["outcome"].as_str().unwrap_or("?"),
                    field_u64(r, "iterations"),
                    field_u64(r, "sr_pairs")
                )
            }
            None => format!("seed {seed}: exit {code}, no report"),
        };
        runs.push(run);
    }
    let how = match dimension {
        Some(d) => format!("--dimension {d}"),
        None => "no dimension override".into(),
    };
    Check::new(id, passed, format!("{n} brute force ({how}, cap {cap}): {}; published {published}", runs.join("; ")))
}

fn qaoa_end_to_end() -> Check {
    let start = Instant::now();
    let (code, report) = factor(&["--n", N48, "--lattice-parameter", "1", "--method", "qaoa", "--dimension", "12", "--seed", "1"]);
    let secs = start.elapsed().as_secs_f64();
    match report {
        Some(r) => {
            let ok = (code == 0 || code == 1) && field_u64(&r, "m") == 12 && r["method"] == "qaoa";
            Check::new(
                "2b",
                ok,
                format!(
                    "{N48} QAOA m={} ran end to end: {} after {} iterations, {} of {} pairs, exit {code}, {secs:.0}s; published success at 127",
                    field_u64(&r, "m"),
                    r["outcome"].as_str().unwrap_or("?"),
                    field_u64(&r, "iterations"),
                    field_u64(&r, "sr_pairs"),
                    field_u64(&r, "required")
                ),
            )
        }
        None => Check::new("2b", false, format!("{N48} QAOA m=12 produced no report (exit {code})")),
    }
}

fn dimension_formula() -> Check {
    let expected = [(80, 2, 26), (90, 1, 15), (90, 2, 30), (100, 1, 14), (100, 2, 28), (120, 1, 17), (128, 1, 18)];
    let mut bad = Vec::new();
    for (bits, l, m) in expected {
        let row = PUBLISHED.iter().find(|r| r.bits == bits).expect("row exists");
        let got = lattice_dimension(&big(row.n), l).ok();
        if got != Some(m) {
            bad.push(format!("{bits}-bit l={l}: {got:?} != {m}"));
        }
    }
    let detail = if bad.is_empty() {
        format!("lattice_dimension matches all {} large-row qubit counts exactly", expected.len())
    } else {
        bad.join("; ")
    };
    Check::new("3", bad.is_empty(), detail)
}

fn full_table() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = sqif(&["reproduce-table", "--tier", "full", "--out-dir", out_dir, "--seed", "1"]);
    let table = common::read_json(&dir.path().join("table.json"));
    let row = table["rows"]
        .as_array()
        .and_then(|rows| rows.iter().find(|r| r["bits"] == 80))
        .cloned()
        .unwrap_or(Value::Null);
    let outcome = row["outcome"].as_str().unwrap_or("not run");
    let pairs = row["pairs"].as_u64();
    let required = row["required"].as_u64();
    let ok = out.code == 0 && outcome == "fail" && pairs < required;
    Check::new(
        "4",
        ok,
        format!("reproduce-table --tier full: 80-bit row {outcome} with {pairs:?} of {required:?} pairs; published fail with 1295"),
    )
}

/// Exact Gram-Schmidt data of integer columns: `d[i]` is the Gram
/// determinant of the first `i` vectors and `lambda[i][j] = d[j+1] mu[i][j]`.
fn integral_gram_schmidt(b: &[Vec<i64>]) -> (Vec<BigInt>, Vec<Vec<BigInt>>) {
    let k = b.len();
    let mut d = vec![BigInt::from(1); k + 1];
    let mut lambda = vec![vec![BigInt::default(); k]; k];
    for i in 0..k {
        for j in 0..=i {
            let mut u: BigInt = b[i].iter().zip(&b[j]).map(|(&x, &y)| BigInt::from(x) * BigInt::from(y)).sum();
            for h in 0..j {
                u = (&d[h + 1] * u - &lambda[i][h] * &lambda[j][h]) / &d[h];
            }
            if j < i {
                lambda[i][j] = u;
            } else {
                d[i + 1] = u;
            }
        }
    }
    (d, lambda)
}

/// Size reduction `|mu| <= 1/2` and the Lovász condition for `delta = 99/100`,
/// both in exact arithmetic.
fn exactly_lll_reduced(b: &[Vec<i64>]) -> bool {
    let (d, lambda) = integral_gram_schmidt(b);
    let size_reduced = (0..b.len()).all(|i| (0..i).all(|j| (BigInt::from(2) * &lambda[i][j]).magnitude() <= d[j + 1].magnitude()));
    // |b*_k|^2 >= (delta - mu^2) |b*_{k-1}|^2, cleared of denominators.
    let lovasz = (1..b.len()).all(|k| {
        let lhs = BigInt::from(100) * (&d[k + 1] * &d[k - 1] + &lambda[k][k - 1] * &lambda[k][k - 1]);
        let rhs = BigInt::from(99) * &d[k] * &d[k];
        lhs >= rhs
    });
    size_reduced && lovasz
}

fn property_lll() -> Check {
    let mut rng = iteration_rng(PROPERTY_SEED, 0);
    let mut failures = 0;
    let mut transform_failures = 0;
    for i in 0..100 {
        let m = rng.random_range(2..=10usize);
        let basis = if i % 2 == 0 {
            let c = rng.random_range(1..=8u32);
            let n = BigUint::from(rng.random_range(1u64 << 30..1u64 << 60) | 1);
            build_cvp_instance(m, c, &n, &mut rng).unwrap().basis
        } else {
            (0..m)
                .map(|j| (0..m).map(|r| if r == j { rng.random_range(40..400) } else { rng.random_range(-30..30) }).collect())
                .collect()
        };
        let red = match lll_reduce(&basis, 0.99) {
            Ok(r) => r,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        if !exactly_lll_reduced(&red.vectors) {
            failures += 1;
        }
        for (v, t) in red.vectors.iter().zip(&red.transform) {
            let mut w = vec![0i128; v.len()];
            for (col, &c) in basis.iter().zip(t) {
                for (wi, &x) in w.iter_mut().zip(col) {
                    *wi += c as i128 * x as i128;
                }
            }
            if w.iter().zip(v).any(|(&a, &b)| a != b as i128) {
                transform_failures += 1;
            }
        }
    }
    Check::new(
        "5a",
        failures == 0 && transform_failures == 0,
        format!("LLL size reduction and Lovasz (delta 0.99, exact) on 100 instances m<=10: {failures} violations, {transform_failures} bad transforms"),
    )
}

/// Hamiltonian exactness and brute force against Babai on the same draws.
fn property_hamiltonian() -> (Check, Check) {
    let mut rng = iteration_rng(PROPERTY_SEED, 1);
    let mut worst: f64 = 0.0;
    let mut babai_losses = 0;
    for _ in 0..50 {
        let m = rng.random_range(2..=10usize);
        let c = rng.random_range(1..=5u32);
        let n = BigUint::from(rng.random_range(1u64 << 30..1u64 << 60) | 1);
        let inst = build_iteration(&n, m, c, 0.99, &mut rng).unwrap();
        let t = inst.cvp.target_f64();
        for value in 0..1u64 << m {
            let x = Bitstring::new(value, m as u32).unwrap();
            let v = cube_point(&inst.babai, &inst.reduced, x).unwrap();
            let direct: f64 = t.iter().zip(&v).map(|(a, &b)| (a - b as f64).powi(2)).sum();
            let e = inst.hamiltonian.energy(x).unwrap();
            worst = worst.max((e - direct).abs() / direct.max(1.0));
        }
        let best = brute_force_low_energy(&inst.hamiltonian, 1).unwrap()[0].energy;
        let zero = inst.hamiltonian.energy(Bitstring::zeros(m as u32).unwrap()).unwrap();
        if best > zero {
            babai_losses += 1;
        }
    }
    (
        Check::new(
            "5b",
            worst <= 1e-6,
            format!("Hamiltonian equals |t - v(x)|^2 on all 2^m x of 50 instances: worst relative error {worst:.1e} (tolerance 1e-6)"),
        ),
        Check::new("5c", babai_losses == 0, format!("brute-force minimum <= Babai energy E(0): {babai_losses} of 50 instances violate")),
    )
}

fn property_qaoa() -> Check {
    let mut rng = iteration_rng(PROPERTY_SEED, 2);

    let mut worst_norm: f64 = 0.0;
    for _ in 0..50 {
        let m = rng.random_range(2..=10usize);
        let n = BigUint::from(rng.random_range(1u64 << 30..1u64 << 60) | 1);
        let inst = build_iteration(&n, m, 4, 0.99, &mut rng).unwrap();
        let sim = QaoaSimulator::new(&inst.hamiltonian).unwrap();
        let p = rng.random_range(1..=3usize);
        // Angles scaled to the energy range so the phases wrap many times.
        let gammas: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let betas: Vec<f64> = (0..p).map(|_| rng.random_range(-3.2..3.2)).collect();
        sim.evolve_observed(&gammas, &betas, &mut |_, s| {
            let norm: f64 = s.iter().map(|a| a.norm_sqr()).sum();
            worst_norm = worst_norm.max((norm - 1.0).abs());
        });
    }

    let mut h = IsingHamiltonian::zero(3);
    for j in 0..3 {
        h.linear[j] = rng.random_range(-2.0..2.0);
    }
    h.offset = rng.random_range(-1.0..1.0);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        h.set_coupling(i, j, rng.random_range(-2.0..2.0));
    }
    let sim = QaoaSimulator::new(&h).unwrap();
    let gamma = 0.731;
    let mut worst_phase: f64 = 0.0;
    for (k, a) in sim.phase_diagonal(gamma).iter().enumerate() {
        let e = h.energy(Bitstring::new(k as u64, 3).unwrap()).unwrap();
        let (re, im) = ((-gamma * e).cos(), (-gamma * e).sin());
        worst_phase = worst_phase.max(((a.re - re).powi(2) + (a.im - im).powi(2)).sqrt());
    }

    let mut single = IsingHamiltonian::zero(1);
    single.linear[0] = 1.0;
    let out = qaoa_sample(&single, 2, 1000, 500, &mut rng).unwrap();
    let sim = QaoaSimulator::new(&single).unwrap();
    let state = sim.evolve(&out.gammas, &out.betas);
    let ground = (0..2).min_by(|&a, &b| sim.energies()[a].total_cmp(&sim.energies()[b])).unwrap();
    let p_ground = state[ground].norm_sqr();

    let ok = worst_norm <= 1e-10 && worst_phase <= 1e-12 && p_ground >= 0.9;
    Check::new(
        "5d",
        ok,
        format!(
            "QAOA: norm drift {worst_norm:.1e} (<= 1e-10) over 50 runs; m=3 phase diagonal error {worst_phase:.1e} (<= 1e-12); m=1 ground state probability {p_ground:.4} (>= 0.9)"
        ),
    )
}

fn property_congruence() -> Check {
    let mut config = PipelineConfig::new(big(N40), 1);
    config.dimension_override = Some(11);
    config.max_iterations = 500;
    let mut run = Run::new(config).unwrap();
    while !run.is_done() {
        run.step(&sqif_core::ising::Sequential).unwrap();
    }
    let n = big(N40);
    let base = run.factor_base().clone();
    let pairs = run.state().ledger.pairs();
    let bad_pairs = pairs.iter().filter(|p| !p.congruence_holds(&n, &base)).count();
    let a = build_exponent_matrix(pairs, &base).unwrap();
    let kernel = null_space_mod2(&a.to_gf2());
    let mut bad_squares = 0;
    for z in &kernel.vectors {
        match congruence_for(&a, z, &n) {
            Ok(sq) if (&sq.x * &sq.x) % &n == (&sq.y * &sq.y) % &n => {}
            _ => bad_squares += 1,
        }
    }
    Check::new(
        "5e",
        bad_pairs == 0 && bad_squares == 0 && !pairs.is_empty() && !kernel.vectors.is_empty(),
        format!(
            "{} accepted pairs satisfy u = sign * prod p^b mod N ({bad_pairs} violate); {} kernel vectors give X^2 = Y^2 mod N ({bad_squares} violate)",
            pairs.len(),
            kernel.vectors.len()
        ),
    )
}

fn property_gf2() -> Check {
    let mut rng = iteration_rng(PROPERTY_SEED, 3);
    let mut mismatches = 0;
    for _ in 0..300 {
        let rows = rng.random_range(1..=10usize);
        let cols = rng.random_range(1..=8usize);
        let density = rng.random_range(0.1..0.7);
        let bits: Vec<Vec<bool>> = (0..rows).map(|_| (0..cols).map(|_| rng.random_bool(density)).collect()).collect();
        let a = Gf2Matrix::from_fn(rows, cols, |r, c| bits[r][c]);

        let brute: BTreeSet<u64> = (0..1u64 << cols)
            .filter(|&z| bits.iter().all(|row| row.iter().enumerate().filter(|&(c, &b)| b && z >> c & 1 == 1).count() % 2 == 0))
            .collect();

        let basis: Vec<u64> = null_space_mod2(&a)
            .vectors
            .iter()
            .map(|v| v.ones().fold(0u64, |acc, c| acc | 1 << c))
            .collect();
        let span: BTreeSet<u64> = (0..1u64 << basis.len())
            .map(|pick| basis.iter().enumerate().filter(|&(i, _)| pick >> i & 1 == 1).fold(0, |acc, (_, &v)| acc ^ v))
            .collect();
        if span != brute {
            mismatches += 1;
        }
    }
    Check::new("5f", mismatches == 0, format!("GF(2) kernel span equals the brute-force kernel on 300 matrices with <= 8 columns: {mismatches} mismatches"))
}

fn micro_oracle() -> Check {
    let n = BigUint::from(77u32);
    let base = FactorBase::primes_up_to(7).unwrap();
    let factors = test_sr_pair(&BigUint::from(81u32), &BigUint::from(1u32), &n, &base)
        .ok()
        .flatten()
        .and_then(|pair| build_exponent_matrix(&[pair], &base).ok())
        .and_then(|a| extract_factors(&a, &null_space_mod2(&a.to_gf2()), &n, 0).ok())
        .unwrap_or_default();
    let expected: BTreeSet<BigUint> = [7u32, 11].into_iter().map(BigUint::from).collect();
    let shown: Vec<String> = factors.iter().map(ToString::to_string).collect();
    Check::new("5g", factors == expected, format!("N = 77 with the pair (81, 1) factors as {{{}}}", shown.join(", ")))
}

fn determinism() -> Check {
    let args = ["--n", N40, "--method", "brute-force", "--dimension", "11", "--seed", "7", "--max-iterations", "25"];
    let mut with_workers = args.to_vec();
    with_workers.extend_from_slice(&["--workers", "3"]);
    let runs: Vec<String> = [&args[..], &args[..], &with_workers[..]]
        .iter()
        .map(|a| {
            let mut argv = vec!["factor"];
            argv.extend_from_slice(a);
            without_wall_time(&sqif(&argv).stdout)
        })
        .collect();
    let ok = runs[0] == runs[1] && runs[0] == runs[2];
    Check::new("6", ok, format!("identical config and seed give byte-identical reports apart from wall time ({} bytes, also across 3 workers)", runs[0].len()))
}

fn main() -> ExitCode {
    let full = std::env::args().any(|a| a == "--full");
    let qaoa = thread::spawn(qaoa_end_to_end);

    let mut checks = vec![
        reproduction("1", N40, Some("11"), 500, "success at 40 iterations with 247 pairs"),
        reproduction("2a", N48, Some("12"), 1000, "success at 118 iterations with 291 pairs"),
    ];
    checks.push(dimension_formula());
    if full {
        checks.push(full_table());
    } else {
        checks.push(Check::skipped("4", "63-80-bit rows need hours of brute force; run with -- --full"));
    }
    checks.push(property_lll());
    let (b, c) = property_hamiltonian();
    checks.extend([b, c]);
    checks.push(property_qaoa());
    checks.push(property_congruence());
    checks.push(property_gf2());
    checks.push(micro_oracle());
    checks.push(determinism());
    checks.insert(2, qaoa.join().expect("QAOA check thread"));

    for check in &checks {
        check.print();
    }

    if full {
        // Without the override the dimension formula gives m = 7 and 8, far
        // from the published 11 and 12 qubits, and these runs are expected
        // to fail. Reported, not counted.
        for check in [
            reproduction("1*", N40, None, 500, "success at 40 iterations"),
            reproduction("2*", N48, None, 1000, "success at 118 iterations"),
        ] {
            check.print();
        }
    }

    let failed = checks.iter().filter(|c| c.passed == Some(false)).count();
    println!("acceptance: {} passed, {failed} failed, {} skipped", checks.iter().filter(|c| c.passed == Some(true)).count(), checks.iter().filter(|c| c.passed.is_none()).count());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
