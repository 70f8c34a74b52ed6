mod common;

use common::{read_json, sqif, without_wall_time};
use sqif::document::ReportDocument;
use sqif_core::pipeline::Outcome;

const N40: &str = "624911573291";

#[test]
fn prime_input_exits_2() {
    let out = sqif(&["factor", "--n", "97"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("N is prime"), "{}", out.stderr);
}

#[test]
fn small_factor_is_reported() {
    let out = sqif(&["factor", "--n", "91"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("trivial factor: 7"), "{}", out.stderr);
    let out = sqif(&["factor", "--n", "21"]);
    assert!(out.stderr.contains("trivial factor: 3"), "{}", out.stderr);
}

#[test]
fn malformed_flags_exit_2() {
    for args in [
        &["factor", "--n", "12x"][..],
        &["factor"],
        &["factor", "--n", N40, "--method", "annealing"],
        &["factor", "--n", N40, "--lll-delta", "1.5"],
        &["factor", "--n", N40, "--dimension", "40"],
        &["factor", "--n", N40, "--no-such-flag"],
        &["frobnicate"],
    ] {
        let out = sqif(args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn help_exits_0() {
    let out = sqif(&["factor", "--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("--lattice-parameter"));
}

#[test]
fn success_and_fail_exit_codes() {
    let ok = sqif(&["factor", "--n", N40, "--dimension", "11", "--seed", "1"]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    let doc = ReportDocument::from_json(&ok.stdout).unwrap();
    let report = doc.run_report().unwrap();
    assert_eq!(report.outcome, Outcome::Success);
    assert!(report.factors.iter().all(|f| (&report.n % f) == 0u32.into()));

    let fail = sqif(&["factor", "--n", N40, "--dimension", "11", "--seed", "1", "--max-iterations", "3"]);
    assert_eq!(fail.code, 1);
    let doc = ReportDocument::from_json(&fail.stdout).unwrap();
    assert_eq!(doc.run_report().unwrap().outcome, Outcome::Fail);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["factor", "--n", N40, "--dimension", "10", "--seed", "5", "--max-iterations", "20"];
    let a = sqif(&args);
    let b = sqif(&args);
    let c = sqif(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(without_wall_time(&a.stdout), without_wall_time(&b.stdout));
    assert_eq!(without_wall_time(&a.stdout), without_wall_time(&c.stdout));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("n = \"{N40}\"\ndimension = 9\nseed = 4\nmax-iterations = 2\n")).unwrap();
    let out = sqif(&["factor", "--config", cfg.to_str().unwrap(), "--max-iterations", "3"]);
    let doc = ReportDocument::from_json(&out.stdout).unwrap();
    assert_eq!(doc.config.dimension, Some(9));
    assert_eq!(doc.config.seed, 4);
    assert_eq!(doc.config.max_iterations, 3);

    std::fs::write(&cfg, "n = \"77\"\nwhatever = 1\n").unwrap();
    assert_eq!(sqif(&["factor", "--config", cfg.to_str().unwrap()]).code, 2);
}

#[test]
fn interrupted_run_resumes_to_the_same_document() {
    let dir = tempfile::tempdir().unwrap();
    let whole = dir.path().join("whole.json");
    let part = dir.path().join("part.json");
    let (w, p) = (whole.to_str().unwrap(), part.to_str().unwrap());
    let base = ["factor", "--n", N40, "--dimension", "11", "--seed", "2"];

    assert_eq!(sqif(&[&base[..], &["--out", w]].concat()).code, 0);

    assert_eq!(sqif(&[&base[..], &["--out", p, "--max-iterations", "7"]].concat()).code, 1);
    let checkpoint = read_json(&part);
    assert_eq!(checkpoint["traces"].as_array().unwrap().len(), 7);
    let out = sqif(&["factor", "--resume", p, "--max-iterations", "1000", "--out", p]);
    assert_eq!(out.code, 0, "{}", out.stderr);

    let a = std::fs::read_to_string(&whole).unwrap();
    let b = std::fs::read_to_string(&part).unwrap();
    assert_eq!(without_wall_time(&a), without_wall_time(&b));

    let clash = sqif(&["factor", "--resume", p, "--seed", "3"]);
    assert_eq!(clash.code, 2);
}
