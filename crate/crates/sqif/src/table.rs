//! Reruns the published results table with the table's own qubit counts.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sqif_core::ising::ChunkExecutor;
use sqif_core::pipeline::{Method, Outcome, PipelineConfig, Run, RunReport};
use sqif_core::BigUint;

use crate::document::{Decimal, ReportDocument, SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublishedRow {
    pub bits: u32,
    pub n: &'static str,
    pub lattice_parameter: u32,
    pub qubits: usize,
    pub sr_pairs: usize,
    pub method: Method,
    pub outcome: Outcome,
    pub iterations: Option<u64>,
}

const fn row(
    bits: u32,
    n: &'static str,
    lattice_parameter: u32,
    qubits: usize,
    sr_pairs: usize,
    method: Method,
    outcome: Outcome,
    iterations: Option<u64>,
) -> PublishedRow {
    PublishedRow {
        bits,
        n,
        lattice_parameter,
        qubits,
        sr_pairs,
        method,
        outcome,
        iterations,
    }
}

use Method::{BruteForce as BF, Qaoa as QA};
use Outcome::{Fail, Success};

pub const PUBLISHED: [PublishedRow; 16] = [
    row(40, "624911573291", 1, 11, 247, QA, Success, Some(40)),
    row(40, "624911573291", 1, 11, 247, BF, Success, Some(40)),
    row(48, "261980999226229", 1, 12, 291, QA, Success, Some(127)),
    row(48, "261980999226229", 1, 12, 291, BF, Success, Some(118)),
    row(63, "2393864445846808531", 1, 15, 165, QA, Fail, None),
    row(63, "2393864445846808531", 1, 15, 452, BF, Success, Some(359)),
    row(70, "700821480830487125167", 1, 17, 45, BF, Fail, None),
    row(70, "700821480830487125167", 2, 23, 479, QA, Fail, None),
    row(70, "700821480830487125167", 2, 23, 1064, BF, Success, Some(242)),
    row(80, "675789769078847752141081", 2, 26, 1295, BF, Fail, None),
    row(90, "928497021444492107802357067", 1, 15, 1, BF, Fail, None),
    row(90, "928497021444492107802357067", 2, 30, 446, BF, Fail, None),
    row(100, "729097431295829382764936159407", 1, 14, 0, BF, Fail, None),
    row(100, "729097431295829382764936159407", 2, 28, 33, BF, Fail, None),
    row(120, "925141703449007503130714828237701463", 1, 17, 0, BF, Fail, None),
    row(128, "275538060341916784483102145290705042411", 1, 18, 0, BF, Fail, None),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    /// 40- and 48-bit rows.
    Quick,
    /// Everything up to 80 bits.
    Full,
}

impl Tier {
    pub fn max_bits(self) -> u32 {
        match self {
            Tier::Quick => 48,
            Tier::Full => 80,
        }
    }

    pub fn rows(self) -> impl Iterator<Item = &'static PublishedRow> {
        PUBLISHED.iter().filter(move |r| r.bits <= self.max_bits())
    }
}

/// One published row next to our rerun of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowResult {
    pub bits: u32,
    pub n: Decimal,
    pub lattice_parameter: u32,
    pub method: String,
    pub m: usize,
    pub published_pairs: usize,
    pub published_outcome: String,
    pub published_iterations: Option<u64>,
    pub pairs: Option<usize>,
    pub required: Option<usize>,
    pub outcome: Option<String>,
    pub iterations: Option<u64>,
    pub factors: Vec<Decimal>,
    pub wall_time_secs: f64,
    /// Why the row did not run, e.g. a size cap.
    pub error: Option<String>,
    pub report_file: Option<String>,
}

impl RowResult {
    pub fn agrees(&self) -> Option<bool> {
        self.outcome.as_ref().map(|o| *o == self.published_outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub schema_version: u32,
    pub tier: Tier,
    pub seed: u64,
    pub rows: Vec<RowResult>,
}

fn row_config(r: &PublishedRow, seed: u64, max_iterations: Option<u64>) -> PipelineConfig {
    let n: BigUint = r.n.parse().expect("table entries are decimal");
    let mut c = PipelineConfig::new(n, seed);
    c.lattice_parameter = r.lattice_parameter;
    c.dimension_override = Some(r.qubits);
    c.method = r.method;
    if let Some(cap) = max_iterations {
        c.max_iterations = cap;
    }
    c
}

fn run_row(config: PipelineConfig, exec: &dyn ChunkExecutor) -> Result<(RunReport, ReportDocument), CliError> {
    let start = Instant::now();
    let mut run = Run::new(config)?;
    while !run.is_done() {
        run.step(exec)?;
    }
    let report = RunReport {
        wall_time_secs: start.elapsed().as_secs_f64(),
        ..run.finish()?
    };
    let doc = ReportDocument::new(run.config(), Some(&report), run.state());
    Ok((report, doc))
}

/// Runs every row of `tier`, writing one report per row plus `table.json`
/// into `out_dir`. Rows that cannot run are recorded, not fatal.
pub fn reproduce_table(
    tier: Tier,
    seed: u64,
    max_iterations: Option<u64>,
    out_dir: &Path,
    exec: &dyn ChunkExecutor,
    log: &mut dyn Write,
) -> Result<TableDocument, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut rows = Vec::new();
    for r in tier.rows() {
        let config = row_config(r, seed, max_iterations);
        let mut result = RowResult {
            bits: r.bits,
            n: Decimal(config.n.clone()),
            lattice_parameter: r.lattice_parameter,
            method: r.method.to_string(),
            m: r.qubits,
            published_pairs: r.sr_pairs,
            published_outcome: r.outcome.to_string(),
            published_iterations: r.iterations,
            pairs: None,
            required: None,
            outcome: None,
            iterations: None,
            factors: Vec::new(),
            wall_time_secs: 0.0,
            error: None,
            report_file: None,
        };
        let _ = writeln!(log, "running {}-bit l={} {} (m = {})", r.bits, r.lattice_parameter, r.method, r.qubits);
        match run_row(config, exec) {
            Ok((report, doc)) => {
                let name = format!("row-{}-l{}-{}.json", r.bits, r.lattice_parameter, r.method);
                doc.save(&out_dir.join(&name))?;
                result.pairs = Some(report.sr_pairs);
                result.required = Some(report.required);
                result.outcome = Some(report.outcome.to_string());
                result.iterations = Some(report.iterations);
                result.factors = report.factors.into_iter().map(Decimal).collect();
                result.wall_time_secs = report.wall_time_secs;
                result.report_file = Some(name);
            }
            Err(CliError::Core(e)) => result.error = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        rows.push(result);
    }
    let doc = TableDocument {
        schema_version: SCHEMA_VERSION,
        tier,
        seed,
        rows,
    };
    let path = out_dir.join("table.json");
    let json = serde_json::to_string_pretty(&doc).expect("table documents always serialize") + "\n";
    fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
    let path = out_dir.join("table.txt");
    fs::write(&path, render_table(&doc)).map_err(|e| CliError::io(&path, e))?;
    Ok(doc)
}

/// Aligned text, one line per row.
pub fn render_table(doc: &TableDocument) -> String {
    let header = [
        "bits", "N", "l", "m", "method", "pairs", "required", "outcome", "iters", "published", "agrees",
    ];
    let cells: Vec<[String; 11]> = doc
        .rows
        .iter()
        .map(|r| {
            let published = format!(
                "{} pairs, {}{}",
                r.published_pairs,
                r.published_outcome,
                r.published_iterations.map(|i| format!(" @ {i}")).unwrap_or_default()
            );
            let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
            [
                r.bits.to_string(),
                r.n.0.to_string(),
                r.lattice_parameter.to_string(),
                r.m.to_string(),
                r.method.clone(),
                opt(r.pairs.map(|p| p.to_string())),
                opt(r.required.map(|p| p.to_string())),
                r.outcome.clone().or_else(|| r.error.as_ref().map(|_| "not run".into())).unwrap_or_default(),
                opt(r.iterations.map(|p| p.to_string())),
                published,
                opt(r.agrees().map(|a| if a { "yes" } else { "no" }.into())),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |fields: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = fields.zip(&widths).map(|(f, w)| format!("{f:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut header.iter().copied());
    for row in &cells {
        line(&mut row.iter().map(String::as_str));
    }
    for r in doc.rows.iter().filter(|r| r.error.is_some()) {
        let _ = writeln!(
            out,
            "{}-bit l={} {}: {}",
            r.bits,
            r.lattice_parameter,
            r.method,
            r.error.as_deref().unwrap_or_default()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sqif_core::lattice::lattice_dimension;

    #[test]
    fn tiers() {
        assert_eq!(Tier::Quick.rows().count(), 4);
        assert_eq!(Tier::Full.rows().count(), 10);
    }

    #[test]
    fn published_numbers_match_their_bit_lengths() {
        for r in &PUBLISHED {
            let n: BigUint = r.n.parse().unwrap();
            // The row labelled 63 bits carries a 62-bit number.
            let expected = if r.bits == 63 { 62 } else { r.bits };
            assert_eq!(n.bits() as u32, expected, "{}", r.n);
        }
    }

    #[test]
    fn large_rows_follow_the_dimension_formula() {
        for r in PUBLISHED.iter().filter(|r| r.bits >= 80) {
            let n: BigUint = r.n.parse().unwrap();
            assert_eq!(lattice_dimension(&n, r.lattice_parameter).unwrap(), r.qubits, "{}", r.n);
        }
    }
}
