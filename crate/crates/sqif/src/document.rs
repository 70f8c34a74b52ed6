//! JSON report documents.
//!
//! Big integers are decimal strings. A document with `report: null` is a
//! checkpoint that [`ReportDocument::run_state`] turns back into a resumable
//! [`RunState`].

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sqif_core::numtheory::Sign;
use sqif_core::pipeline::{
    FactorBaseRule, IterationTrace, Method, Outcome, PipelineConfig, RunReport, RunState,
};
use sqif_core::relations::{PairLedger, SrPair};
use sqif_core::BigUint;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Serializes through `Display` and parses through `FromStr`.
mod text {
    use super::*;

    pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A non-negative integer written as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Decimal(#[serde(with = "text")] pub BigUint);

impl From<BigUint> for Decimal {
    fn from(v: BigUint) -> Self {
        Decimal(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    pub spins: String,
    pub bit_order: String,
    pub energy: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            spins: "x = (1 - s) / 2".into(),
            bit_order: "variable 0 is the most significant bit".into(),
            energy: "squared euclidean distance to the target, unscaled".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigRecord {
    pub n: Decimal,
    pub lattice_parameter: u32,
    pub precision: u32,
    pub smoothness_bound: Option<u64>,
    pub slack: usize,
    #[serde(with = "text")]
    pub method: Method,
    pub samples: Option<u64>,
    pub shots: Option<u64>,
    pub qaoa_depth: usize,
    pub opt_budget: usize,
    pub lll_delta: f64,
    pub max_iterations: u64,
    pub dimension: Option<usize>,
    pub seed: u64,
    pub brute_force_cap: usize,
    pub combination_budget: usize,
    #[serde(with = "text")]
    pub factor_base: FactorBaseRule,
}

impl From<&PipelineConfig> for ConfigRecord {
    fn from(c: &PipelineConfig) -> Self {
        Self {
            n: c.n.clone().into(),
            lattice_parameter: c.lattice_parameter,
            precision: c.precision,
            smoothness_bound: c.smoothness_bound,
            slack: c.slack,
            method: c.method,
            samples: c.samples,
            shots: c.shots,
            qaoa_depth: c.qaoa_depth,
            opt_budget: c.opt_budget,
            lll_delta: c.lll_delta,
            max_iterations: c.max_iterations,
            dimension: c.dimension_override,
            seed: c.seed,
            brute_force_cap: c.brute_force_cap,
            combination_budget: c.combination_budget,
            factor_base: c.factor_base,
        }
    }
}

impl From<&ConfigRecord> for PipelineConfig {
    fn from(r: &ConfigRecord) -> Self {
        Self {
            n: r.n.0.clone(),
            lattice_parameter: r.lattice_parameter,
            precision: r.precision,
            smoothness_bound: r.smoothness_bound,
            slack: r.slack,
            method: r.method,
            samples: r.samples,
            shots: r.shots,
            qaoa_depth: r.qaoa_depth,
            opt_budget: r.opt_budget,
            lll_delta: r.lll_delta,
            max_iterations: r.max_iterations,
            dimension_override: r.dimension,
            seed: r.seed,
            brute_force_cap: r.brute_force_cap,
            combination_budget: r.combination_budget,
            factor_base: r.factor_base,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub n: Decimal,
    pub bits: u64,
    pub m: usize,
    #[serde(with = "text")]
    pub method: Method,
    pub smoothness_bound: u64,
    pub factor_base_size: usize,
    pub iterations: u64,
    pub sr_pairs: usize,
    pub required: usize,
    pub kernel_dimension: usize,
    #[serde(with = "text")]
    pub outcome: Outcome,
    pub factors: Vec<Decimal>,
    pub wall_time_secs: f64,
    pub seed: u64,
    pub pairs_per_iteration: Vec<usize>,
}

impl From<&RunReport> for ReportRecord {
    fn from(r: &RunReport) -> Self {
        Self {
            n: r.n.clone().into(),
            bits: r.bits,
            m: r.m,
            method: r.method,
            smoothness_bound: r.smoothness_bound,
            factor_base_size: r.factor_base_size,
            iterations: r.iterations,
            sr_pairs: r.sr_pairs,
            required: r.required,
            kernel_dimension: r.kernel_dimension,
            outcome: r.outcome,
            factors: r.factors.iter().cloned().map(Decimal).collect(),
            wall_time_secs: r.wall_time_secs,
            seed: r.seed,
            pairs_per_iteration: r.pairs_per_iteration.clone(),
        }
    }
}

impl From<&ReportRecord> for RunReport {
    fn from(r: &ReportRecord) -> Self {
        Self {
            n: r.n.0.clone(),
            bits: r.bits,
            m: r.m,
            method: r.method,
            smoothness_bound: r.smoothness_bound,
            factor_base_size: r.factor_base_size,
            iterations: r.iterations,
            sr_pairs: r.sr_pairs,
            required: r.required,
            kernel_dimension: r.kernel_dimension,
            outcome: r.outcome,
            factors: r.factors.iter().map(|d| d.0.clone()).collect(),
            wall_time_secs: r.wall_time_secs,
            seed: r.seed,
            pairs_per_iteration: r.pairs_per_iteration.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub iteration: u64,
    pub babai_distance: f64,
    pub states: usize,
    pub min_energy: Option<f64>,
    pub new_pairs: usize,
    pub cumulative_pairs: usize,
}

impl From<&IterationTrace> for TraceRecord {
    fn from(t: &IterationTrace) -> Self {
        Self {
            iteration: t.iteration,
            babai_distance: t.babai_distance,
            states: t.states,
            min_energy: t.min_energy,
            new_pairs: t.new_pairs,
            cumulative_pairs: t.cumulative_pairs,
        }
    }
}

impl From<&TraceRecord> for IterationTrace {
    fn from(t: &TraceRecord) -> Self {
        Self {
            iteration: t.iteration,
            babai_distance: t.babai_distance,
            states: t.states,
            min_energy: t.min_energy,
            new_pairs: t.new_pairs,
            cumulative_pairs: t.cumulative_pairs,
        }
    }
}

/// One relation; `sign` is the sign of `u - vN`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    pub u: Decimal,
    pub v: Decimal,
    pub sign: i8,
    pub u_exponents: Vec<u32>,
    pub residual_exponents: Vec<u32>,
}

impl From<&SrPair> for PairRecord {
    fn from(p: &SrPair) -> Self {
        Self {
            u: p.u.clone().into(),
            v: p.v.clone().into(),
            sign: p.residual_sign.as_i8(),
            u_exponents: p.u_exponents.clone(),
            residual_exponents: p.residual_exponents.clone(),
        }
    }
}

impl TryFrom<&PairRecord> for SrPair {
    type Error = CliError;

    fn try_from(p: &PairRecord) -> Result<Self, CliError> {
        let residual_sign = match p.sign {
            1 => Sign::Positive,
            -1 => Sign::Negative,
            s => return Err(CliError::Usage(format!("pair sign must be 1 or -1, got {s}"))),
        };
        Ok(SrPair {
            u: p.u.0.clone(),
            v: p.v.0.clone(),
            residual_sign,
            u_exponents: p.u_exponents.clone(),
            residual_exponents: p.residual_exponents.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub conventions: Conventions,
    pub config: ConfigRecord,
    /// `None` while the run is still in progress.
    pub report: Option<ReportRecord>,
    pub traces: Vec<TraceRecord>,
    pub sr_pairs: Vec<PairRecord>,
}

impl ReportDocument {
    pub fn new(config: &PipelineConfig, report: Option<&RunReport>, state: &RunState) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            conventions: Conventions::default(),
            config: config.into(),
            report: report.map(Into::into),
            traces: state.traces.iter().map(Into::into).collect(),
            sr_pairs: state.ledger.pairs().iter().map(Into::into).collect(),
        }
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        (&self.config).into()
    }

    pub fn run_report(&self) -> Option<RunReport> {
        self.report.as_ref().map(Into::into)
    }

    /// Rebuilds the ledger and traces; `required` comes from the resolved
    /// configuration.
    pub fn run_state(&self, required: usize) -> Result<RunState, CliError> {
        let mut ledger = PairLedger::new(required);
        for p in &self.sr_pairs {
            if !ledger.insert(SrPair::try_from(p)?) {
                return Err(CliError::Usage(format!("duplicate pair ({}, {}) in document", p.u.0, p.v.0)));
            }
        }
        let traces: Vec<IterationTrace> = self.traces.iter().map(Into::into).collect();
        Ok(RunState {
            ledger,
            next_iteration: traces.len() as u64,
            traces,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let doc = Self::from_json(&text).map_err(|e| CliError::Parse {
            path: path.into(),
            message: e.to_string(),
        })?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse {
                path: path.into(),
                message: format!("schema version {} is not {SCHEMA_VERSION}", doc.schema_version),
            });
        }
        Ok(doc)
    }

    /// Writes through a sibling temporary file so readers never see a
    /// partial document.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        fs::write(&tmp, self.to_json()).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
    }
}
