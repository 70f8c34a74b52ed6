//! Argument parsing and the `factor` / `reproduce-table` commands.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};
use sqif_core::pipeline::{FactorBaseRule, Method, Outcome, PipelineConfig, Run, RunReport};
use sqif_core::BigUint;

use crate::document::ReportDocument;
use crate::executor::executor_for;
use crate::table::{render_table, reproduce_table, Tier};
use crate::CliError;

/// Seed used when none is given, so bare invocations replay.
pub const DEFAULT_SEED: u64 = 0;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sqif", version, about = "Lattice + Ising factoring experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor one number and emit a report document.
    Factor(FactorArgs),
    /// Rerun the rows of the results table and compare.
    ReproduceTable(TableArgs),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "random" {
            return Ok(SeedArg::Random);
        }
        s.parse()
            .map(SeedArg::Fixed)
            .map_err(|_| format!("seed must be an unsigned integer or \"random\", got {s:?}"))
    }
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        match self {
            SeedArg::Fixed(s) => *s,
            SeedArg::Random => rand::random(),
        }
    }
}

fn parse_decimal(s: &str) -> Result<BigUint, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn opt_text<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
where
    T: FromStr,
    T::Err: Display,
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Text(String),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Int(i)) => i.to_string().parse().map(Some).map_err(serde::de::Error::custom),
        Some(Raw::Text(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

/// Pipeline knobs shared by flags and config files. Unset values fall back
/// to the config file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PipelineArgs {
    /// Number to factor.
    #[arg(long, value_parser = parse_decimal)]
    #[serde(default, deserialize_with = "opt_text")]
    pub n: Option<BigUint>,
    #[arg(long)]
    pub lattice_parameter: Option<u32>,
    /// Decimal digits kept in the scaled logarithms.
    #[arg(long)]
    pub precision: Option<u32>,
    /// B2; defaults to 2 m^2.
    #[arg(long)]
    pub smoothness_bound: Option<u64>,
    #[arg(long)]
    pub slack: Option<usize>,
    /// brute-force or qaoa.
    #[arg(long)]
    #[serde(default, deserialize_with = "opt_text")]
    pub method: Option<Method>,
    #[arg(long)]
    pub qaoa_depth: Option<usize>,
    /// Lowest-energy states kept per iteration (brute force).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Measurements per iteration (QAOA).
    #[arg(long)]
    pub shots: Option<u64>,
    /// Expectation evaluations per QAOA optimisation.
    #[arg(long)]
    pub opt_budget: Option<usize>,
    #[arg(long)]
    pub lll_delta: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<u64>,
    /// Lattice dimension m, overriding the value derived from N.
    #[arg(long)]
    pub dimension: Option<usize>,
    /// Unsigned integer or "random".
    #[arg(long)]
    #[serde(default, deserialize_with = "opt_text")]
    pub seed: Option<SeedArg>,
    #[arg(long)]
    pub brute_force_cap: Option<usize>,
    /// Pairwise kernel combinations tried after the basis.
    #[arg(long)]
    pub combination_budget: Option<usize>,
    /// first-primes or primes-up-to.
    #[arg(long)]
    #[serde(default, deserialize_with = "opt_text")]
    pub factor_base: Option<FactorBaseRule>,
    /// Threads for brute-force enumeration; 1 runs on the calling thread.
    #[arg(long)]
    pub workers: Option<usize>,
}

macro_rules! prefer {
    ($a:ident, $b:ident; $($f:ident),*) => {
        PipelineArgs { $($f: $a.$f.or($b.$f)),* }
    };
}

impl PipelineArgs {
    /// Field-wise `self` if set, else `fallback`.
    pub fn or(self, fallback: Self) -> Self {
        prefer!(self, fallback; n, lattice_parameter, precision, smoothness_bound, slack, method, qaoa_depth,
            samples, shots, opt_budget, lll_delta, max_iterations, dimension, seed, brute_force_cap,
            combination_budget, factor_base, workers)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => toml::from_str(&text).map_err(|e| e.to_string()),
        };
        parsed.map_err(|message| CliError::Parse {
            path: path.into(),
            message,
        })
    }

    /// Overwrites every field of `c` that is set here.
    pub fn apply(&self, c: &mut PipelineConfig) {
        if let Some(n) = &self.n {
            c.n = n.clone();
        }
        if let Some(seed) = &self.seed {
            c.seed = seed.resolve();
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { c.$g = v; })* };
        }
        set!(lattice_parameter => lattice_parameter, precision => precision, slack => slack, method => method,
            qaoa_depth => qaoa_depth, opt_budget => opt_budget, lll_delta => lll_delta,
            max_iterations => max_iterations, brute_force_cap => brute_force_cap,
            combination_budget => combination_budget, factor_base => factor_base);
        if self.smoothness_bound.is_some() {
            c.smoothness_bound = self.smoothness_bound;
        }
        if self.samples.is_some() {
            c.samples = self.samples;
        }
        if self.shots.is_some() {
            c.shots = self.shots;
        }
        if self.dimension.is_some() {
            c.dimension_override = self.dimension;
        }
    }

    pub fn to_config(&self) -> Result<PipelineConfig, CliError> {
        let n = self.n.clone().ok_or_else(|| CliError::Usage("--n is required".into()))?;
        let mut c = PipelineConfig::new(n, DEFAULT_SEED);
        self.apply(&mut c);
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// TOML or JSON file with default values for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the document here (checkpointed after every iteration)
    /// instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Continue from a checkpoint document.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Print one line per iteration on standard error.
    #[arg(long)]
    pub progress: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum, default_value_t = TierArg::Quick)]
    pub tier: TierArg,
    #[arg(long, default_value = "table-results")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Iteration cap per row.
    #[arg(long)]
    pub max_iterations: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Quick,
    Full,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Self {
        match t {
            TierArg::Quick => Tier::Quick,
            TierArg::Full => Tier::Full,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit status.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_SUCCESS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Factor(args) => factor_command(&args, out, err),
        Command::ReproduceTable(args) => table_command(&args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::Core(sqif_core::Error::Precondition { factor: Some(f), .. }) = &e {
                let _ = writeln!(err, "trivial factor: {f}");
            }
            EXIT_ERROR
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::io("<stream>", e)
}

fn factor_command(args: &FactorArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let file = match &args.config {
        Some(path) => PipelineArgs::load(path)?,
        None => PipelineArgs::default(),
    };
    let settings = args.pipeline.clone().or(file);
    let exec = executor_for(settings.workers)?;

    let mut run = match &args.resume {
        None => Run::new(settings.to_config()?)?,
        Some(path) => {
            let doc = ReportDocument::load(path)?;
            let saved = doc.pipeline_config();
            let mut config = saved.clone();
            settings.apply(&mut config);
            let comparable = PipelineConfig {
                max_iterations: saved.max_iterations,
                ..config.clone()
            };
            if comparable != saved {
                return Err(CliError::Usage(
                    "only --max-iterations may differ from the checkpoint's configuration".into(),
                ));
            }
            let required = config.resolve()?.required;
            Run::resume(config, doc.run_state(required)?)?
        }
    };

    let start = Instant::now();
    while !run.is_done() {
        let trace = run.step(exec.as_ref())?.clone();
        if args.progress {
            writeln!(
                err,
                "iteration {:>5}  new {:>4}  total {:>5}/{}",
                trace.iteration,
                trace.new_pairs,
                trace.cumulative_pairs,
                run.params().required
            )
            .map_err(io_err)?;
        }
        if let Some(path) = &args.out {
            ReportDocument::new(run.config(), None, run.state()).save(path)?;
        }
    }
    let report = RunReport {
        wall_time_secs: start.elapsed().as_secs_f64(),
        ..run.finish()?
    };
    let doc = ReportDocument::new(run.config(), Some(&report), run.state());
    match &args.out {
        Some(path) => {
            doc.save(path)?;
            writeln!(err, "{}", summary_line(&report)).map_err(io_err)?;
        }
        None => out.write_all(doc.to_json().as_bytes()).map_err(io_err)?,
    }
    Ok(match report.outcome {
        Outcome::Success => EXIT_SUCCESS,
        Outcome::Fail => EXIT_FAIL,
    })
}

pub fn summary_line(r: &RunReport) -> String {
    let factors: Vec<String> = r.factors.iter().map(ToString::to_string).collect();
    format!(
        "{} after {} iterations: {}/{} pairs, m = {}, factors [{}]",
        r.outcome,
        r.iterations,
        r.sr_pairs,
        r.required,
        r.m,
        factors.join(", ")
    )
}

fn table_command(args: &TableArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let exec = executor_for(args.workers)?;
    let doc = reproduce_table(args.tier.into(), args.seed, args.max_iterations, &args.out_dir, exec.as_ref(), err)?;
    out.write_all(render_table(&doc).as_bytes()).map_err(io_err)?;
    Ok(EXIT_SUCCESS)
}
