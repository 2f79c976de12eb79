//! Command-line front end: argument parsing, pair input, result documents
//! and JSON/CSV rendering.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::lyapunov::{chi_irrational_exact, chi_rational, jsr_bounds, trace_argmax, TraceTable};
use crate::mat2::parse_rational;
use crate::optimizer::{self, geometric_grid, hunt_bracket, maximize_slope, plateaus, sweep_family, SweepRecord};
use crate::pairs::{balanced_pair_checks, classification_report, classify, normal_form_conjugator, MatrixPair};
use crate::verify::{run_suite, Suite, VerifyConfig};
use crate::words::SlopeFraction;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
            CliError::Csv(_) => "csv",
            CliError::Core(_) => "computation",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "balpair", version, about = "Maximizing Sturmian measures for balanced pairs of 2x2 matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: number of processors).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Include wall-clock timings in the result document.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Args, Clone, PartialEq, Eq)]
pub struct PairSource {
    /// Pair as a JSON file path, `-` for standard input, or inline JSON.
    #[arg(long)]
    pub pair: String,
}

#[derive(Debug, Subcommand, Clone, PartialEq)]
pub enum Command {
    /// Classify a pair and report fixed points, cones and a normal form.
    Classify(PairSource),
    /// Exact traces over words of length n with l ones.
    TraceMax {
        #[command(flatten)]
        source: PairSource,
        #[arg(short)]
        l: usize,
        #[arg(short)]
        n: usize,
    },
    /// Lyapunov exponent at a rational slope, or at a real slope through
    /// convergents.
    Chi {
        #[command(flatten)]
        source: PairSource,
        #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
        slope: Option<SlopeFraction>,
        /// Real slope in [0, 1] as a decimal or fraction string.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1000)]
        max_den: u64,
    },
    /// Joint spectral radius bounds from words up to the given depth.
    Jsr {
        #[command(flatten)]
        source: PairSource,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// The maximizing Sturmian slope.
    Slope {
        #[command(flatten)]
        source: PairSource,
        #[arg(long, default_value_t = optimizer::DEFAULT_MAX_DEN)]
        max_den: u64,
    },
    /// Maximizing slopes of (A, tB) over a grid of t.
    Sweep {
        #[command(flatten)]
        source: PairSource,
        /// Geometric grid `lo:hi:count`.
        #[arg(long, conflicts_with = "t", required_unless_present = "t")]
        grid: Option<String>,
        /// Explicit comma-separated grid.
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1000)]
        max_den: u64,
    },
    /// Bisect t until the maximizing slope of (A, tB) straddles a target.
    Hunt {
        #[command(flatten)]
        source: PairSource,
        #[arg(long)]
        target: String,
        /// `lo:hi`.
        #[arg(long)]
        t_range: String,
        #[arg(long, default_value_t = 1000)]
        max_den: u64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Run a named property suite, or `all`.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
        /// Random pairs per randomized suite.
        #[arg(long, default_value_t = VerifyConfig::default().pairs)]
        pairs: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::TraceMax { .. } => "trace-max",
            Command::Chi { .. } => "chi",
            Command::Jsr { .. } => "jsr",
            Command::Slope { .. } => "slope",
            Command::Sweep { .. } => "sweep",
            Command::Hunt { .. } => "hunt",
            Command::Verify { .. } => "verify",
        }
    }

    fn source(&self) -> Option<&PairSource> {
        match self {
            Command::Classify(s) => Some(s),
            Command::TraceMax { source, .. }
            | Command::Chi { source, .. }
            | Command::Jsr { source, .. }
            | Command::Slope { source, .. }
            | Command::Sweep { source, .. }
            | Command::Hunt { source, .. } => Some(source),
            Command::Verify { .. } => None,
        }
    }

    /// Parameters other than the pair source, for the command echo.
    fn parameters(&self) -> Value {
        match self {
            Command::Classify(_) => json!({}),
            Command::TraceMax { l, n, .. } => json!({"l": l, "n": n}),
            Command::Chi { slope, alpha, max_den, .. } => {
                json!({"slope": slope.map(|s| s.to_string()), "alpha": alpha, "max_den": max_den})
            }
            Command::Jsr { depth, .. } => json!({"depth": depth}),
            Command::Slope { max_den, .. } => json!({"max_den": max_den}),
            Command::Sweep { grid, t, max_den, .. } => json!({"grid": grid, "t": t, "max_den": max_den}),
            Command::Hunt { target, t_range, max_den, tol, .. } => {
                json!({"target": target, "t_range": t_range, "max_den": max_den, "tol": tol})
            }
            Command::Verify { suite, seed, pairs } => json!({"suite": suite, "seed": seed, "pairs": pairs}),
        }
    }
}

/// Parses `argv` without the program name.
pub fn parse_command<I, S>(argv: I) -> CliResult<Cli>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let full = std::iter::once(std::ffi::OsString::from("balpair")).chain(argv.into_iter().map(Into::into));
    Cli::try_parse_from(full).map_err(|e| CliError::Usage(e.to_string()))
}

/// Reads a pair from a path, `-` (stdin) or inline JSON; warns on float
/// entries.
pub fn read_pair(source: &str, stdin: &mut dyn Read, warn: &mut dyn Write) -> CliResult<MatrixPair> {
    let text = if source == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        s
    } else if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(PathBuf::from(source))?
    };
    let value: Value = serde_json::from_str(&text)?;
    let floats = count_float_entries(&value);
    if floats > 0 {
        writeln!(warn, "warning: {floats} float matrix entries converted to exact rationals from their binary expansion")?;
    }
    Ok(serde_json::from_value(value)?)
}

fn count_float_entries(v: &Value) -> usize {
    match v {
        Value::Number(n) => usize::from(!n.is_i64() && !n.is_u64()),
        Value::Array(xs) => xs.iter().map(count_float_entries).sum(),
        Value::Object(m) => m.values().map(count_float_entries).sum(),
        _ => 0,
    }
}

/// Result envelope; keys serialize in sorted order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultDocument {
    pub command: Value,
    pub inputs_digest: String,
    pub outputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Value>,
    pub version: String,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        // Value maps are ordered by key, which fixes the byte layout
        let v = serde_json::to_value(self).expect("serializable");
        serde_json::to_string_pretty(&v).expect("serializable") + "\n"
    }
}

/// Re-renders a JSON document with sorted keys.
pub fn canonical_json(text: &str) -> CliResult<String> {
    let v: Value = serde_json::from_str(text)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn digest(command: &Value, pair: Option<&MatrixPair>) -> String {
    let canonical = json!({"command": command, "pair": pair});
    let bytes = serde_json::to_vec(&canonical).expect("serializable");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// What a command produced, before rendering.
enum Output {
    Table(TraceTable),
    Sweep(Vec<SweepRecord>, Value),
    Other(Value),
}

fn to_value<T: Serialize>(x: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(x)?)
}

fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("invalid t-range {s:?}: expected lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("invalid grid {s:?}: expected lo:hi:count"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo) {
        return Err(bad());
    }
    Ok(geometric_grid(lo, hi, count))
}

fn execute(cmd: &Command, pair: Option<&MatrixPair>) -> CliResult<(Output, bool)> {
    let pair = || pair.ok_or_else(|| CliError::Usage("missing --pair".into()));
    let out = match cmd {
        Command::Classify(_) => {
            let pair = pair()?;
            let report = classification_report(pair)?;
            let class = classify(pair)?;
            let normal_form = if class.is_balanced() { Some(normal_form_conjugator(pair)?) } else { None };
            // exact checks need a rational unimodular scaling
            let checks = match balanced_pair_checks(pair) {
                Ok(c) => Some(c),
                Err(Error::InexactNormalization | Error::NotBalanced(_)) => None,
                Err(e) => return Err(e.into()),
            };
            Output::Other(json!({
                "report": to_value(&report)?,
                "normal_form": to_value(&normal_form)?,
                "checks": to_value(&checks)?,
            }))
        }
        Command::TraceMax { l, n, .. } => Output::Table(trace_argmax(pair()?, *l, *n)?),
        Command::Chi { slope: Some(s), .. } => Output::Other(to_value(&chi_rational(pair()?, *s))?),
        Command::Chi { alpha, max_den, .. } => {
            let alpha = parse_rational(alpha.as_deref().unwrap_or_default())?;
            Output::Other(to_value(&chi_irrational_exact(pair()?, &alpha, *max_den)?)?)
        }
        Command::Jsr { depth, .. } => Output::Other(to_value(&jsr_bounds(pair()?, *depth)?)?),
        Command::Slope { max_den, .. } => Output::Other(to_value(&maximize_slope(pair()?, *max_den)?)?),
        Command::Sweep { grid, t, max_den, .. } => {
            let grid = match (grid, t) {
                (Some(g), _) => parse_grid(g)?,
                (None, Some(t)) => t.clone(),
                (None, None) => return Err(CliError::Usage("sweep needs --grid or --t".into())),
            };
            let pair = pair()?;
            let records = sweep_family(pair.a(), pair.b(), &grid, *max_den)?;
            let pl = to_value(&plateaus(&records))?;
            Output::Sweep(records, pl)
        }
        Command::Hunt { target, t_range, max_den, tol, .. } => {
            let pair = pair()?;
            let (lo, hi) = parse_range(t_range)?;
            let target = parse_rational(target)?;
            let r = hunt_bracket(pair.a(), pair.b(), &target, lo, hi, *max_den, *tol)?;
            Output::Other(to_value(&r)?)
        }
        Command::Verify { suite, seed, pairs } => {
            let suites: Vec<Suite> =
                if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse::<Suite>()?] };
            let cfg = VerifyConfig { seed: *seed, pairs: *pairs, ..VerifyConfig::default() };
            let reports: Vec<_> = suites.iter().map(|s| run_suite(*s, &cfg)).collect();
            let ok = reports.iter().all(|r| r.passed);
            return Ok((Output::Other(json!({"passed": ok, "suites": to_value(&reports)?})), ok));
        }
    };
    Ok((out, true))
}

fn trace_table_csv(table: &TraceTable, out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["word", "trace_num", "trace_den", "is_cyclic_balanced", "is_maximizer"])?;
    for e in &table.entries {
        w.write_record([
            e.word.to_string(),
            e.trace.numer().to_string(),
            e.trace.denom().to_string(),
            e.is_cyclic_balanced.to_string(),
            e.is_maximizer.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn sweep_csv(records: &[SweepRecord], out: &mut dyn Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "tau_num", "tau_den", "chi", "jsr_lower"])?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            r.tau.num().to_string(),
            r.tau.den().to_string(),
            r.chi.to_string(),
            r.jsr_lower.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a parsed command; returns the exit status.
pub fn run(cli: &Cli, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let start = Instant::now();
    let pair = match cli.command.source() {
        Some(s) => Some(read_pair(&s.pair, stdin, stderr)?),
        None => None,
    };
    let echo = json!({"name": cli.command.name(), "parameters": cli.command.parameters()});
    let (output, ok) = execute(&cli.command, pair.as_ref())?;
    match (cli.format, output) {
        (Format::Csv, Output::Table(t)) => trace_table_csv(&t, stdout)?,
        (Format::Csv, Output::Sweep(r, _)) => sweep_csv(&r, stdout)?,
        (Format::Csv, _) => {
            return Err(CliError::Usage(format!("--format csv is not available for {}", cli.command.name())))
        }
        (Format::Json, output) => {
            let outputs = match output {
                Output::Table(t) => to_value(&t)?,
                Output::Sweep(r, pl) => json!({"records": to_value(&r)?, "plateaus": pl}),
                Output::Other(v) => v,
            };
            let doc = ResultDocument {
                inputs_digest: digest(&echo, pair.as_ref()),
                command: echo,
                outputs,
                timings: cli.timings.then(|| json!({"elapsed_ms": start.elapsed().as_secs_f64() * 1e3})),
                version: env!("CARGO_PKG_VERSION").to_string(),
            };
            stdout.write_all(doc.to_json().as_bytes())?;
        }
    }
    Ok(if ok { 0 } else { 1 })
}

/// Entry point shared by the binary: parse, run, and report errors as JSON
/// on stderr.
pub fn main_with<I, S>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let full = std::iter::once(std::ffi::OsString::from("balpair")).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(full) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => return report_error(&CliError::Usage(e.to_string()), stderr, 2),
    };
    if let Some(n) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cli, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let code = if matches!(e, CliError::Usage(_)) { 2 } else { 1 };
            report_error(&e, stderr, code)
        }
    }
}

fn report_error(e: &CliError, stderr: &mut dyn Write, code: i32) -> i32 {
    let doc = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
    let _ = writeln!(stderr, "{}", serde_json::to_string(&doc).expect("serializable"));
    code
}
