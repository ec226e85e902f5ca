//! Command-line front end: JSON in, JSON or CSV out.
//!
//! Every report embeds the run configuration and the library version. All
//! randomness flows from `--seed`, so a fixed configuration gives
//! byte-identical output.

mod commands;
mod suite;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::derivations::TOL_INNER;
use crate::error::Error;
use crate::poly::DEG_MAX;
use crate::representations::RepPoint;

pub use suite::{run_suite, SuiteRow};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "cyclealg", version, about = "Computation in the n-cycle matrix function algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct Options {
    /// Algebra dimension; checked against the input when both are given.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Degree bound on each entry in the `w = z^n` variable.
    #[arg(long = "deg-max", global = true, default_value_t = DEG_MAX)]
    pub deg_max: usize,
    /// Boundary grid size (reconstruct) or norm grid size (approx-identity).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Residual tolerance for inner solves and verification
    #[arg(long = "tol-inner", global = true, default_value_t = TOL_INNER)]
    pub tol_inner: f64,
    /// Seed for all randomized trials
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Input JSON file; standard input when omitted.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report file; standard output when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Evaluate an element at a representation point.
    Eval {
        /// Point as JSON, e.g. {"kind":"lambda","re":0.3,"im":0} or {"kind":"diag0","i":1}.
        #[arg(long)]
        point: Option<String>,
        /// Shorthand for a lambda point: `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
    /// Decide whether a point derivation given on generators is inner.
    InnerCheck {
        /// Random pairs for the Leibniz pre-check.
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Kernel samples for the non-inner certificate.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Rebuild a global witness from a derivation or a boundary field.
    Reconstruct {
        /// Random test words for the final verification.
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Run the invariant suites and summarize residuals.
    Suite {
        /// Base number of random cases per invariant.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Defects of the boundary approximate identity on canonical kernel elements.
    ApproxIdentity {
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [4, 16, 64, 256, 1024, 4096])]
        k: Vec<usize>,
    },
    /// Certify whether an element is zero from interior evaluations.
    Semisimple,
    /// Write kernel elements of a scalar representation as sums of kernel products.
    KernelWitness {
        /// A diag0 point as JSON; defaults to vertex 1.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 2)]
        budget: usize,
    },
    /// Split a point derivation into an inner part and a part vanishing on
    /// the idempotents. Exact at lambda = 0, experimental elsewhere.
    Decompose,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::InnerCheck { .. } => "inner-check",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Suite { .. } => "suite",
            Command::ApproxIdentity { .. } => "approx-identity",
            Command::Semisimple => "semisimple",
            Command::KernelWitness { .. } => "kernel-witness",
            Command::Decompose => "decompose",
        }
    }
}

/// Exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Negative = 1,
    InputError = 2,
    Internal = 3,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

/// A command's product: a JSON result and, for tabular commands, CSV rows.
pub struct Outcome {
    pub status: Status,
    pub result: Value,
    pub csv: Option<String>,
}

impl Outcome {
    fn new(status: Status, result: Value) -> Self {
        Outcome {
            status,
            result,
            csv: None,
        }
    }
}

/// A failed run: input errors exit 2, internal failures 3.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn input(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Failure {
            status: Status::InputError,
            kind: kind.into(),
            message: message.into(),
        }
    }

    pub fn internal(e: &Error) -> Self {
        Failure {
            status: Status::Internal,
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }

    fn diagnostic(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.status as u8,
            }
        })
    }
}

impl From<Error> for Failure {
    /// Library errors raised on user data are input errors.
    fn from(e: Error) -> Self {
        Failure::input(e.kind(), e.to_string())
    }
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a Options,
    args: &'a Command,
    result: &'a Value,
}

/// Runs a parsed command line, writing the report and any diagnostic.
pub fn run(cli: &Cli) -> Status {
    match execute(cli) {
        Ok(outcome) => match emit(cli, &outcome) {
            Ok(()) => outcome.status,
            Err(f) => fail(&f),
        },
        Err(f) => fail(&f),
    }
}

/// Parses `std::env::args` and runs.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::InputError.into()
            } else {
                Status::Success.into()
            };
        }
    };
    run(&cli).into()
}

fn fail(f: &Failure) -> Status {
    eprintln!("{}", f.diagnostic());
    f.status
}

pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let o = &cli.options;
    if !(o.tol_inner.is_finite() && o.tol_inner > 0.0) {
        return Err(Failure::input("config", "--tol-inner must be positive"));
    }
    if o.n == Some(0) {
        return Err(Failure::input("config", "--n must be at least 1"));
    }
    if o.format == Format::Csv
        && !matches!(cli.command, Command::Suite { .. } | Command::ApproxIdentity { .. })
    {
        return Err(Failure::input(
            "config",
            "csv output is only available for suite and approx-identity",
        ));
    }
    match &cli.command {
        Command::Eval { point, lambda } => commands::eval(o, point.as_deref(), lambda.as_deref()),
        Command::InnerCheck { trials, samples } => commands::inner_check(o, *trials, *samples),
        Command::Reconstruct { trials } => commands::reconstruct(o, *trials),
        Command::Suite { trials } => suite::command(o, *trials),
        Command::ApproxIdentity { lambda, k } => commands::approx_identity(o, lambda.as_deref(), k),
        Command::Semisimple => commands::semisimple(o),
        Command::KernelWitness { point, budget } => {
            commands::kernel_witness(o, point.as_deref(), *budget)
        }
        Command::Decompose => commands::decompose(o),
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), Failure> {
    let text = match (&cli.options.format, &outcome.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        _ => {
            let report = Report {
                tool: "cyclealg",
                version: VERSION,
                command: cli.command.name(),
                config: &cli.options,
                args: &cli.command,
                result: &outcome.result,
            };
            let mut s = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure::internal(&Error::Json(e)))?;
            s.push('\n');
            s
        }
    };
    let written = match &cli.options.output {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    written.map_err(|e| Failure {
        status: Status::Internal,
        kind: "io".into(),
        message: e.to_string(),
    })
}

pub(crate) fn read_input(o: &Options) -> Result<String, Failure> {
    let mut text = String::new();
    match &o.input {
        Some(path) => {
            text = fs::read_to_string(path)
                .map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
        }
        None => {
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::input("io", e.to_string()))?;
        }
    }
    Ok(text)
}

/// Syntax errors are reported with line and column.
pub(crate) fn parse_value(text: &str) -> Result<Value, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::input("json", e.to_string()))
}

pub(crate) fn from_value<T: DeserializeOwned>(v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::input("json", e.to_string()))
}

pub(crate) fn check_n(o: &Options, found: usize) -> Result<(), Failure> {
    match o.n {
        Some(expected) if expected != found => Err(Error::DimensionMismatch { expected, found }.into()),
        _ => Ok(()),
    }
}

/// `re` or `re,im`.
pub(crate) fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Failure::input("config", format!("cannot parse {t:?} as a number")))
    };
    match parts[..] {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Failure::input("config", format!("expected re or re,im, got {s:?}"))),
    }
}

pub(crate) fn parse_point(
    point: Option<&str>,
    lambda: Option<&str>,
) -> Result<Option<RepPoint>, Failure> {
    match (point, lambda) {
        (Some(_), Some(_)) => Err(Failure::input("config", "give --point or --lambda, not both")),
        (Some(p), None) => from_value(parse_value(p)?).map(Some),
        (None, Some(l)) => Ok(Some(RepPoint::lambda(parse_complex(l)?)?)),
        (None, None) => Ok(None),
    }
}

pub(crate) fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

pub(crate) fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure {
            status: Status::Internal,
            kind: "csv".into(),
            message: e.to_string(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Failure {
        status: Status::Internal,
        kind: "csv".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}
