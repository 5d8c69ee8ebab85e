//! The `kgr` command line: every subcommand loads its inputs, runs checks and
//! prints one JSON report.

mod commands;
mod inputs;

use crate::kgraph::GraphError;
use crate::measures::MeasureError;
use crate::projsys::ProjError;
use crate::repn::ReprError;
use crate::report::{all_pass, CheckRecord};
use crate::universal::UniversalError;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

pub use inputs::{parse_degree, InputFile, Inputs, SystemSpec};

pub const SCHEMA: &str = "kgr-report/1";
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Universal(#[from] UniversalError),
}

#[derive(Debug, Parser)]
#[command(
    name = "kgr",
    version,
    about = "Checks on finite k-graphs, their path-space measures and representations"
)]
pub struct Cli {
    #[command(flatten)]
    pub options: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Tolerance for floating comparisons (default 1e-9, or KGR_TOL).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Rational and surd arithmetic; fails on inputs that are not rational.
    #[arg(long, global = true, conflicts_with = "float")]
    pub exact: bool,
    /// Double precision even for rational inputs.
    #[arg(long, global = true)]
    pub float: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Adds the wall time to the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Loads a graph and checks factorization and the hexagon condition.
    Validate { graph: PathBuf },
    /// Lists the normal-form paths of one degree.
    Paths {
        graph: PathBuf,
        #[arg(long)]
        degree: String,
        #[arg(long)]
        rainbow: bool,
    },
    /// Kolmogorov consistency of a measure on cylinders up to a total degree.
    MeasureCheck {
        graph: PathBuf,
        measure: PathBuf,
        #[arg(long)]
        depth: u32,
    },
    /// Cuntz-Krieger and projection-valued measure identities of the
    /// standard representation on `H_M`.
    CkVerify {
        graph: PathBuf,
        measure: PathBuf,
        /// Ambient depth M.
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value = "1")]
        cap: String,
    },
    /// Partition refinement by range sets, for a path-space measure or an
    /// interval system.
    MonicCheck {
        graph: Option<PathBuf>,
        measure: Option<PathBuf>,
        #[arg(long)]
        interval: Option<PathBuf>,
        #[arg(long)]
        max_depth: u32,
        /// Also compares the rank of `{T_λT_λ*1}` with the dimension at this depth.
        #[arg(long)]
        span_depth: Option<u32>,
    },
    /// Hellinger affinity trend between two measures.
    Disjointness {
        graph: PathBuf,
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        max_depth: u32,
    },
    /// Shift-invariant functions at one depth.
    Commutant {
        graph: PathBuf,
        measure: PathBuf,
        #[arg(long)]
        depth: u32,
    },
    /// Searches for `h` intertwining two systems.
    Equiv {
        graph: PathBuf,
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        depth: u32,
    },
    /// Embeddings of path-space representations in the universal space.
    UniversalCheck {
        graph: PathBuf,
        #[arg(required = true)]
        measures: Vec<PathBuf>,
        /// Working depth.
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value = "1")]
        cap: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    Exact,
    Float,
}

/// What a subcommand hands back before it is wrapped into a report.
#[derive(Default)]
pub struct Outcome {
    pub checks: Vec<CheckRecord>,
    pub verdicts: Map<String, Value>,
}

impl Outcome {
    pub fn verdict(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("verdicts serialize");
        self.verdicts.insert(key.to_string(), value);
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub arithmetic: Arithmetic,
    pub tolerance: f64,
    pub checks: Vec<CheckRecord>,
    pub verdicts: Map<String, Value>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Settings shared by the subcommands.
pub struct Context {
    pub tol: f64,
    pub exact: bool,
    pub float: bool,
    pub arithmetic: Option<Arithmetic>,
    pub inputs: Inputs,
}

impl Context {
    /// Exact arithmetic unless an input is irrational or `--float` asked
    /// otherwise.
    pub fn choose(&mut self, inputs_exact: bool) -> Result<Arithmetic, CliError> {
        let chosen = if self.float {
            Arithmetic::Float
        } else if inputs_exact {
            Arithmetic::Exact
        } else if self.exact {
            return Err(CliError::Input("--exact needs rational inputs".into()));
        } else {
            Arithmetic::Float
        };
        self.arithmetic = Some(chosen);
        Ok(chosen)
    }
}

fn tolerance(flag: Option<f64>) -> Result<f64, CliError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("KGR_TOL") {
            Ok(text) => text
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("KGR_TOL={text:?} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol.is_nan() || tol < 0.0 {
        return Err(CliError::Input(format!("tolerance {tol} is negative")));
    }
    Ok(tol)
}

/// Runs one invocation; returns the exit code and the text for stdout and
/// stderr. 0 means every check passed, 1 that one failed, 2 an input error.
pub fn run_command<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                (0, text, String::new())
            } else {
                (2, String::new(), text)
            };
        }
    };
    let command = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match execute(cli, command) {
        Ok(report) => {
            let code = if report.pass { 0 } else { 1 };
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            (code, text, String::new())
        }
        Err(e) => (2, String::new(), format!("error: {e}\n")),
    }
}

fn execute(cli: Cli, command: String) -> Result<Report, CliError> {
    let started = Instant::now();
    let options = cli.options;
    let mut ctx = Context {
        tol: tolerance(options.tol)?,
        exact: options.exact,
        float: options.float,
        arithmetic: None,
        inputs: Inputs::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let outcome = pool.install(|| commands::dispatch(&mut ctx, cli.command))?;
    Ok(Report {
        schema: SCHEMA,
        command,
        inputs: ctx.inputs.files,
        arithmetic: ctx.arithmetic.unwrap_or(Arithmetic::Exact),
        tolerance: ctx.tol,
        pass: all_pass(&outcome.checks),
        checks: outcome.checks,
        verdicts: outcome.verdicts,
        wall_time_ms: options.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
    })
}
