//! Command-line front end: `colloc-r solve|table|sweep`.
//!
//! [`run`] takes the argument list and output sinks explicitly and returns
//! the process exit code, so the whole interface can be driven in-process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::discretize::{make_grid, QuadratureRule};
use crate::linalg::condition_estimate;
use crate::metrics::{evaluate, ErrorReport, MetricsError, DEFAULT_M};
use crate::problem::{builtin_example, Problem, ProblemError};
use crate::solver::{
    solve_adaptive, solve_fixed_n_full, AdaptiveOptions, ApproxSolution, RunStatus, RunTrace,
    SolveError,
};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "colloc-r",
    version,
    about = "Collocation solver for ∫₋₁¹ e^{−|x−y|} h(y) dy = f(x)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the adaptive solver once and report the result.
    Solve(SolveArgs),
    /// Run the adaptive solver for several tolerances and print one row each.
    Table(TableArgs),
    /// Solve at a list of fixed collocation counts.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Built-in example (1–4).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub example: Option<u8>,
    /// Right-hand side f(x) as an expression in `x`.
    #[arg(long = "f", value_name = "EXPR")]
    pub f: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Left,
    Trapezoid,
}

impl From<Rule> for QuadratureRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Left => QuadratureRule::LeftRectangle,
            Rule::Trapezoid => QuadratureRule::Trapezoid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Derive the exact solution from f (for `--f` sources).
    #[arg(long)]
    pub oracle: bool,
    /// Quadrature rule of the discrete norm.
    #[arg(long, value_enum, default_value = "left")]
    pub rule: Rule,
    /// Number of points on which the continuous part is compared.
    #[arg(long = "M", value_name = "INT", default_value_t = DEFAULT_M)]
    pub m_points: usize,
    /// Data file to write.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Format of the data file.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct LoopArgs {
    /// Largest collocation count tried.
    #[arg(long, value_name = "EVEN", default_value_t = 512)]
    pub n_max: usize,
    /// First collocation count tried.
    #[arg(long, value_name = "EVEN", default_value_t = 6)]
    pub n_start: usize,
    /// Increment of the collocation count.
    #[arg(long, value_name = "EVEN", default_value_t = 2)]
    pub n_step: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Stopping tolerance on the discrepancy.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[command(flatten)]
    pub looping: LoopArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Tolerances, comma separated or repeated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub epsilon: Vec<f64>,
    #[command(flatten)]
    pub looping: LoopArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Collocation counts, comma separated or repeated.
    #[arg(long = "n", value_delimiter = ',', num_args = 0..)]
    pub n: Vec<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Problem(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Solve(SolveError::InvalidOptions(_)) => EXIT_CONFIG,
            CliError::Solve(_) | CliError::Metrics(_) => EXIT_SOLVER,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_CONVERGED
            };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Table(a) => cmd_table(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_problem(src: &SourceArgs, oracle: bool) -> Result<Problem, CliError> {
    match (&src.example, &src.f) {
        (Some(id), _) => Ok(builtin_example(*id as usize)?),
        (None, Some(text)) => {
            let p = Problem::from_text(format!("f(x) = {text}"), text).map_err(|e| match e {
                ProblemError::Parse(pe) => CliError::Config(format!("cannot parse f: {pe}")),
                other => other.into(),
            })?;
            Ok(if oracle { p.with_derived_exact()? } else { p })
        }
        (None, None) => Err(CliError::Config(
            "one of --example or --f is required".into(),
        )),
    }
}

fn source_label(src: &SourceArgs) -> String {
    match (&src.example, &src.f) {
        (Some(id), _) => format!("example={id}"),
        (None, Some(text)) => format!("f={text:?}"),
        _ => String::new(),
    }
}

fn check_common(c: &CommonArgs) -> Result<(), CliError> {
    if c.m_points < 2 {
        return Err(CliError::Config(format!(
            "--M must be at least 2, got {}",
            c.m_points
        )));
    }
    Ok(())
}

fn check_epsilon(eps: f64) -> Result<(), CliError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(CliError::Config(format!(
            "--epsilon must be positive, got {eps}"
        )));
    }
    Ok(())
}

fn adaptive_options(eps: f64, l: &LoopArgs, c: &CommonArgs) -> Result<AdaptiveOptions, CliError> {
    check_epsilon(eps)?;
    let opts = AdaptiveOptions {
        epsilon: eps,
        n_max: l.n_max,
        rule: c.rule.into(),
        n_start: l.n_start,
        n_step: l.n_step,
    };
    opts.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(opts)
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Round-trippable float (17 significant digits); empty when absent.
fn csv_num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Four significant digits for human-readable output.
fn short(v: Option<f64>) -> String {
    match v {
        Some(0.0) => "0".into(),
        Some(x) => format!("{x:.3e}"),
        None => "-".into(),
    }
}

fn status_str(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Converged => "converged",
        RunStatus::MaxNReached => "max-n-reached",
    }
}

fn metadata_line(command: &str, src: &SourceArgs, c: &CommonArgs, extra: &str) -> String {
    format!(
        "# colloc-r {} {command} {} rule={} M={}{extra}",
        env!("CARGO_PKG_VERSION"),
        source_label(src),
        QuadratureRule::from(c.rule),
        c.m_points
    )
}

/// One row of a table: the columns `n,m,epsilon,a_m1,c_m1,a_0,c_0,dp,re`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub a_m1: Option<f64>,
    pub c_m1: f64,
    pub a_0: Option<f64>,
    pub c_0: f64,
    pub dp: f64,
    pub re: Option<f64>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct PointRow {
    t: f64,
    g_exact: Option<f64>,
    g_approx: f64,
    rpe: Option<f64>,
}

#[derive(Serialize)]
struct SolveJson<'a> {
    meta: &'a str,
    summary: &'a TableRow,
    trace: &'a RunTrace,
    points: Vec<PointRow>,
}

fn table_row(
    problem: &Problem,
    eps: f64,
    sol: &ApproxSolution,
    trace: &RunTrace,
    report: Option<&ErrorReport>,
) -> TableRow {
    TableRow {
        n: sol.n(),
        m: sol.m(),
        epsilon: eps,
        a_m1: problem.exact.as_ref().map(|e| e.a_minus1),
        c_m1: sol.c_minus1(),
        a_0: problem.exact.as_ref().map(|e| e.a_0),
        c_0: sol.c_0(),
        dp: sol.dp(),
        re: report.map(|r| r.re),
        status: trace.status,
    }
}

fn points(sol: &ApproxSolution, report: Option<&ErrorReport>, m: usize) -> Vec<PointRow> {
    match report {
        Some(r) => (0..r.m_points)
            .map(|i| PointRow {
                t: r.points[i],
                g_exact: Some(r.g_exact[i]),
                g_approx: r.g_approx[i],
                rpe: Some(r.rpe[i]),
            })
            .collect(),
        None => crate::metrics::evaluation_points(m)
            .into_iter()
            .map(|t| PointRow {
                t,
                g_exact: None,
                g_approx: sol.eval_continuous(t),
                rpe: None,
            })
            .collect(),
    }
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    check_common(&a.common)?;
    let opts = adaptive_options(a.epsilon, &a.looping, &a.common)?;
    let problem = load_problem(&a.source, a.common.oracle)?;
    let (sol, trace) = solve_adaptive(&problem, &opts)?;
    let report = problem
        .exact
        .as_ref()
        .map(|e| evaluate(&sol, e, a.common.m_points))
        .transpose()?;
    let row = table_row(&problem, a.epsilon, &sol, &trace, report.as_ref());

    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}: {} at n={} m={} after {} steps",
        problem.label,
        status_str(trace.status),
        row.n,
        row.m,
        trace.steps.len()
    );
    let _ = writeln!(s, "  DP = {}  RE = {}", short(Some(row.dp)), short(row.re));
    let _ = writeln!(
        s,
        "  c_-1 = {}  a_-1 = {}",
        short(Some(row.c_m1)),
        short(row.a_m1)
    );
    let _ = writeln!(
        s,
        "  c_0  = {}  a_0  = {}",
        short(Some(row.c_0)),
        short(row.a_0)
    );
    write_out(out, &s)?;

    if let Some(path) = &a.common.out {
        let meta = metadata_line(
            "solve",
            &a.source,
            &a.common,
            &format!(
                " epsilon={:e} n_max={} n_start={} n_step={} n={} m={} status={}",
                a.epsilon,
                opts.n_max,
                opts.n_start,
                opts.n_step,
                row.n,
                row.m,
                status_str(trace.status)
            ),
        );
        let pts = points(&sol, report.as_ref(), a.common.m_points);
        let body = match a.common.format {
            Format::Csv => {
                let mut b = format!("{meta}\nt,g_exact,g_approx,rpe\n");
                for p in &pts {
                    let _ = writeln!(
                        b,
                        "{},{},{},{}",
                        csv_num(Some(p.t)),
                        csv_num(p.g_exact),
                        csv_num(Some(p.g_approx)),
                        csv_num(p.rpe)
                    );
                }
                b
            }
            Format::Json => to_json(&SolveJson {
                meta: &meta,
                summary: &row,
                trace: &trace,
                points: pts,
            }),
        };
        write_file(path, &body)?;
    }
    Ok(if trace.converged() {
        EXIT_CONVERGED
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn write_out(out: &mut dyn Write, s: &str) -> Result<(), CliError> {
    out.write_all(s.as_bytes()).map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct RowsJson<'a, T: Serialize> {
    meta: &'a str,
    rows: &'a [T],
}

pub fn cmd_table(a: &TableArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    check_common(&a.common)?;
    if a.epsilon.is_empty() {
        return Err(CliError::Config(
            "--epsilon needs at least one value".into(),
        ));
    }
    let opts: Vec<AdaptiveOptions> = a
        .epsilon
        .iter()
        .map(|&e| adaptive_options(e, &a.looping, &a.common))
        .collect::<Result<_, _>>()?;
    let problem = load_problem(&a.source, a.common.oracle)?;
    // Independent solves run concurrently; collecting preserves input order.
    let rows: Vec<TableRow> = opts
        .par_iter()
        .map(|o| -> Result<TableRow, CliError> {
            let (sol, trace) = solve_adaptive(&problem, o)?;
            let report = problem
                .exact
                .as_ref()
                .map(|e| evaluate(&sol, e, a.common.m_points))
                .transpose()?;
            Ok(table_row(
                &problem,
                o.epsilon,
                &sol,
                &trace,
                report.as_ref(),
            ))
        })
        .collect::<Result<_, _>>()?;

    let mut s = format!("{}\n", problem.label);
    let _ = writeln!(
        s,
        "{:>5} {:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n", "m", "epsilon", "a_-1", "c_-1", "a_0", "c_0", "DP", "RE"
    );
    for r in &rows {
        let _ = writeln!(
            s,
            "{:>5} {:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}{}",
            r.n,
            r.m,
            short(Some(r.epsilon)),
            short(r.a_m1),
            short(Some(r.c_m1)),
            short(r.a_0),
            short(Some(r.c_0)),
            short(Some(r.dp)),
            short(r.re),
            if r.status == RunStatus::Converged {
                ""
            } else {
                "  (max n reached)"
            }
        );
    }
    write_out(out, &s)?;

    if let Some(path) = &a.common.out {
        let meta = metadata_line(
            "table",
            &a.source,
            &a.common,
            &format!(
                " n_max={} n_start={} n_step={}",
                a.looping.n_max, a.looping.n_start, a.looping.n_step
            ),
        );
        let body = match a.common.format {
            Format::Csv => {
                let mut b = format!("{meta}\nn,m,epsilon,a_m1,c_m1,a_0,c_0,dp,re\n");
                for r in &rows {
                    let _ = writeln!(
                        b,
                        "{},{},{},{},{},{},{},{},{}",
                        r.n,
                        r.m,
                        csv_num(Some(r.epsilon)),
                        csv_num(r.a_m1),
                        csv_num(Some(r.c_m1)),
                        csv_num(r.a_0),
                        csv_num(Some(r.c_0)),
                        csv_num(Some(r.dp)),
                        csv_num(r.re)
                    );
                }
                b
            }
            Format::Json => to_json(&RowsJson {
                meta: &meta,
                rows: &rows,
            }),
        };
        write_file(path, &body)?;
    }
    Ok(if rows.iter().all(|r| r.status == RunStatus::Converged) {
        EXIT_CONVERGED
    } else {
        EXIT_NOT_CONVERGED
    })
}

/// One row of a sweep: the columns `n,m,dp,re,cond`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub dp: f64,
    pub re: Option<f64>,
    pub cond: f64,
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    check_common(&a.common)?;
    if a.n.is_empty() {
        return Err(CliError::Config("--n needs at least one value".into()));
    }
    if let Some(&bad) = a.n.iter().find(|&&n| n < 6 || n % 2 != 0) {
        return Err(CliError::Config(format!(
            "collocation counts must be even and at least 6, got {bad}"
        )));
    }
    let problem = load_problem(&a.source, a.common.oracle)?;
    let rule: QuadratureRule = a.common.rule.into();
    let rows: Vec<SweepRow> =
        a.n.par_iter()
            .map(|&n| -> Result<SweepRow, CliError> {
                let grid = make_grid(n, rule).map_err(SolveError::from)?;
                let fs = solve_fixed_n_full(&problem, &grid)?;
                let cond = condition_estimate(&fs.system.a).map_err(SolveError::from)?;
                let re = problem
                    .exact
                    .as_ref()
                    .map(|e| evaluate(&fs.solution, e, a.common.m_points))
                    .transpose()?
                    .map(|r| r.re);
                Ok(SweepRow {
                    n,
                    m: grid.m(),
                    dp: fs.solution.dp(),
                    re,
                    cond,
                })
            })
            .collect::<Result<_, _>>()?;

    let mut s = format!("{}\n", problem.label);
    let _ = writeln!(
        s,
        "{:>5} {:>5} {:>10} {:>10} {:>10}",
        "n", "m", "DP", "RE", "cond"
    );
    for r in &rows {
        let _ = writeln!(
            s,
            "{:>5} {:>5} {:>10} {:>10} {:>10}",
            r.n,
            r.m,
            short(Some(r.dp)),
            short(r.re),
            short(Some(r.cond))
        );
    }
    write_out(out, &s)?;

    if let Some(path) = &a.common.out {
        let meta = metadata_line("sweep", &a.source, &a.common, "");
        let body = match a.common.format {
            Format::Csv => {
                let mut b = format!("{meta}\nn,m,dp,re,cond\n");
                for r in &rows {
                    let _ = writeln!(
                        b,
                        "{},{},{},{},{}",
                        r.n,
                        r.m,
                        csv_num(Some(r.dp)),
                        csv_num(r.re),
                        csv_num(Some(r.cond))
                    );
                }
                b
            }
            Format::Json => to_json(&RowsJson {
                meta: &meta,
                rows: &rows,
            }),
        };
        write_file(path, &body)?;
    }
    Ok(EXIT_CONVERGED)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["colloc-r"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn formatting_helpers() {
        assert_eq!(csv_num(None), "");
        assert_eq!(csv_num(Some(0.1)), "1.0000000000000001e-1");
        assert_eq!(csv_num(Some(0.1)).parse::<f64>().unwrap(), 0.1);
        assert_eq!(short(Some(7.1372e-7)), "7.137e-7");
        assert_eq!(short(Some(0.0)), "0");
        assert_eq!(short(None), "-");
    }

    #[test]
    fn loose_tolerance() {
        let (code, out, _) = run_capture(&["solve", "--example", "1", "--epsilon", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains("converged at n=6 m=4"), "{out}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["solve"]).0, 2);
        assert_eq!(run_capture(&["solve", "--example", "5"]).0, 2);
        assert_eq!(run_capture(&["solve", "--example", "1", "--f", "x"]).0, 2);
        assert_eq!(run_capture(&["table", "--example", "1"]).0, 2);
        assert_eq!(run_capture(&["sweep", "--example", "1", "--n", "8,9"]).0, 2);
        assert_eq!(
            run_capture(&["solve", "--example", "1", "--epsilon", "-1"]).0,
            2
        );
        assert_eq!(
            run_capture(&["solve", "--example", "1", "--n-max", "7"]).0,
            2
        );
        assert_eq!(run_capture(&["solve", "--example", "1", "--M", "1"]).0, 2);
        let (code, _, err) = run_capture(&["solve", "--f", "sin(x"]);
        assert_eq!(code, 2);
        assert!(err.contains("offset"), "{err}");
    }

    #[test]
    fn help_is_not_an_error() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("solve"));
    }

    #[test]
    fn solver_failure_code() {
        let (code, _, err) = run_capture(&["solve", "--f", "sqrt(x)"]);
        assert_eq!(code, 3, "{err}");
    }

    #[test]
    fn non_convergence_code() {
        let (code, out, _) = run_capture(&[
            "solve",
            "--example",
            "3",
            "--epsilon",
            "1e-12",
            "--n-max",
            "10",
        ]);
        assert_eq!(code, 1);
        assert!(out.contains("max-n-reached"));
    }
}
