//! `foldcode`: bounds on codes in the folded n-cube.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 when a solver stops
//! short of optimality or a verification check fails.

mod config;
mod record;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conic::Status;
use foldcode::cube::diameter;
use foldcode::delsarte::delsarte_bound;
use foldcode::model::{build_sdp_mode, Coefficients};
use foldcode::oracle::audit;
use foldcode::sdpa::export_sdpa;
use serde::Serialize;

use config::{env_snapshot, Overrides, Settings};
use record::{timestamp, Method, RunRecord, TOOL_VERSION};

pub const SDP_MAX_N: u32 = 20;
pub const LP_MAX_N: u32 = 32;
pub const VERIFY_MAX_N: u32 = 13;
const MIN_N: u32 = 6;

#[derive(Parser)]
#[command(
    name = "foldcode",
    version,
    about = "Upper bounds for codes in the folded n-cube"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct SolverArgs {
    /// Config file of `key = value` lines (tol, max_iter, workers, coefficients).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Gap and feasibility tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Block coefficients of the SDP.
    #[arg(long, global = true, value_parser = parse_coefficients)]
    coefficients: Option<Coefficients>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a run record.
    Bound {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Sdp)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Both bounds for a range of n and a list of distances, as CSV.
    Table {
        #[arg(long)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        /// Comma-separated distances; pairs with d > n/2 are skipped.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        d: Vec<String>,
        /// Compare against the bundled table of known values.
        #[arg(long)]
        expected: bool,
        /// Compare against a table file `n,d,sdp_bound,delsarte_bound`.
        #[arg(long, value_name = "PATH")]
        expected_file: Option<PathBuf>,
        /// Leave timing columns empty.
        #[arg(long)]
        deterministic: bool,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Brute-force checks of the algebra and the block coefficients.
    Verify {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Write the SDP in SDPA sparse format.
    Export {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Print the block coefficient table as CSV.
    Beta {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sdp,
    #[value(alias = "delsarte-lp")]
    Delsarte,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

fn parse_coefficients(s: &str) -> Result<Coefficients, String> {
    s.parse().map_err(|e| format!("{e}"))
}

enum Failure {
    Usage(String),
    Unsuccessful(String),
}

type Outcome = Result<ExitCode, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl From<foldcode::Error> for Failure {
    fn from(e: foldcode::Error) -> Self {
        match e {
            foldcode::Error::InvalidArgument(_) | foldcode::Error::ResourceLimit(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Unsuccessful(e.to_string()),
        }
    }
}

fn settings(args: &SolverArgs) -> Result<Settings, Failure> {
    let file = match &args.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let flags = Overrides {
        tol: args.tol,
        max_iter: args.max_iter,
        workers: args.workers,
        coefficients: args.coefficients,
    };
    Settings::resolve(file.as_deref(), &env_snapshot(), &flags).map_err(usage)
}

fn check_instance(n: u32, d: u32, cap: u32) -> Result<(), Failure> {
    if !(MIN_N..=cap).contains(&n) {
        return Err(usage(format!("n = {n} outside {MIN_N}..={cap}")));
    }
    if d < 1 || d > diameter(n) {
        return Err(usage(format!("d = {d} outside 1..={}", diameter(n))));
    }
    Ok(())
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn status_code(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_bound(n: u32, d: u32, method: MethodArg, format: Format, args: &SolverArgs) -> Outcome {
    let s = settings(args)?;
    let cfg = s.solver();
    let (method, coefficients, result) = match method {
        MethodArg::Sdp => {
            check_instance(n, d, SDP_MAX_N)?;
            let prob = build_sdp_mode(n, d, s.coefficients)?;
            let r = conic::solve(&prob.to_conic(), &cfg).map_err(foldcode::Error::from)?;
            (Method::Sdp, Some(s.coefficients.as_str().to_string()), r)
        }
        MethodArg::Delsarte => {
            check_instance(n, d, LP_MAX_N)?;
            (Method::DelsarteLp, None, delsarte_bound(n, d, &cfg)?)
        }
    };
    let rec = RunRecord::new(n, d, method, coefficients, &result, s.hash());
    match format {
        Format::Json => print_json(&rec),
        Format::Text => println!(
            "n={n} d={d} method={} bound={} objective={:.9} status={} iterations={} ms={}",
            method.as_str(),
            rec.bound,
            rec.objective,
            rec.status,
            rec.iterations,
            rec.wall_time_ms
        ),
    }
    if rec.status != Status::Optimal {
        eprintln!("solver stopped with status {}", rec.status);
    }
    Ok(status_code(rec.status == Status::Optimal))
}

#[derive(Serialize)]
struct TableReport<'a> {
    tool_version: &'static str,
    config_hash: String,
    coefficients: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    rows: &'a [table::Row],
}

#[allow(clippy::too_many_arguments)]
fn cmd_table(
    n_min: u32,
    n_max: u32,
    d_list: &[String],
    expected: bool,
    expected_file: Option<&PathBuf>,
    deterministic: bool,
    format: TableFormat,
    out: Option<&PathBuf>,
    args: &SolverArgs,
) -> Outcome {
    let s = settings(args)?;
    let ds: Vec<u32> = d_list
        .iter()
        .map(|v| v.trim())
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| usage(format!("bad distance {v:?}"))))
        .collect::<Result<_, _>>()?;
    if ds.is_empty() {
        return Err(usage("empty distance list"));
    }
    if n_min > n_max || n_min < MIN_N || n_max > SDP_MAX_N {
        return Err(usage(format!(
            "n range {n_min}..={n_max} must lie within {MIN_N}..={SDP_MAX_N}"
        )));
    }
    let jobs: Vec<(u32, u32)> = (n_min..=n_max)
        .flat_map(|n| {
            ds.iter()
                .filter(move |&&d| d >= 1 && d <= diameter(n))
                .map(move |&d| (n, d))
        })
        .collect();
    if jobs.is_empty() {
        return Err(usage("no (n, d) pair with 1 <= d <= n/2"));
    }
    let table_text = match expected_file {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => expected.then(|| table::BUNDLED_EXPECTED.to_string()),
    };
    let known = table_text
        .map(|t| table::parse_expected(&t).map_err(usage))
        .transpose()?;

    let mut rows = table::solve_rows(&jobs, s.coefficients, &s.solver(), s.workers)?;
    for r in &mut rows {
        if deterministic {
            r.sdp_ms = None;
            r.lp_ms = None;
        }
        if let Some(k) = &known {
            r.expected = k.get(&(r.n, r.d)).copied();
        }
    }
    let text = match format {
        TableFormat::Csv => table::to_csv(&rows, known.is_some()),
        TableFormat::Json => {
            let report = TableReport {
                tool_version: TOOL_VERSION,
                config_hash: s.hash(),
                coefficients: s.coefficients.as_str(),
                timestamp: (!deterministic).then(timestamp),
                rows: &rows,
            };
            serde_json::to_string_pretty(&report).expect("serializable") + "\n"
        }
    };
    write_out(out, &text)?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.optimal())
        .map(|r| format!("n={} d={}", r.n, r.d))
        .collect();
    if !bad.is_empty() {
        eprintln!("non-optimal solves: {}", bad.join(", "));
    }
    Ok(status_code(bad.is_empty()))
}

#[derive(Serialize)]
struct VerifyOutput {
    tool_version: &'static str,
    timestamp: String,
    report: foldcode::oracle::AuditReport,
}

fn cmd_verify(n: u32, format: Format) -> Outcome {
    if !(MIN_N..=VERIFY_MAX_N).contains(&n) {
        return Err(usage(format!("n = {n} outside {MIN_N}..={VERIFY_MAX_N}")));
    }
    let report = audit(n)?;
    let passed = report.passed;
    match format {
        Format::Json => print_json(&VerifyOutput {
            tool_version: TOOL_VERSION,
            timestamp: timestamp(),
            report,
        }),
        Format::Text => {
            let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
            for c in &report.identities.checks {
                println!(
                    "{} identity {} ({} instances, max residual {:e})",
                    mark(c.passed),
                    c.name,
                    c.instances,
                    c.max_residual
                );
                if let Some(ce) = &c.counterexample {
                    println!("    counterexample {ce}");
                }
            }
            println!(
                "{} index set size {} (formula {})",
                mark(report.index_set_size as u64 == report.index_set_formula),
                report.index_set_size,
                report.index_set_formula
            );
            for l in &report.level_dimensions {
                println!(
                    "{} dim L_{} = {} (formula {})",
                    mark(l.measured.to_string() == l.formula),
                    l.r,
                    l.measured,
                    l.formula
                );
            }
            println!(
                "{} {} columns for {} vertices, off-block residual {:e}",
                mark(
                    report.columns as u64 == report.vertices
                        && report.max_off_block < foldcode::oracle::OFF_BLOCK_TOL
                ),
                report.columns,
                report.vertices,
                report.max_off_block
            );
            println!(
                "{} block coefficients: {} tuples, {} mismatches",
                mark(report.beta_mismatches.is_empty()),
                report.beta_tuples,
                report.beta_mismatches.len()
            );
            for m in &report.beta_mismatches {
                println!(
                    "    (r,i,j,t) = ({},{},{},{}): closed form {}, oracle {}",
                    m.r,
                    m.i,
                    m.j,
                    m.t,
                    m.closed_form.as_deref().unwrap_or("missing"),
                    m.oracle
                );
            }
        }
    }
    Ok(status_code(passed))
}

#[derive(Serialize)]
struct ExportOutput {
    tool_version: &'static str,
    coefficients: &'static str,
    path: String,
    bytes: usize,
    problem: foldcode::model::ProblemSummary,
}

fn cmd_export(n: u32, d: u32, out: &PathBuf, args: &SolverArgs) -> Outcome {
    let s = settings(args)?;
    check_instance(n, d, SDP_MAX_N)?;
    let prob = build_sdp_mode(n, d, s.coefficients)?;
    let text = export_sdpa(&prob);
    write_out(Some(out), &text)?;
    print_json(&ExportOutput {
        tool_version: TOOL_VERSION,
        coefficients: s.coefficients.as_str(),
        path: out.display().to_string(),
        bytes: text.len(),
        problem: prob.summary(),
    });
    Ok(ExitCode::SUCCESS)
}

fn cmd_beta(n: u32, args: &SolverArgs) -> Outcome {
    let s = settings(args)?;
    if !(MIN_N..=SDP_MAX_N).contains(&n) {
        return Err(usage(format!("n = {n} outside {MIN_N}..={SDP_MAX_N}")));
    }
    let table = match s.coefficients {
        Coefficients::Exact => foldcode::coefficients::beta_table(n)?,
        Coefficients::Literal => {
            foldcode::coefficients::beta_table_with(n, foldcode::coefficients::beta_even_literal)?
        }
    };
    print!("{}", table.to_csv());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Bound {
            n,
            d,
            method,
            format,
            solver,
        } => cmd_bound(n, d, method, format, &solver),
        Command::Table {
            n_min,
            n_max,
            d,
            expected,
            expected_file,
            deterministic,
            format,
            out,
            solver,
        } => cmd_table(
            n_min,
            n_max,
            &d,
            expected,
            expected_file.as_ref(),
            deterministic,
            format,
            out.as_ref(),
            &solver,
        ),
        Command::Verify { n, format } => cmd_verify(n, format),
        Command::Export { n, d, out, solver } => cmd_export(n, d, &out, &solver),
        Command::Beta { n, solver } => cmd_beta(n, &solver),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Unsuccessful(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
