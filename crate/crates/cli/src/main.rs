//! `dualmink` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O, parse or usage error, 2 invalid measure,
//! 3 not converged (or residual above tolerance in `check`), 4 invalid body,
//! 5 normal sets differ, 6 generation failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualmink::generate::{random_body, random_measure, GenSpec};
use dualmink::io::{read_body, read_json, read_measure, write_body, write_json, write_measure, FileError};
use dualmink::quadrature::{build_rule_with, RuleKind};
use dualmink::solver::{bound_check, residual, solve, uniqueness_probe, SolverConfig, SolverReport, Status};
use dualmink::{dual_curvature, dual_volume, Error};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "dualmink",
    version,
    about = "Dual curvature measures and the dual Minkowski problem for q < 0"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the polytope whose dual curvature measure is the given measure.
    Solve(SolveArgs),
    /// Write the dual curvature measure of a body as a measure file.
    Measure(MeasureArgs),
    /// Certify that a body solves the problem for a measure.
    Check(CheckArgs),
    /// Generate a random valid measure or body.
    Gen(GenArgs),
    /// Rerun the command recorded in a run manifest.
    Replay { manifest: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RuleArg {
    Geodesic,
    Facet,
}

impl From<RuleArg> for RuleKind {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Geodesic => RuleKind::Geodesic,
            RuleArg::Facet => RuleKind::Facet,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    /// Measure file.
    measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 2)]
    quad_level: usize,
    /// Number of starts; more than one also reports the spread of the solutions.
    #[arg(long, default_value_t = 1)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sphere rule used in three dimensions.
    #[arg(long, value_enum, default_value_t = RuleArg::Facet)]
    rule: RuleArg,
    /// Body file to write.
    #[arg(long)]
    out: PathBuf,
    /// Report file, by default next to the body.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run manifest file, by default next to the body.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MeasureArgs {
    /// Body file.
    body: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    #[arg(long, default_value_t = 2)]
    quad_level: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Facet)]
    rule: RuleArg,
    /// Measure file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-facet masses with the total and rule error.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CheckArgs {
    measure: PathBuf,
    body: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 2)]
    quad_level: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Facet)]
    rule: RuleArg,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Measure,
    Body,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Close the instance under the antipodal map.
    #[arg(long)]
    symmetric: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    command: String,
    /// Full argument vector; `dualmink replay` reruns it.
    argv: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    config: serde_json::Value,
    version: String,
    seed: Option<u64>,
    threads: usize,
    timings: Timings,
    exit_code: u8,
}

#[derive(Debug, Serialize, Deserialize)]
struct Timings {
    total_seconds: f64,
}

#[derive(Serialize)]
struct SolveOutput {
    q: f64,
    #[serde(flatten)]
    report: SolverReport,
    starts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    uniqueness_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<f64>>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

/// Maps a file error to exit code 1, or `invalid` when the content parsed but
/// failed validation.
fn file_failure(e: FileError, invalid: u8) -> Failure {
    match e {
        FileError::Invalid { .. } => Failure::new(invalid, e.to_string()),
        _ => Failure::new(1, e.to_string()),
    }
}

fn lib_failure(e: Error) -> Failure {
    let code = match e {
        Error::HemisphereConcentrated { .. } | Error::InvalidMeasure(_) => 2,
        Error::InvalidBody(_) | Error::UnboundedWulff { .. } => 4,
        Error::ShapeMismatch(_) => 5,
        Error::GenerationFailed { .. } => 6,
        _ => 1,
    };
    Failure::new(code, e.to_string())
}

/// `body.json` → `body.<tag>.json`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}.json"))
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

/// What a finished command reports for its manifest.
struct Outcome {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    manifest: Option<PathBuf>,
    seed: Option<u64>,
    config: serde_json::Value,
    result: Result<(), Failure>,
}

fn config_of<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn cmd_solve(a: &SolveArgs) -> Outcome {
    let report_path = a.report.clone().unwrap_or_else(|| sibling(&a.out, "report"));
    let mut outcome = Outcome {
        inputs: vec![a.measure.clone()],
        outputs: vec![a.out.clone(), report_path.clone()],
        manifest: Some(a.manifest.clone().unwrap_or_else(|| sibling(&a.out, "manifest"))),
        seed: Some(a.seed),
        config: config_of(a),
        result: Ok(()),
    };
    outcome.result = (|| {
        let mu = read_measure(&a.measure).map_err(|e| file_failure(e, 2))?;
        let cfg = SolverConfig {
            q: a.q,
            tol: a.tol,
            max_iter: a.max_iter,
            quad_level: a.quad_level,
            starts: a.starts,
            seed: a.seed,
            rule: a.rule.into(),
            ..SolverConfig::default()
        };
        cfg.validate().map_err(lib_failure)?;
        let solved = if a.starts > 1 {
            uniqueness_probe(&mu, &cfg).map(|probe| {
                let (p, r) = probe.solutions.into_iter().next().expect("at least one start");
                (p, r, Some(probe.max_distance))
            })
        } else {
            solve(&mu, &cfg).map(|(p, r)| (p, r, None))
        };
        let (body, report, spread) = match solved {
            Ok(v) => v,
            Err(Error::HemisphereConcentrated { witness }) => {
                let out = SolveOutput {
                    q: a.q,
                    report: SolverReport {
                        status: Status::InvalidMeasure,
                        iterations: 0,
                        phi_trace: Vec::new(),
                        residual: f64::NAN,
                        bound_m: f64::NAN,
                        bound_satisfied: false,
                    },
                    starts: a.starts,
                    uniqueness_distance: None,
                    witness: Some(witness.clone()),
                };
                write_json(&report_path, &out).map_err(|e| file_failure(e, 1))?;
                return Err(lib_failure(Error::HemisphereConcentrated { witness }));
            }
            Err(e) => return Err(lib_failure(e)),
        };
        write_body(&a.out, &body).map_err(|e| file_failure(e, 1))?;
        let status = report.status;
        println!("status      {status:?}");
        println!("iterations  {}", report.iterations);
        println!("residual    {:.3e}", report.residual);
        println!(
            "bound_M     {:.6e} ({})",
            report.bound_m,
            if report.bound_satisfied {
                "satisfied"
            } else {
                "violated"
            }
        );
        if let Some(d) = spread {
            println!("spread      {d:.3e} over {} starts", a.starts);
        }
        let out = SolveOutput {
            q: a.q,
            report,
            starts: a.starts,
            uniqueness_distance: spread,
            witness: None,
        };
        write_json(&report_path, &out).map_err(|e| file_failure(e, 1))?;
        match status {
            Status::Converged => Ok(()),
            _ => Err(Failure::new(
                3,
                format!(
                    "not converged: residual {:.3e} above tolerance {:e}",
                    out.report.residual, a.tol
                ),
            )),
        }
    })();
    outcome
}

fn cmd_measure(a: &MeasureArgs) -> Outcome {
    let mut outputs = vec![a.out.clone()];
    outputs.extend(a.record.clone());
    let mut outcome = Outcome {
        inputs: vec![a.body.clone()],
        outputs,
        manifest: Some(a.manifest.clone().unwrap_or_else(|| sibling(&a.out, "manifest"))),
        seed: None,
        config: config_of(a),
        result: Ok(()),
    };
    outcome.result = (|| {
        if !(a.q.is_finite() && a.q != 0.0) {
            return Err(Failure::new(
                1,
                format!("q must be finite and nonzero, got {}", a.q),
            ));
        }
        let body = read_body(&a.body).map_err(|e| file_failure(e, 4))?;
        let rule = build_rule_with(a.rule.into(), body.dim(), a.quad_level, &body).map_err(lib_failure)?;
        let dc = dual_curvature(&body, a.q, &rule).map_err(lib_failure)?;
        let mu = dc.to_measure().map_err(lib_failure)?;
        write_measure(&a.out, &mu).map_err(|e| file_failure(e, 1))?;
        if let Some(path) = &a.record {
            write_json(path, &dc.record()).map_err(|e| file_failure(e, 1))?;
        }
        println!("atoms       {} of {} facets", mu.len(), body.num_facets());
        println!("total       {:.17e}", dc.total);
        println!("rule_error  {:.3e}", dc.rule_error);
        Ok(())
    })();
    outcome
}

fn cmd_check(a: &CheckArgs) -> Outcome {
    let mut outcome = Outcome {
        inputs: vec![a.measure.clone(), a.body.clone()],
        outputs: Vec::new(),
        manifest: a.manifest.clone(),
        seed: None,
        config: config_of(a),
        result: Ok(()),
    };
    outcome.result = (|| {
        if !(a.q < 0.0 && a.q.is_finite()) {
            return Err(Failure::new(1, format!("q must be negative, got {}", a.q)));
        }
        let mu = read_measure(&a.measure).map_err(|e| file_failure(e, 2))?;
        let body = read_body(&a.body).map_err(|e| file_failure(e, 4))?;
        let rule = build_rule_with(a.rule.into(), body.dim(), a.quad_level, &body).map_err(lib_failure)?;
        let res = residual(&mu, &body, a.q, &rule).map_err(lib_failure)?;
        let bound = bound_check(&body, mu.total(), a.q, &rule).map_err(lib_failure)?;
        let v = dual_volume(&body, a.q, &rule).map_err(lib_failure)?;
        let certified = res <= a.tol;
        println!("residual      {res:.6e}");
        println!("bound_M       {:.6e}", bound.bound);
        println!("polar_radius  {:.6e}", bound.polar_radius);
        println!(
            "bound         {}",
            if bound.satisfied { "satisfied" } else { "violated" }
        );
        println!("mass_gap      {:.6e}", (v - mu.total()).abs() / mu.total());
        println!(
            "verdict       {}",
            if certified { "certified" } else { "not certified" }
        );
        if certified {
            Ok(())
        } else {
            Err(Failure::new(
                3,
                format!("residual {res:.3e} above tolerance {:e}", a.tol),
            ))
        }
    })();
    outcome
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    let mut outcome = Outcome {
        inputs: Vec::new(),
        outputs: vec![a.out.clone()],
        manifest: Some(a.manifest.clone().unwrap_or_else(|| sibling(&a.out, "manifest"))),
        seed: Some(a.seed),
        config: config_of(a),
        result: Ok(()),
    };
    outcome.result = (|| {
        let spec = GenSpec {
            dim: a.dim,
            m: a.m,
            symmetric: a.symmetric,
        };
        match a.kind {
            Kind::Measure => {
                let mu = random_measure(spec, a.seed).map_err(lib_failure)?;
                write_measure(&a.out, &mu).map_err(|e| file_failure(e, 1))
            }
            Kind::Body => {
                let p = random_body(spec, a.seed).map_err(lib_failure)?;
                write_body(&a.out, &p).map_err(|e| file_failure(e, 1))
            }
        }
    })();
    outcome
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Solve(_) => "solve",
        Command::Measure(_) => "measure",
        Command::Check(_) => "check",
        Command::Gen(_) => "gen",
        Command::Replay { .. } => "replay",
    }
}

fn run(argv: Vec<String>, depth: usize) -> u8 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Check(a) => cmd_check(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Replay { manifest } => {
            if depth > 0 {
                eprintln!("error: a manifest cannot replay another replay");
                return 1;
            }
            return match read_json::<RunManifest>(manifest) {
                Ok(m) => run(m.argv, depth + 1),
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            };
        }
    };
    let code = match &outcome.result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    if let Some(path) = &outcome.manifest {
        let manifest = RunManifest {
            command: command_name(&cli.command).into(),
            argv,
            inputs: outcome.inputs.iter().map(|p| show(p)).collect(),
            outputs: outcome
                .outputs
                .iter()
                .filter(|p| p.exists())
                .map(|p| show(p))
                .collect(),
            config: outcome.config,
            version: env!("CARGO_PKG_VERSION").into(),
            seed: outcome.seed,
            threads: rayon::current_num_threads(),
            timings: Timings {
                total_seconds: start.elapsed().as_secs_f64(),
            },
            exit_code: code,
        };
        if let Err(e) = write_json(path, &manifest) {
            eprintln!("error: {e}");
            return if code == 0 { 1 } else { code };
        }
    }
    code
}

fn main() -> ExitCode {
    if let Ok(t) = std::env::var("DUALMINK_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: DUALMINK_THREADS must be a positive integer, got {t:?}");
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::from(run(std::env::args().collect(), 0))
}
