//! Benchmark front end: solve one problem, tune the iteration parameter,
//! inspect the spectrum, reproduce a published table, or export a problem to
//! Matrix Market files.

mod alpha_table;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use scsplit::factor::{InnerSolveChoice, InnerSolveKind};
use scsplit::problems::{export_problem, Problem, ProblemSpec};
use scsplit::solver::{run, MethodKind, SolveReport, SolverConfig};
use scsplit::spectral::{
    generalized_eigs, grid_search_alpha, optimal_alpha, tscsp_spectral_radius, SpectrumCase,
};

/// Desk-scale size cap: grid parameter for examples 1-3, order/256^2 for
/// example 4. Larger runs need `--allow-large`.
const SIZE_CAP_M: usize = 256;
const SIZE_CAP_N: usize = 256 * 256;
const SYNTH_CAP: usize = 512;

#[derive(Parser)]
#[command(
    name = "scsplit",
    version,
    about = "Splitting iterations for complex symmetric systems (W + iT)z = b"
)]
struct Cli {
    /// JSON config file with defaults for tol, max_iter, inner, cg_tol,
    /// format and out_dir; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a problem and run one splitting method (or all five).
    Solve(SolveCmd),
    /// Grid-search the iteration parameter for minimal iteration count.
    Tune(TuneCmd),
    /// Generalized spectrum, optimal parameters, optional rho(alpha) curve.
    Spectrum(SpectrumCmd),
    /// Re-run a published results table at the stored parameters.
    #[command(name = "reproduce-table")]
    ReproduceTable(TableCmd),
    /// Write W, T, b and a JSON sidecar under a directory.
    Export(ExportCmd),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Benchmark example 1-4, or `synth` for a seeded random SPD pair.
    #[arg(long)]
    example: String,
    /// Grid parameter m for examples 1-3 (system order is m^2).
    #[arg(long)]
    m: Option<usize>,
    /// Matrix order n for example 4 and synth; accepts `32^2`-style values.
    #[arg(long, value_parser = parse_size)]
    n: Option<usize>,
    /// Time step for example 1 (default h = 1/(m+1)).
    #[arg(long)]
    tau: Option<f64>,
    /// Driving circular frequency for example 2 (default 4).
    #[arg(long)]
    omega: Option<f64>,
    /// Hysteretic damping coefficient for example 2 (default 0.02).
    #[arg(long, value_name = "MU")]
    mu_damp: Option<f64>,
    /// Off-diagonal parameter of W for example 4 (default 1.5).
    #[arg(long)]
    theta1: Option<f64>,
    /// Off-diagonal parameter of T for example 4 (default 0.2).
    #[arg(long)]
    theta2: Option<f64>,
    /// Seed for synth problems.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Allow sizes past the desk-scale cap (m > 256 / n > 256^2).
    #[arg(long)]
    allow_large: bool,
}

/// What the problem flags selected.
#[derive(Clone)]
enum Selection {
    Spec(ProblemSpec),
    Synth { order: usize, seed: u64 },
}

impl Selection {
    fn build(&self) -> Result<Problem, CliError> {
        match self {
            Selection::Spec(spec) => Ok(spec.build()?),
            Selection::Synth { order, seed } => Ok(synth::synthetic_problem(*order, *seed)),
        }
    }

    fn example_json(&self) -> serde_json::Value {
        match self {
            Selection::Spec(spec) => json!(spec.example_id()),
            Selection::Synth { .. } => json!("synth"),
        }
    }

    fn label(&self) -> String {
        match self {
            Selection::Spec(spec) => format!(
                "example {} (n = {})",
                spec.example_id(),
                spec.dimension()
            ),
            Selection::Synth { order, seed } => format!("synth (n = {order}, seed {seed})"),
        }
    }

    fn paper_key(&self) -> Option<(u8, usize)> {
        match self {
            Selection::Spec(spec) => Some((spec.example_id(), spec.size_param())),
            Selection::Synth { .. } => None,
        }
    }
}

impl ProblemArgs {
    fn spec_for_size(&self, size: usize) -> Result<ProblemSpec, CliError> {
        let example: u8 = match self.example.as_str() {
            "1" => 1,
            "2" => 2,
            "3" => 3,
            "4" => 4,
            other => {
                return Err(CliError::new(format!(
                    "--sizes applies to examples 1-4, got `{other}`"
                )))
            }
        };
        if example <= 3 {
            if size > SIZE_CAP_M && !self.allow_large {
                return Err(CliError::new(format!(
                    "m = {size} exceeds the desk-scale cap {SIZE_CAP_M}; pass --allow-large"
                )));
            }
        } else if size > SIZE_CAP_N && !self.allow_large {
            return Err(CliError::new(format!(
                "n = {size} exceeds the desk-scale cap {SIZE_CAP_N}; pass --allow-large"
            )));
        }
        Ok(match example {
            1 => ProblemSpec::Ex1 {
                m: size,
                tau: self.tau.unwrap_or(1.0 / (size as f64 + 1.0)),
            },
            2 => ProblemSpec::Ex2 {
                m: size,
                omega: self.omega.unwrap_or(4.0),
                mu_damp: self.mu_damp.unwrap_or(0.02),
            },
            3 => ProblemSpec::Ex3 { m: size },
            _ => ProblemSpec::Ex4 {
                n: size,
                theta1: self.theta1.unwrap_or(1.5),
                theta2: self.theta2.unwrap_or(0.2),
            },
        })
    }

    fn selection(&self) -> Result<Selection, CliError> {
        match self.example.as_str() {
            "1" | "2" | "3" => {
                let m = self
                    .m
                    .ok_or_else(|| CliError::new("--m is required for examples 1-3"))?;
                Ok(Selection::Spec(self.spec_for_size(m)?))
            }
            "4" => {
                let n = self
                    .n
                    .ok_or_else(|| CliError::new("--n is required for example 4"))?;
                Ok(Selection::Spec(self.spec_for_size(n)?))
            }
            "synth" => {
                let order = self.n.or(self.m).ok_or_else(|| {
                    CliError::new("--n (order) is required for synth problems")
                })?;
                if order > SYNTH_CAP {
                    return Err(CliError::new(format!(
                        "synth order {order} exceeds the cap {SYNTH_CAP}"
                    )));
                }
                Ok(Selection::Synth {
                    order,
                    seed: self.seed,
                })
            }
            other => Err(CliError::new(format!(
                "--example must be 1-4 or synth, got `{other}`"
            ))),
        }
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Method: tscsp, scsp, mhss, pmhss, gsor, or all.
    #[arg(long, default_value = "tscsp")]
    method: String,
    /// Iteration parameter: a number, `paper`, `grid`, or `theoretical`.
    #[arg(long, default_value = "paper", allow_hyphen_values = true)]
    alpha: String,
    /// Relative-residual stopping tolerance (default 1e-6).
    #[arg(long)]
    tol: Option<f64>,
    /// Outer iteration cap (default 5000).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Inner solver for the SPD subsystems (default cholesky).
    #[arg(long, value_enum)]
    inner: Option<InnerArg>,
    /// CG relative tolerance (default 1e-12).
    #[arg(long)]
    cg_tol: Option<f64>,
    /// Alpha grid as lo:hi:step (default 0.01:2.5:0.01).
    #[arg(long)]
    grid: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum InnerArg {
    Cholesky,
    Cg,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Markdown,
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this path instead of stdout (joined with the default output
    /// directory when relative).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Include the residual history in JSON output.
    #[arg(long)]
    history: bool,
}

#[derive(Args)]
struct TuneCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SpectrumCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Also evaluate rho(G_alpha) on this grid (lo:hi:step) for plotting.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct TableCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Sizes to run: m values for examples 1-3, n values (or `32^2` forms)
    /// for example 4.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_size)]
    sizes: Vec<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ExportCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Target directory (default: $SCSPLIT_OUT_DIR or . , plus
    /// `example<id>-<size>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    message: String,
}

impl CliError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

impl From<scsplit::Error> for CliError {
    fn from(e: scsplit::Error) -> Self {
        let message = match &e {
            scsplit::Error::OracleCapExceeded { n, cap } => format!(
                "order {n} exceeds the dense-oracle cap {cap}; use a smaller size for spectral commands"
            ),
            other => other.to_string(),
        };
        Self { message }
    }
}

#[derive(Default, serde::Deserialize)]
struct FileConfig {
    tol: Option<f64>,
    max_iter: Option<usize>,
    inner: Option<String>,
    cg_tol: Option<f64>,
    format: Option<String>,
    out_dir: Option<PathBuf>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let raw = std::fs::read_to_string(p)
                .map_err(|e| CliError::new(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&raw)
                .map_err(|e| CliError::new(format!("bad config {}: {e}", p.display())))
        }
    }
}

fn parse_size(s: &str) -> Result<usize, String> {
    let t = s.trim();
    if let Some((base, exp)) = t.split_once('^') {
        let b: usize = base.trim().parse().map_err(|_| format!("bad size `{s}`"))?;
        let e: u32 = exp.trim().parse().map_err(|_| format!("bad size `{s}`"))?;
        b.checked_pow(e).ok_or_else(|| format!("size `{s}` overflows"))
    } else {
        t.parse().map_err(|_| format!("bad size `{s}`"))
    }
}

fn parse_grid(s: &Option<String>) -> Result<(f64, f64, f64), CliError> {
    match s {
        None => Ok((0.01, 2.5, 0.01)),
        Some(raw) => {
            let parts: Vec<&str> = raw.split(':').collect();
            if parts.len() != 3 {
                return Err(CliError::new(format!("--grid expects lo:hi:step, got `{raw}`")));
            }
            let lo: f64 = parts[0].parse().map_err(|_| CliError::new("bad grid lo"))?;
            let hi: f64 = parts[1].parse().map_err(|_| CliError::new("bad grid hi"))?;
            let step: f64 = parts[2].parse().map_err(|_| CliError::new("bad grid step"))?;
            Ok((lo, hi, step))
        }
    }
}

fn parse_methods(s: &str) -> Result<Vec<MethodKind>, CliError> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(MethodKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(part.trim().parse::<MethodKind>().map_err(CliError::from)?);
    }
    Ok(out)
}

fn resolve_inner(args: &SolverArgs, config: &FileConfig) -> Result<InnerSolveChoice, CliError> {
    let kind = match (&args.inner, config.inner.as_deref()) {
        (Some(InnerArg::Cholesky), _) => InnerSolveKind::DirectCholesky,
        (Some(InnerArg::Cg), _) => InnerSolveKind::ConjugateGradient,
        (None, Some("cholesky")) | (None, None) => InnerSolveKind::DirectCholesky,
        (None, Some("cg")) => InnerSolveKind::ConjugateGradient,
        (None, Some(other)) => {
            return Err(CliError::new(format!("config inner must be cholesky|cg, got {other}")))
        }
    };
    let mut choice = InnerSolveChoice {
        kind,
        ..InnerSolveChoice::default()
    };
    if let Some(t) = args.cg_tol.or(config.cg_tol) {
        choice.cg_tolerance = t;
    }
    Ok(choice)
}

fn base_config(
    method: MethodKind,
    args: &SolverArgs,
    config: &FileConfig,
) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::new(method, 1.0);
    cfg.tolerance = args.tol.or(config.tol).unwrap_or(1e-6);
    cfg.max_iterations = args.max_iter.or(config.max_iter).unwrap_or(5000);
    cfg.inner = resolve_inner(args, config)?;
    Ok(cfg)
}

enum AlphaSource {
    Explicit(f64),
    Paper,
    Grid,
    Theoretical,
}

fn parse_alpha(s: &str) -> Result<AlphaSource, CliError> {
    match s {
        "paper" => Ok(AlphaSource::Paper),
        "grid" => Ok(AlphaSource::Grid),
        "theoretical" => Ok(AlphaSource::Theoretical),
        other => other
            .parse::<f64>()
            .map(AlphaSource::Explicit)
            .map_err(|_| {
                CliError::new(format!(
                    "--alpha must be a number, `paper`, `grid` or `theoretical`, got `{other}`"
                ))
            }),
    }
}

/// Pick the iteration parameter for one (problem, method) pair. Returns the
/// value and a short provenance label.
fn resolve_alpha(
    source: &AlphaSource,
    selection: &Selection,
    problem: &Problem,
    method: MethodKind,
    base: &SolverConfig,
    grid: (f64, f64, f64),
) -> Result<(f64, &'static str), CliError> {
    match source {
        AlphaSource::Explicit(a) => {
            if *a <= 0.0 {
                return Err(CliError::new(format!("alpha must be positive, got {a}")));
            }
            Ok((*a, "explicit"))
        }
        AlphaSource::Paper => {
            if let Some((example, size)) = selection.paper_key() {
                if let Some(row) = alpha_table::lookup(example, method, size) {
                    return Ok((row.alpha, "paper"));
                }
            }
            eprintln!(
                "warning: no stored parameter for {} on {}; falling back to grid search",
                method.label(),
                selection.label()
            );
            let a = tune(problem, method, base, grid)?.best_alpha;
            Ok((a, "grid (paper value missing)"))
        }
        AlphaSource::Grid => {
            let a = tune(problem, method, base, grid)?.best_alpha;
            Ok((a, "grid"))
        }
        AlphaSource::Theoretical => {
            if method != MethodKind::Tscsp {
                return Err(CliError::new(
                    "--alpha theoretical is available for tscsp only (the closed form targets the two-step iteration)",
                ));
            }
            let mus = generalized_eigs(&problem.w, &problem.t)?;
            let info = optimal_alpha(&mus)?;
            Ok((info.alpha_opt_minus, "theoretical"))
        }
    }
}

fn tune(
    problem: &Problem,
    method: MethodKind,
    base: &SolverConfig,
    (lo, hi, step): (f64, f64, f64),
) -> Result<scsplit::TuneResult, CliError> {
    let mut cfg = base.clone();
    cfg.method = method;
    // Cap per-point work during the search; the final run uses the real cap.
    cfg.max_iterations = base.max_iterations.min(500);
    Ok(grid_search_alpha(problem, &cfg, lo, hi, step)?)
}

fn emit(text: &str, out: &Option<PathBuf>, config: &FileConfig) -> Result<(), CliError> {
    match resolve_out(out, config) {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| CliError::new(format!("cannot create {}: {e}", parent.display())))?;
                }
            }
            std::fs::write(&path, format!("{text}\n"))
                .map_err(|e| CliError::new(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn default_out_dir(config: &FileConfig) -> PathBuf {
    std::env::var_os("SCSPLIT_OUT_DIR")
        .map(PathBuf::from)
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve_out(out: &Option<PathBuf>, config: &FileConfig) -> Option<PathBuf> {
    out.as_ref().map(|p| {
        if p.is_absolute() {
            p.clone()
        } else {
            default_out_dir(config).join(p)
        }
    })
}

fn resolve_format(args: &OutputArgs, config: &FileConfig) -> Format {
    if let Some(f) = args.format {
        return f;
    }
    match config.format.as_deref() {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => Format::Markdown,
    }
}

fn print_error(format: Format, err: &CliError) {
    match format {
        Format::Json => println!("{}", json!({ "error": err.message })),
        _ => eprintln!("error: {}", err.message),
    }
}

fn case_label(case: SpectrumCase) -> &'static str {
    match case {
        SpectrumCase::AllBelowOne => "all-below-one",
        SpectrumCase::AllAboveOne => "all-above-one",
        SpectrumCase::Straddling => "straddling",
    }
}

/// yyyy-mm-dd from the system clock (days-to-civil conversion).
fn today() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = (secs / 86_400) as i64;
    let mut z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    z -= era * 146_097;
    let doe = z;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    format!("{y:04}-{m:02}-{d:02}")
}

fn report_json(
    selection: &Selection,
    method: MethodKind,
    alpha: f64,
    n: usize,
    report: &SolveReport,
    history: bool,
) -> serde_json::Value {
    let mut v = json!({
        "example": selection.example_json(),
        "method": method.name(),
        "alpha": alpha,
        "n": n,
        "iterations": report.iterations,
        "converged": report.converged,
        "final_relres": report.final_relative_residual,
        "seconds": report.setup_seconds + report.iterate_seconds,
    });
    if history {
        v["residual_history"] = json!(report.residual_history);
    }
    v
}

fn cmd_solve(cmd: SolveCmd, config: &FileConfig) -> ExitCode {
    let format = resolve_format(&cmd.output, config);
    match solve_impl(&cmd, config, format) {
        Ok(all_converged) => {
            if all_converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            print_error(format, &e);
            ExitCode::from(2)
        }
    }
}

fn solve_impl(cmd: &SolveCmd, config: &FileConfig, format: Format) -> Result<bool, CliError> {
    let selection = cmd.problem.selection()?;
    let methods = parse_methods(&cmd.solver.method)?;
    let alpha_source = parse_alpha(&cmd.solver.alpha)?;
    let grid = parse_grid(&cmd.solver.grid)?;
    let problem = selection.build()?;
    let mut lines = Vec::new();
    let mut json_rows = Vec::new();
    let mut all_converged = true;
    for method in &methods {
        let mut cfg = base_config(*method, &cmd.solver, config)?;
        let (alpha, source) =
            resolve_alpha(&alpha_source, &selection, &problem, *method, &cfg, grid)?;
        cfg.alpha = alpha;
        cfg.record_history = cmd.history || format == Format::Json;
        let report = run(&problem, &cfg)?;
        all_converged &= report.converged;
        match format {
            Format::Markdown => {
                lines.push(format!(
                    "{}  method {}  alpha {} ({source})",
                    selection.label(),
                    method.label(),
                    alpha
                ));
                lines.push(format!("iterations: {}", report.iterations));
                lines.push(format!("converged: {}", report.converged));
                if report.diverged {
                    lines.push("diverged: true".into());
                }
                lines.push(format!(
                    "final relative residual: {:.3e}",
                    report.final_relative_residual
                ));
                lines.push(format!(
                    "setup {:.2} s, iterate {:.2} s",
                    report.setup_seconds, report.iterate_seconds
                ));
                lines.push(String::new());
            }
            Format::Csv => {
                if lines.is_empty() {
                    lines.push("example,method,alpha,n,iterations,converged,final_relres,seconds".into());
                }
                lines.push(format!(
                    "{},{},{},{},{},{},{:e},{:.4}",
                    match &selection {
                        Selection::Spec(s) => s.example_id().to_string(),
                        Selection::Synth { .. } => "synth".into(),
                    },
                    method.name(),
                    alpha,
                    problem.n,
                    report.iterations,
                    report.converged,
                    report.final_relative_residual,
                    report.setup_seconds + report.iterate_seconds,
                ));
            }
            Format::Json => {
                json_rows.push(report_json(
                    &selection,
                    *method,
                    alpha,
                    problem.n,
                    &report,
                    cmd.history,
                ));
            }
        }
    }
    let text = match format {
        Format::Json => {
            if json_rows.len() == 1 {
                serde_json::to_string_pretty(&json_rows[0]).unwrap()
            } else {
                serde_json::to_string_pretty(&json_rows).unwrap()
            }
        }
        _ => lines.join("\n").trim_end().to_string(),
    };
    emit(&text, &cmd.output.out, config)?;
    Ok(all_converged)
}

fn cmd_tune(cmd: TuneCmd, config: &FileConfig) -> ExitCode {
    let format = resolve_format(&cmd.output, config);
    match tune_impl(&cmd, config, format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            print_error(format, &e);
            ExitCode::from(2)
        }
    }
}

fn tune_impl(cmd: &TuneCmd, config: &FileConfig, format: Format) -> Result<(), CliError> {
    let selection = cmd.problem.selection()?;
    let methods = parse_methods(&cmd.solver.method)?;
    let grid = parse_grid(&cmd.solver.grid)?;
    let problem = selection.build()?;
    let mut lines = Vec::new();
    let mut json_rows = Vec::new();
    for method in &methods {
        let base = base_config(*method, &cmd.solver, config)?;
        let result = tune(&problem, *method, &base, grid)?;
        match format {
            Format::Markdown => {
                lines.push(format!("{}  method {}", selection.label(), method.label()));
                lines.push(format!("best alpha: {}", result.best_alpha));
                lines.push(format!("best iterations: {}", result.best_iterations));
                lines.push(format!(
                    "grid: {}:{}:{} ({} points)",
                    grid.0,
                    grid.1,
                    grid.2,
                    result.grid.len()
                ));
                lines.push(String::new());
            }
            Format::Csv => {
                if lines.is_empty() {
                    lines.push("method,alpha,iterations".into());
                }
                for (a, iters) in &result.grid {
                    lines.push(format!("{},{a},{iters}", method.name()));
                }
            }
            Format::Json => {
                json_rows.push(json!({
                    "example": selection.example_json(),
                    "method": method.name(),
                    "best_alpha": result.best_alpha,
                    "best_iterations": result.best_iterations,
                    "grid": result.grid,
                }));
            }
        }
    }
    let text = match format {
        Format::Json => {
            if json_rows.len() == 1 {
                serde_json::to_string_pretty(&json_rows[0]).unwrap()
            } else {
                serde_json::to_string_pretty(&json_rows).unwrap()
            }
        }
        _ => lines.join("\n").trim_end().to_string(),
    };
    emit(&text, &cmd.output.out, config)
}

fn cmd_spectrum(cmd: SpectrumCmd, config: &FileConfig) -> ExitCode {
    let format = resolve_format(&cmd.output, config);
    match spectrum_impl(&cmd, config, format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            print_error(format, &e);
            ExitCode::from(2)
        }
    }
}

fn spectrum_impl(cmd: &SpectrumCmd, config: &FileConfig, format: Format) -> Result<(), CliError> {
    let selection = cmd.problem.selection()?;
    let problem = selection.build()?;
    let mus = generalized_eigs(&problem.w, &problem.t)?;
    let info = optimal_alpha(&mus)?;
    let product = info.alpha_opt_minus * info.alpha_opt_plus;
    if (product - 1.0).abs() > 1e-12 {
        return Err(CliError::new(format!(
            "optimal parameters fail the reciprocal-root identity: product {product}"
        )));
    }
    let curve: Option<Vec<(f64, f64)>> = match &cmd.grid {
        None => None,
        Some(_) => {
            let (lo, hi, step) = parse_grid(&cmd.grid)?;
            let mut pts = Vec::new();
            let mut k = 0usize;
            loop {
                let a = lo + step * k as f64;
                if a > hi + step * 1e-9 {
                    break;
                }
                pts.push((a, tscsp_spectral_radius(&mus, a)?));
                k += 1;
            }
            Some(pts)
        }
    };
    let text = match format {
        Format::Json => {
            let mut v = json!({
                "example": selection.example_json(),
                "n": problem.n,
                "mu_min": info.mus[0],
                "mu_max": info.mus[info.mus.len() - 1],
                "case": case_label(info.case),
                "gamma": info.gamma,
                "delta": info.delta,
                "eta": info.eta,
                "alpha_opt_minus": info.alpha_opt_minus,
                "alpha_opt_plus": info.alpha_opt_plus,
                "rho_opt": info.rho_opt,
            });
            if let Some(c) = &curve {
                v["curve"] = json!(c);
            }
            serde_json::to_string_pretty(&v).unwrap()
        }
        Format::Csv => {
            let mut lines = vec!["alpha,rho".to_string()];
            if let Some(c) = &curve {
                for (a, r) in c {
                    lines.push(format!("{a},{r}"));
                }
            } else {
                lines.push(format!("{},{}", info.alpha_opt_minus, info.rho_opt));
                lines.push(format!("{},{}", info.alpha_opt_plus, info.rho_opt));
            }
            lines.join("\n")
        }
        Format::Markdown => {
            let mut lines = vec![
                selection.label(),
                format!(
                    "mu_min {:.6}, mu_max {:.6}, case {}",
                    info.mus[0],
                    info.mus[info.mus.len() - 1],
                    case_label(info.case)
                ),
                format!(
                    "gamma {:.6}, delta {:.6}, eta {:.6}",
                    info.gamma, info.delta, info.eta
                ),
                format!(
                    "alpha_opt- {:.6}, alpha_opt+ {:.6} (product {:.12})",
                    info.alpha_opt_minus, info.alpha_opt_plus, product
                ),
                format!("rho_opt {:.6}", info.rho_opt),
            ];
            if let Some(c) = &curve {
                lines.push(format!("rho(alpha) curve: {} points (use --format csv to dump)", c.len()));
            }
            lines.join("\n")
        }
    };
    emit(&text, &cmd.output.out, config)
}

/// One table cell; `None` marks a failed run, rendered as a dagger.
struct Cell {
    alpha: Option<f64>,
    iterations: Option<usize>,
    converged: bool,
    seconds: f64,
}

fn cmd_table(cmd: TableCmd, config: &FileConfig) -> ExitCode {
    let format = resolve_format(&cmd.output, config);
    match table_impl(&cmd, config, format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            print_error(format, &e);
            ExitCode::from(2)
        }
    }
}

fn table_impl(cmd: &TableCmd, config: &FileConfig, format: Format) -> Result<(), CliError> {
    if cmd.sizes.is_empty() {
        return Err(CliError::new("--sizes must list at least one size"));
    }
    let methods = parse_methods(&cmd.solver.method)?;
    let alpha_source = parse_alpha(&cmd.solver.alpha)?;
    let grid = parse_grid(&cmd.solver.grid)?;
    let example: u8 = cmd
        .problem
        .example
        .parse()
        .map_err(|_| CliError::new("reproduce-table needs --example 1-4"))?;
    // Build each size once and share it across the method rows.
    let mut problems = Vec::new();
    for &size in &cmd.sizes {
        let spec = cmd.problem.spec_for_size(size)?;
        problems.push((size, Selection::Spec(spec), spec.build()?));
    }
    let inner_label = match resolve_inner(&cmd.solver, config)?.kind {
        InnerSolveKind::DirectCholesky => "cholesky",
        InnerSolveKind::ConjugateGradient => "cg",
    };
    let tolerance = cmd.solver.tol.or(config.tol).unwrap_or(1e-6);
    let mut cells: Vec<Vec<Cell>> = Vec::new(); // [method][size]
    for method in &methods {
        let mut row = Vec::new();
        for (_, selection, problem) in &problems {
            let cell = (|| -> Result<Cell, CliError> {
                let mut cfg = base_config(*method, &cmd.solver, config)?;
                let (alpha, _) =
                    resolve_alpha(&alpha_source, selection, problem, *method, &cfg, grid)?;
                cfg.alpha = alpha;
                let report = run(problem, &cfg)?;
                Ok(Cell {
                    alpha: Some(alpha),
                    iterations: report.converged.then_some(report.iterations),
                    converged: report.converged,
                    seconds: report.setup_seconds + report.iterate_seconds,
                })
            })();
            row.push(cell.unwrap_or(Cell {
                alpha: None,
                iterations: None,
                converged: false,
                seconds: 0.0,
            }));
        }
        cells.push(row);
    }
    let text = match format {
        Format::Markdown => {
            let mut lines = Vec::new();
            lines.push(format!(
                "## Example {example} (tolerance {tolerance:.0e}, inner {inner_label}, {})",
                today()
            ));
            lines.push(String::new());
            lines.push(
                "Timings are wall-clock seconds on this machine and are not comparable across hardware."
                    .to_string(),
            );
            lines.push(String::new());
            let size_label = if example <= 3 { "m" } else { "n" };
            let mut header = String::from("| Method | |");
            let mut rule = String::from("|---|---|");
            for (size, _, _) in &problems {
                header.push_str(&format!(" {size_label}={size} |"));
                rule.push_str("---|");
            }
            lines.push(header);
            lines.push(rule);
            for (mi, method) in methods.iter().enumerate() {
                let fmt_alpha = |c: &Cell| c.alpha.map_or("†".into(), |a| format!("{a}"));
                let fmt_iter = |c: &Cell| {
                    c.iterations
                        .map_or("†".into(), |i| format!("{i}"))
                };
                let fmt_cpu = |c: &Cell| {
                    if c.converged {
                        format!("{:.2}", c.seconds)
                    } else {
                        "†".into()
                    }
                };
                for (tag, f) in [
                    ("alpha", &fmt_alpha as &dyn Fn(&Cell) -> String),
                    ("Iter", &fmt_iter),
                    ("CPU", &fmt_cpu),
                ] {
                    let head = if tag == "alpha" { method.label() } else { "" };
                    let mut line = format!("| {head} | {tag} |");
                    for c in &cells[mi] {
                        line.push_str(&format!(" {} |", f(c)));
                    }
                    lines.push(line);
                }
                if matches!(alpha_source, AlphaSource::Paper) {
                    let mut line = String::from("| | published |");
                    for (size, _, _) in &problems {
                        let reference = alpha_table::lookup(example, *method, *size)
                            .map_or("†".into(), |r| r.paper_iterations.to_string());
                        line.push_str(&format!(" {reference} |"));
                    }
                    lines.push(line);
                }
            }
            lines.join("\n")
        }
        Format::Csv => {
            let mut lines = vec!["example,method,size,alpha,iterations,converged,seconds".to_string()];
            for (mi, method) in methods.iter().enumerate() {
                for (si, (size, _, _)) in problems.iter().enumerate() {
                    let c = &cells[mi][si];
                    lines.push(format!(
                        "{example},{},{size},{},{},{},{:.4}",
                        method.name(),
                        c.alpha.map_or(String::new(), |a| a.to_string()),
                        c.iterations.map_or(String::new(), |i| i.to_string()),
                        c.converged,
                        c.seconds
                    ));
                }
            }
            lines.join("\n")
        }
        Format::Json => {
            let mut rows = Vec::new();
            for (mi, method) in methods.iter().enumerate() {
                for (si, (size, _, _)) in problems.iter().enumerate() {
                    let c = &cells[mi][si];
                    rows.push(json!({
                        "example": example,
                        "method": method.name(),
                        "size": size,
                        "alpha": c.alpha,
                        "iterations": c.iterations,
                        "converged": c.converged,
                        "seconds": c.seconds,
                    }));
                }
            }
            serde_json::to_string_pretty(&json!({
                "example": example,
                "tolerance": tolerance,
                "inner": inner_label,
                "date": today(),
                "cells": rows,
            }))
            .unwrap()
        }
    };
    emit(&text, &cmd.output.out, config)
}

fn cmd_export(cmd: ExportCmd, config: &FileConfig) -> ExitCode {
    match export_impl(&cmd, config) {
        Ok(dir) => {
            println!("exported to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(2)
        }
    }
}

fn export_impl(cmd: &ExportCmd, config: &FileConfig) -> Result<PathBuf, CliError> {
    let selection = cmd.problem.selection()?;
    let spec = match &selection {
        Selection::Spec(s) => *s,
        Selection::Synth { .. } => {
            return Err(CliError::new(
                "synthetic problems carry no provenance and cannot be exported",
            ))
        }
    };
    let problem = selection.build()?;
    let dir = match &cmd.out {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => default_out_dir(config).join(p),
        None => default_out_dir(config).join(format!(
            "example{}-{}",
            spec.example_id(),
            spec.size_param()
        )),
    };
    export_problem(&problem, &dir)?;
    Ok(dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(2);
        }
    };
    match cli.command {
        Command::Solve(cmd) => cmd_solve(cmd, &config),
        Command::Tune(cmd) => cmd_tune(cmd, &config),
        Command::Spectrum(cmd) => cmd_spectrum(cmd, &config),
        Command::ReproduceTable(cmd) => cmd_table(cmd, &config),
        Command::Export(cmd) => cmd_export(cmd, &config),
    }
}
