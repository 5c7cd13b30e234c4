//! Command-line front end: `check`, `conjugate`, `envelope`, `descend`,
//! `scenario` and `list`.
//!
//! Exit codes: 0 success / holds / converged, 1 usage or configuration
//! error, 2 violated (check) or failed scenarios, 3 inconclusive, 4 descent
//! hit the iteration cap, 5 descent flagged divergence.

mod plan;
mod scenario_file;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::anisotropic::{check_aniso_convexity, check_aniso_smooth, dual_preconditioned_descent, AnisoCheckSpec, DescentOptions, DescentStatus};
use crate::bregman::{check_b_convexity, check_b_smooth, CheckOptions, Envelope, EnvelopeKind, Side as EnvelopeSide};
use crate::conjugacy::{phi_conjugate_full, Coupling, CouplingKind, Side as ConjugateSide};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::funcs::{catalog_names, LegendrePair, PairSpec, ScalarFunction, SubgradientPolicy};
use crate::io::format_real;
use crate::report::{CheckReport, Verdict, DEFAULT_TOLERANCE};
use crate::scenarios::{self, ScenarioResult};

pub use plan::parse_plan;
pub use scenario_file::{CheckClass, ScenarioFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VIOLATED: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_MAX_ITER: u8 = 4;
pub const EXIT_DIVERGED: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "aniso", version, about = "Bregman and anisotropic smoothness/convexity toolkit")]
pub struct Cli {
    /// Worker threads for parallel sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a convexity/smoothness class on a sampling plan.
    Check(CheckArgs),
    /// Discrete (Φ-)conjugate on a grid.
    Conjugate(ConjugateArgs),
    /// Bregman-Moreau or Bregman-Klee envelope on a grid.
    Envelope(EnvelopeArgs),
    /// Dual-space-preconditioned descent.
    Descend(DescendArgs),
    /// Run registered scenarios.
    Scenario(ScenarioArgs),
    /// List scenarios and catalog entries.
    List(ListArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Expression, or a path to a file holding one.
    #[arg(long = "f", required_unless_present = "scenario")]
    pub f: Option<String>,
    /// Reference pair `name[:p1,p2,...]`.
    #[arg(long, required_unless_present = "scenario")]
    pub phi: Option<String>,
    /// Class to certify.
    #[arg(long, value_enum, required_unless_present = "scenario")]
    pub class: Option<CheckClass>,
    /// Probe plan: `grid:LO..HI/N[,...]`, `random:LO..HI[,...]/COUNT[/SEED]`, `points:x,y;x,y` or a JSON plan.
    #[arg(long, required_unless_present = "scenario")]
    pub plan: Option<String>,
    /// Anchor plan for anisotropic classes (defaults to the probe plan).
    #[arg(long)]
    pub anchors: Option<String>,
    /// Absolute margin tolerance.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Seed for `random` plans that omit one.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `vertices`, `midpoint` or `hull:N`.
    #[arg(long, default_value = "midpoint")]
    pub policy: String,
    /// JSON scenario file; replaces the other flags.
    #[arg(long, conflicts_with_all = ["f", "phi", "class", "plan", "anchors"])]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConjugateArgs {
    /// Expression, or a path to a file holding one.
    #[arg(long = "f")]
    pub f: String,
    /// Coupling: `inner_product`, `plus_phi_shift`, `minus_phi_shift`, `plus_bregman` or `minus_bregman`.
    #[arg(long, default_value = "inner_product")]
    pub coupling: String,
    /// Reference pair for the non-inner-product couplings.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    pub side: SideArg,
    /// Primal grid the supremum runs over.
    #[arg(long)]
    pub primal_plan: String,
    /// Points at which the conjugate is evaluated.
    #[arg(long)]
    pub dual_plan: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    /// Expression, or a path to a file holding one.
    #[arg(long = "g")]
    pub g: String,
    /// Reference pair `name[:p1,p2,...]`.
    #[arg(long)]
    pub phi: String,
    #[arg(long, value_enum, default_value_t = KindArg::Moreau)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    pub side: SideArg,
    /// Inner grid for the envelope's optimization variable.
    #[arg(long)]
    pub plan: String,
    /// Evaluation points (defaults to the inner grid).
    #[arg(long)]
    pub eval_plan: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DescendArgs {
    /// Expression, or a path to a file holding one.
    #[arg(long = "f")]
    pub f: String,
    /// Reference pair `name[:p1,p2,...]`.
    #[arg(long)]
    pub phi: String,
    /// Start point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Stops once the gradient norm falls below this.
    #[arg(long, default_value_t = 1e-6)]
    pub stop_tol: f64,
    /// Trace CSV path; the trace goes to standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario name; repeatable.
    #[arg(long, required_unless_present = "all")]
    pub name: Vec<String>,
    /// Run every registered scenario.
    #[arg(long, conflicts_with = "name")]
    pub all: bool,
    /// Directory for result JSON and CSV artifacts.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Moreau,
    Klee,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: EXIT_CONFIG, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_CONFIG, message: format!("i/o error: {e}") }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    ExitCode::from(code)
}

/// Runs a parsed invocation and returns its exit code.
pub fn run(cli: Cli) -> CliResult<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Failure { code: EXIT_CONFIG, message: format!("cannot start worker pool: {e}") })?;
    pool.install(|| match cli.command {
        Command::Check(a) => cmd_check(&a),
        Command::Conjugate(a) => cmd_conjugate(&a),
        Command::Envelope(a) => cmd_envelope(&a),
        Command::Descend(a) => cmd_descend(&a),
        Command::Scenario(a) => cmd_scenario(&a),
        Command::List(a) => cmd_list(&a),
    })
}

/// Writes to standard output; a closed pipe is not an error.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Reads an expression argument: an existing file path or the expression text.
pub fn read_expression(arg: &str) -> CliResult<String> {
    let p = Path::new(arg);
    if p.is_file() {
        Ok(fs::read_to_string(p)?.trim().to_string())
    } else {
        Ok(arg.to_string())
    }
}

/// Parses an expression as a function of `dim` variables.
pub fn parse_function(src: &str, dim: usize) -> Result<ScalarFunction> {
    let e = Expr::parse_str(src)?;
    if e.arity() > dim {
        return Err(Error::Dimension { expected: dim, got: e.arity() });
    }
    Ok(ScalarFunction::from_expr_with_arity(dim, e))
}

pub fn parse_policy(s: &str) -> Result<SubgradientPolicy> {
    match s {
        "vertices" => Ok(SubgradientPolicy::Vertices),
        "midpoint" => Ok(SubgradientPolicy::VerticesAndMidpoint),
        _ => match s.strip_prefix("hull:").map(str::parse::<usize>) {
            Some(Ok(count)) if count >= 2 => Ok(SubgradientPolicy::HullGrid { count }),
            _ => Err(Error::Config(format!("unknown subgradient policy '{s}'"))),
        },
    }
}

fn parse_pair(s: &str, dim: usize) -> Result<LegendrePair> {
    PairSpec::parse(s)?.build(Some(dim))
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("cannot parse coordinate '{t}'"))))
        .collect()
}

/// Runs a check described by a scenario file.
pub fn run_check(file: &ScenarioFile) -> Result<CheckReport> {
    let probes = file.probes.clone();
    probes.validate()?;
    let dim = probes.dim();
    let f = parse_function(&file.f, dim)?;
    let pair = file.pair.build(Some(dim))?;
    let r = file.r_value()?;
    let tol = file.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let policy = file.policy.clone().unwrap_or_default();
    if !matches!(file.coupling, None | Some(CouplingKind::InnerProduct)) {
        return Err(Error::Config("check supports the inner-product coupling only".into()));
    }
    let opts = CheckOptions { tolerance: tol, policy: policy.clone(), scale: 1.0 };
    match file.class {
        CheckClass::BWeak | CheckClass::BStrong => check_b_convexity(&f, &pair, r, &probes, &opts),
        CheckClass::BSmooth => check_b_smooth(&f, &pair, &probes, &opts),
        CheckClass::AWeak | CheckClass::AStrong => {
            let anchors = file.anchors.clone().unwrap_or_else(|| probes.clone());
            let spec = AnisoCheckSpec::new(f, pair, r, anchors, probes)?
                .with_policy(policy)
                .with_tolerance(tol)
                .with_far_field(file.far_field.unwrap_or(true));
            check_aniso_convexity(&spec)
        }
        CheckClass::ASmooth => {
            let anchors = file.anchors.clone().unwrap_or_else(|| probes.clone());
            check_aniso_smooth(&f, &pair, &anchors, &probes, tol)
        }
    }
}

fn cmd_check(a: &CheckArgs) -> CliResult<u8> {
    let file = match &a.scenario {
        Some(path) => ScenarioFile::from_json(&fs::read_to_string(path)?)?,
        None => {
            let (f, phi, class, plan) = (a.f.as_deref(), a.phi.as_deref(), a.class, a.plan.as_deref());
            let (Some(f), Some(phi), Some(class), Some(plan)) = (f, phi, class, plan) else {
                return Err(Error::Config("--f, --phi, --class and --plan are required".into()).into());
            };
            ScenarioFile {
                f: read_expression(f)?,
                pair: PairSpec::parse(phi)?,
                class,
                r: None,
                coupling: None,
                probes: parse_plan(plan, a.seed)?,
                anchors: a.anchors.as_deref().map(|s| parse_plan(s, a.seed)).transpose()?,
                tolerance: Some(a.tol),
                policy: Some(parse_policy(&a.policy)?),
                far_field: None,
            }
        }
    };
    let report = run_check(&file)?;
    emit(&(to_json(&report) + "\n"))?;
    Ok(match report.verdict {
        Verdict::Holds => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn conjugate_side(s: SideArg) -> ConjugateSide {
    match s {
        SideArg::Left => ConjugateSide::Left,
        SideArg::Right => ConjugateSide::Right,
    }
}

fn cmd_conjugate(a: &ConjugateArgs) -> CliResult<u8> {
    let primal = parse_plan(&a.primal_plan, a.seed)?;
    let dual = parse_plan(&a.dual_plan, a.seed)?;
    let dim = primal.dim();
    let f = parse_function(&read_expression(&a.f)?, dim)?;
    let kind = CouplingKind::parse(&a.coupling)?;
    let pair = a.phi.as_deref().map(|s| parse_pair(s, dim)).transpose()?;
    let coupling = Coupling::new(kind, pair)?;
    let conj = phi_conjugate_full(&f, &coupling, &primal, &dual, conjugate_side(a.side))?;
    fs::write(&a.out, conj.grid.to_csv().render())?;
    let ((imin, min), (imax, max)) = (conj.grid.min(), conj.grid.max());
    let pts = conj.grid.points();
    let summary = json!({
        "output": a.out.display().to_string(),
        "points": conj.grid.values.len(),
        "min": real(min),
        "argmin": pts[imin],
        "max": real(max),
        "argmax": pts[imax],
        "boundary_hits": conj.boundary_hits,
        "boundary": conj.boundary_hits > 0,
    });
    emit(&(to_json(&summary) + "\n"))?;
    Ok(EXIT_OK)
}

fn real(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(format_real(v))
    }
}

fn cmd_envelope(a: &EnvelopeArgs) -> CliResult<u8> {
    let plan = parse_plan(&a.plan, a.seed)?;
    let eval = a.eval_plan.as_deref().map(|s| parse_plan(s, a.seed)).transpose()?.unwrap_or_else(|| plan.clone());
    let dim = plan.dim();
    let g = parse_function(&read_expression(&a.g)?, dim)?;
    let pair = parse_pair(&a.phi, dim)?;
    let kind = match a.kind {
        KindArg::Moreau => EnvelopeKind::Moreau,
        KindArg::Klee => EnvelopeKind::Klee,
    };
    let side = match a.side {
        SideArg::Left => EnvelopeSide::Left,
        SideArg::Right => EnvelopeSide::Right,
    };
    let env = Envelope::new(&g, &pair, kind, side, &plan)?;
    let csv = env.trace(&eval)?;
    fs::write(&a.out, csv.render())?;
    emit(&(to_json(&json!({ "output": a.out.display().to_string(), "points": csv.rows().len() })) + "\n"))?;
    Ok(EXIT_OK)
}

fn cmd_descend(a: &DescendArgs) -> CliResult<u8> {
    let x0 = parse_point(&a.x0)?;
    let f = parse_function(&read_expression(&a.f)?, x0.len())?;
    let pair = parse_pair(&a.phi, x0.len())?;
    let opts = DescentOptions { max_iter: a.max_iter, stop_tol: a.stop_tol, ..DescentOptions::default() };
    let trace = dual_preconditioned_descent(&f, &pair, &x0, &opts)?;
    let csv = trace.to_csv().render();
    let summary = json!({
        "status": trace.status,
        "iterations": trace.iterates.len() - 1,
        "final_point": trace.iterates.last().map(|x| x.iter().map(|v| real(*v)).collect::<Vec<_>>()),
        "final_value": real(*trace.values.last().unwrap_or(&f64::NAN)),
        "final_gradient_norm": real(*trace.gradient_norms.last().unwrap_or(&f64::NAN)),
        "max_residual": real(if trace.residuals.is_empty() { 0.0 } else { trace.max_residual() }),
    });
    match &a.out {
        Some(path) => {
            fs::write(path, csv)?;
            emit(&(to_json(&summary) + "\n"))?;
        }
        None => {
            emit(&csv)?;
            eprintln!("{}", to_json(&summary));
        }
    }
    Ok(match trace.status {
        DescentStatus::Converged => EXIT_OK,
        DescentStatus::MaxIter => EXIT_MAX_ITER,
        DescentStatus::Diverged => EXIT_DIVERGED,
    })
}

/// Writes `<name>.json` and the CSV artifacts of a scenario result into `dir`.
pub fn write_scenario(result: &ScenarioResult, dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{}.json", result.name)), to_json(result) + "\n")?;
    for art in &result.artifacts {
        fs::write(dir.join(&art.file_name), art.csv.render())?;
    }
    Ok(())
}

fn cmd_scenario(a: &ScenarioArgs) -> CliResult<u8> {
    let selected: Vec<&scenarios::Scenario> = if a.all {
        scenarios::registry().iter().collect()
    } else {
        a.name.iter().map(|n| scenarios::find(n)).collect::<Result<_>>()?
    };
    let mut failed = Vec::new();
    for s in selected {
        let result = (s.run)()?;
        write_scenario(&result, &a.out_dir)?;
        let status = if result.passed { "pass" } else { "FAIL" };
        emit(&format!("{status} {}\n", s.name))?;
        if !result.passed {
            for c in result.checks.iter().filter(|c| !c.passed) {
                emit(&format!("    {}: {}\n", c.name, c.detail))?;
            }
            failed.push(s.name);
        }
    }
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(Failure { code: EXIT_VIOLATED, message: format!("failed scenarios: {}", failed.join(", ")) })
    }
}

fn cmd_list(a: &ListArgs) -> CliResult<u8> {
    let reg = scenarios::registry();
    if a.json {
        let list = json!({
            "scenarios": reg.iter().map(|s| json!({ "name": s.name, "description": s.description })).collect::<Vec<_>>(),
            "pairs": catalog_names(),
            "couplings": ["inner_product", "plus_phi_shift", "minus_phi_shift", "plus_bregman", "minus_bregman"],
        });
        emit(&(to_json(&list) + "\n"))?;
    } else {
        let mut text = String::from("scenarios:\n");
        for s in reg {
            text += &format!("  {:<28} {}\n", s.name, s.description);
        }
        text += "pairs:\n";
        for p in catalog_names() {
            text += &format!("  {p}\n");
        }
        emit(&text)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests;
