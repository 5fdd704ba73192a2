//! Batch front end: reads a problem document, runs one pipeline and writes a
//! JSON report. Exit codes: 0 when every check passes, 1 when some check
//! fails, 2 when the input cannot be parsed or is inconsistent.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cayley::double_cayley;
use crate::colligation::{
    bess_from_colligation_with, check_spectrum_condition, colligation_value_on_halfplane,
    realize_pencil, Colligation,
};
use crate::error::Error;
use crate::fixtures::parallel_resistor;
use crate::membership::{check_membership, disk_grid, halfplane_grid, SampleConfig};
use crate::numkit::{from_nested, op_norm, to_nested, CMatrix};
use crate::pencil::{decomposition_sum, BessFunction, MatrixPoint, PsdPencil, Shape};
use crate::realstruct::{
    check_real_colligation, real_function_residual, realify_decomposition, Involution,
};
use crate::report::{Check, Report};

pub const FORMAT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// A matrix as row-major rows of `[re, im]` pairs.
pub type Nested = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColligationFile {
    pub n: Vec<usize>,
    pub x: usize,
    pub u: usize,
    pub matrix: Nested,
}

/// Involutions on the value space, the spaces `M_k` and the state space.
/// Missing entries default to entrywise conjugation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvolutionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Nested>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Nested>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Nested>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pencil: Option<Vec<Nested>>,
    /// Halfplane points, each a list of matrices `Z_k`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<Nested>>,
    /// Disk points for `cayley`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disk_points: Vec<Vec<Nested>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colligation: Option<ColligationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involutions: Option<InvolutionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SampleConfig>,
}

impl ProblemFile {
    pub fn from_pencil(f: &BessFunction) -> Self {
        Self {
            version: FORMAT_VERSION,
            shape: Some(f.shape().clone()),
            pencil: Some(f.pencil().factors().iter().map(to_nested).collect()),
            points: Vec::new(),
            disk_points: Vec::new(),
            colligation: None,
            involutions: None,
            config: None,
        }
    }

    /// Parses either a problem document or a report that embeds one.
    pub fn parse(text: &str) -> Result<Self, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
        let doc = match value.get("problem") {
            Some(p) if value.get("command").is_some() => p.clone(),
            _ => value,
        };
        let problem: Self = serde_json::from_value(doc).map_err(|e| format!("invalid problem: {e}"))?;
        if problem.version != FORMAT_VERSION {
            return Err(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                problem.version
            ));
        }
        Ok(problem)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn function(&self) -> Result<BessFunction, String> {
        let shape = self.shape.clone().ok_or("problem has no shape")?;
        shape.validate().map_err(|e| e.to_string())?;
        let g = self.pencil.as_ref().ok_or("problem has no pencil")?;
        if g.len() != shape.vars() {
            return Err(format!("pencil has {} factors for {} variables", g.len(), shape.vars()));
        }
        let g = g
            .iter()
            .map(|rows| from_nested(rows, shape.width()))
            .collect::<crate::error::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        PsdPencil::new(shape, g).map(BessFunction::new).map_err(|e| e.to_string())
    }

    pub fn colligation(&self) -> Result<Colligation, String> {
        let c = self.colligation.as_ref().ok_or("problem has no colligation")?;
        let size = c.n.iter().sum::<usize>() * c.x + c.u;
        let matrix = from_nested(&c.matrix, size).map_err(|e| e.to_string())?;
        Colligation::new(c.n.clone(), c.x, c.u, matrix).map_err(|e| e.to_string())
    }

    fn involution(entry: Option<&Nested>, dim: usize) -> Result<Involution, String> {
        match entry {
            None => Ok(Involution::standard(dim)),
            Some(rows) => {
                let j = from_nested(rows, dim).map_err(|e| e.to_string())?;
                if j.nrows() != dim || j.ncols() != dim {
                    return Err(format!("involution must be {dim}x{dim}"));
                }
                Involution::new(j).map_err(|e| e.to_string())
            }
        }
    }
}

fn parse_points(raw: &[Vec<Nested>], dims: &[usize]) -> Result<Vec<MatrixPoint>, String> {
    raw.iter()
        .enumerate()
        .map(|(i, p)| {
            let z = p
                .iter()
                .map(|rows| from_nested(rows, 0))
                .collect::<crate::error::Result<Vec<_>>>()
                .and_then(MatrixPoint::new)
                .map_err(|e| format!("point {i}: {e}"))?;
            z.check_dims(dims).map_err(|e| format!("point {i}: {e}"))?;
            Ok(z)
        })
        .collect()
}

fn point_json(z: &MatrixPoint) -> Value {
    json!(z.components().iter().map(to_nested).collect::<Vec<_>>())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Output {
    pub version: u32,
    pub command: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub values: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemFile>,
}

#[derive(Debug, Parser)]
#[command(name = "longres", version, about = "Pencils, double Cayley transforms and colligations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct Flags {
    /// Seed for sample grids and random tuples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Threshold for the identity checks of the command.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of random sample points.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Number of random operator tuples.
    #[arg(long, global = true)]
    tuples: Option<usize>,
    /// Largest carrier dimension for operator tuples.
    #[arg(long, global = true)]
    carrier_dim: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate f at the points of the problem (default: the identity point).
    Eval { input: PathBuf },
    /// Emit the factors phi_k at sample points and check the decomposition.
    Decompose { input: PathBuf },
    /// Evaluate the double Cayley transform at disk points.
    Cayley { input: PathBuf },
    /// Build a unitary colligation realizing the double Cayley transform.
    Realize {
        input: PathBuf,
        /// Build a general unitary instead of a self-adjoint one.
        #[arg(long)]
        nonsymmetric: bool,
        /// Complete the colligation so that it is real for entrywise conjugation.
        #[arg(long)]
        real: bool,
    },
    /// Recover a pencil from the colligation of the problem.
    Reconstruct { input: PathBuf },
    /// Randomized test of the class conditions.
    Check { input: PathBuf },
    /// Realness of f, of its doubled decomposition and of the colligation.
    Realcheck { input: PathBuf },
    /// End-to-end pipeline on the parallel-resistor function.
    Demo,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Decompose { .. } => "decompose",
            Command::Cayley { .. } => "cayley",
            Command::Realize { .. } => "realize",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Check { .. } => "check",
            Command::Realcheck { .. } => "realcheck",
            Command::Demo => "demo",
        }
    }

    fn input(&self) -> Option<&Path> {
        match self {
            Command::Eval { input }
            | Command::Decompose { input }
            | Command::Cayley { input }
            | Command::Realize { input, .. }
            | Command::Reconstruct { input }
            | Command::Check { input }
            | Command::Realcheck { input } => Some(input),
            Command::Demo => None,
        }
    }
}

/// What a command produced before serialization.
struct Outcome {
    report: Report,
    values: Value,
    problem: Option<ProblemFile>,
}

enum Failure {
    Input(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ShapeMismatch(_) | Error::InvalidSplit { .. } | Error::NonFinite => {
                Failure::Input(e.to_string())
            }
            e => Failure::Numeric(e),
        }
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Input(e)
    }
}

type CommandResult = Result<Outcome, Failure>;

fn config(problem: Option<&ProblemFile>, flags: &Flags) -> SampleConfig {
    let mut cfg = problem.and_then(|p| p.config.clone()).unwrap_or_default();
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(t) = flags.tol {
        cfg.identity_tol = t;
    }
    if let Some(n) = flags.samples {
        cfg.num_points = n;
    }
    if let Some(n) = flags.tuples {
        cfg.num_tuples = n;
    }
    if let Some(d) = flags.carrier_dim {
        cfg.carrier_dim = d;
    }
    cfg
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b)) / (1.0 + op_norm(b))
}

fn flag(ok: bool) -> f64 {
    if ok { 0.0 } else { f64::INFINITY }
}

fn sample_points(problem: &ProblemFile, f: &BessFunction, cfg: &SampleConfig) -> Result<Vec<MatrixPoint>, String> {
    if problem.points.is_empty() {
        Ok(halfplane_grid(&f.shape().n, cfg.num_points, cfg.seed))
    } else {
        parse_points(&problem.points, &f.shape().n)
    }
}

fn eval(problem: &ProblemFile) -> CommandResult {
    let f = problem.function()?;
    let points = if problem.points.is_empty() {
        vec![MatrixPoint::identity(&f.shape().n)]
    } else {
        parse_points(&problem.points, &f.shape().n)?
    };
    let values = points.iter().map(|z| f.eval(z).map(|v| json!(to_nested(&v)))).collect::<crate::error::Result<Vec<_>>>()?;
    Ok(Outcome {
        report: Report::new(),
        values: json!({ "points": points.iter().map(point_json).collect::<Vec<_>>(), "values": values }),
        problem: None,
    })
}

fn decompose(problem: &ProblemFile, cfg: &SampleConfig, tol: f64) -> CommandResult {
    let f = problem.function()?;
    let points = sample_points(problem, &f, cfg)?;
    let phis = points.iter().map(|z| f.phi(z)).collect::<crate::error::Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for (z, pz) in points.iter().zip(&phis) {
        let fz = f.eval(z)?;
        for pl in &phis {
            worst = worst.max(rel(&decomposition_sum(pl, z, pz, &f.shape().m), &fz));
        }
    }
    let mut report = Report::new();
    report.record("decomposition_identity", worst, tol, None);
    let phi_json: Vec<Value> =
        phis.iter().map(|p| json!(p.iter().map(to_nested).collect::<Vec<_>>())).collect();
    Ok(Outcome {
        report,
        values: json!({ "points": points.iter().map(point_json).collect::<Vec<_>>(), "phi": phi_json }),
        problem: None,
    })
}

fn cayley(problem: &ProblemFile, cfg: &SampleConfig, tol: f64) -> CommandResult {
    let f = problem.function()?;
    let dims = &f.shape().n;
    let points = if problem.disk_points.is_empty() {
        disk_grid(dims, cfg.num_points, cfg.seed, false)
    } else {
        parse_points(&problem.disk_points, dims)?
    };
    let s = double_cayley(&f);
    let values = points.iter().map(|w| s.eval(w)).collect::<crate::error::Result<Vec<_>>>()?;
    let excess = values.iter().map(|v| (op_norm(v) - 1.0).max(0.0)).fold(0.0, f64::max);
    let mut report = Report::new();
    report.record("contractive", excess, tol, None);
    Ok(Outcome {
        report,
        values: json!({
            "disk_points": points.iter().map(point_json).collect::<Vec<_>>(),
            "values": values.iter().map(to_nested).collect::<Vec<_>>(),
        }),
        problem: None,
    })
}

fn realize(problem: &ProblemFile, cfg: &SampleConfig, tol: f64, symmetric: bool, real: bool) -> CommandResult {
    let f = problem.function()?;
    let (c, samples) = realize_pencil(&f, symmetric, real, cfg.seed)?;
    let mut report = Report::new();
    report.record("unitarity", c.unitarity_residual(), tol, None);
    let mut train: f64 = 0.0;
    for (w, v) in samples.points.iter().zip(&samples.f_values) {
        train = train.max(op_norm(&(c.transfer_eval(w)? - v)));
    }
    report.record("interpolation", train, tol, None);
    if symmetric {
        report.record("selfadjoint", c.selfadjoint_residual(), tol, None);
        report.record("spectrum_condition", flag(check_spectrum_condition(&c)), 0.0, None);
    }
    if real {
        let ok = check_real_colligation(&c, &Involution::standard(c.x()), &Involution::standard(c.u()))?;
        report.record("real_colligation", flag(ok), 0.0, None);
    }
    let mut out = problem.clone();
    out.colligation = Some(ColligationFile {
        n: c.n().to_vec(),
        x: c.x(),
        u: c.u(),
        matrix: to_nested(c.matrix()),
    });
    Ok(Outcome {
        report,
        values: json!({ "x": c.x(), "u": c.u(), "state_dim": c.state_dim(), "training_points": samples.points.len() }),
        problem: Some(out),
    })
}

fn reconstruct(problem: &ProblemFile, cfg: &SampleConfig, tol: f64) -> CommandResult {
    let c = problem.colligation()?;
    let g = bess_from_colligation_with(&c, cfg.seed, None)?;
    let points = halfplane_grid(c.n(), cfg.num_points, cfg.seed);
    let mut report = Report::new();
    let mut worst: f64 = 0.0;
    for z in &points {
        worst = worst.max(rel(&g.eval(z)?, &colligation_value_on_halfplane(&c, z)?));
    }
    report.record("transfer_agreement", worst, tol, None);
    if problem.pencil.is_some() {
        let f = problem.function()?;
        if f.shape().n != c.n() || f.shape().u != c.u() {
            return Err(Failure::Input("pencil and colligation have different dimensions".into()));
        }
        let mut worst: f64 = 0.0;
        for z in &points {
            worst = worst.max(rel(&g.eval(z)?, &f.eval(z)?));
        }
        report.record("pencil_agreement", worst, tol, None);
    }
    let mut out = ProblemFile::from_pencil(&g);
    out.colligation = problem.colligation.clone();
    out.involutions = problem.involutions.clone();
    out.config = problem.config.clone();
    Ok(Outcome {
        report,
        values: json!({ "shape": g.shape() }),
        problem: Some(out),
    })
}

fn check(problem: &ProblemFile, cfg: &SampleConfig) -> CommandResult {
    let f = problem.function()?;
    cfg.validate()?;
    Ok(Outcome { report: check_membership(&f, cfg), values: json!({}), problem: None })
}

fn realcheck(problem: &ProblemFile, cfg: &SampleConfig, tol: f64) -> CommandResult {
    let f = problem.function()?;
    let shape = f.shape().clone();
    let inv = problem.involutions.clone().unwrap_or_default();
    let inv_u = ProblemFile::involution(inv.value.as_ref(), shape.u)?;
    let inv_m = match &inv.factors {
        None => shape.m.iter().map(|&m| Involution::standard(m)).collect(),
        Some(list) if list.len() == shape.vars() => list
            .iter()
            .zip(&shape.m)
            .map(|(j, &m)| ProblemFile::involution(Some(j), m))
            .collect::<Result<Vec<_>, _>>()?,
        Some(list) => {
            return Err(Failure::Input(format!("{} factor involutions for {} variables", list.len(), shape.vars())))
        }
    };
    let points = sample_points(problem, &f, cfg)?;
    let mut report = Report::new();
    let residual = real_function_residual(&f, &inv_u, &points)?;
    report.record("real_function", residual, tol, None);
    if residual <= tol {
        let real = realify_decomposition(&f, &inv_u, &inv_m)?;
        let (mut realness, mut decomp) = (0.0f64, 0.0f64);
        for (z, l) in points.iter().zip(points.iter().rev()) {
            realness = realness.max(real.realness_residual(z)?);
            decomp = decomp.max(real.decomposition_residual(z, l)?);
        }
        report.record("realified_realness", realness, tol, None);
        report.record("realified_decomposition", decomp, tol, None);
    }
    if problem.colligation.is_some() {
        let c = problem.colligation()?;
        let inv_x = ProblemFile::involution(inv.state.as_ref(), c.x())?;
        let ok = check_real_colligation(&c, &inv_x, &inv_u)?;
        report.record("real_colligation", flag(ok), 0.0, None);
    }
    Ok(Outcome { report, values: json!({}), problem: None })
}

fn demo(cfg: &SampleConfig, tol: f64) -> CommandResult {
    let f = parallel_resistor();
    let mut report = Report::new();
    let mut closed = 0.0f64;
    for (z, want) in [([1.0, 1.0], 0.5), ([2.0, 2.0], 1.0)] {
        let v = f.eval(&MatrixPoint::real_scalars(&z))?;
        closed = closed.max((v[(0, 0)].re - want).abs() + v[(0, 0)].im.abs());
    }
    report.record("closed_form", closed, 1e-12, None);
    report.extend(check_membership(&f, cfg));

    let problem = ProblemFile::from_pencil(&f);
    let realized = realize(&problem, cfg, 1e-8, true, true)?;
    report.extend(realized.report);
    let with_colligation = realized.problem.expect("realize emits a problem");
    let rebuilt = reconstruct(&with_colligation, cfg, tol.max(1e-6))?;
    report.extend(rebuilt.report);
    Ok(Outcome {
        report,
        values: json!({ "f(1,1)": 0.5, "f(2,2)": 1.0, "reconstructed_shape": rebuilt.values["shape"] }),
        problem: Some(with_colligation),
    })
}

fn emit(output: &Output, out: Option<&Path>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(output).map_err(|e| e.to_string())? + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let problem = match cli.command.input().map(ProblemFile::load).transpose() {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    let cfg = config(problem.as_ref(), &cli.flags);
    let tol = |default: f64| cli.flags.tol.unwrap_or(default);
    let p = problem.as_ref();
    let result = match &cli.command {
        Command::Eval { .. } => eval(p.expect("input loaded")),
        Command::Decompose { .. } => decompose(p.expect("input loaded"), &cfg, tol(1e-9)),
        Command::Cayley { .. } => cayley(p.expect("input loaded"), &cfg, tol(1e-9)),
        Command::Realize { nonsymmetric, real, .. } => {
            realize(p.expect("input loaded"), &cfg, tol(1e-8), !nonsymmetric, *real)
        }
        Command::Reconstruct { .. } => reconstruct(p.expect("input loaded"), &cfg, tol(1e-6)),
        Command::Check { .. } => check(p.expect("input loaded"), &cfg),
        Command::Realcheck { .. } => realcheck(p.expect("input loaded"), &cfg, tol(1e-9)),
        Command::Demo => demo(&cfg, tol(1e-6)),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
        Err(Failure::Numeric(e)) => {
            let mut report = Report::new();
            report.record("pipeline", f64::INFINITY, 0.0, Some(e.to_string()));
            eprintln!("error: {e}");
            Outcome { report, values: json!({}), problem: None }
        }
    };
    let output = Output {
        version: FORMAT_VERSION,
        command: cli.command.name().to_string(),
        passed: outcome.report.passed(),
        checks: outcome.report.checks,
        values: outcome.values,
        problem: outcome.problem,
    };
    if let Err(msg) = emit(&output, cli.flags.out.as_deref()) {
        eprintln!("error: {msg}");
        return EXIT_INPUT;
    }
    if output.passed { EXIT_OK } else { EXIT_FAILED }
}
