//! Command-line front end: JSON run configurations in, CSV and JSON out.
//!
//! Exit codes: 0 success, 1 configuration error, 2 domain or validation
//! error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use betacalc::quantum_calc::{beta_derivative, beta_integral};
use betacalc::special_fn::{evaluate, CoefficientFunction, SpecialKind};
use betacalc::{
    BetaMap, BetaMapSpec, Complex64, Endpoints, Error, LatticeFunction, Polynomial, ScalarFunction,
    SlpProblem, Support, Tolerances,
};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Grid used by `validate` unless the config sets `grid_size`.
pub const DEFAULT_GRID_SIZE: usize = 101;

#[derive(Debug, Parser)]
#[command(name = "betacalc", version, about = "General quantum (beta-) calculus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    pub config: PathBuf,
    /// Directory for CSV and JSON output files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of eigenfunctions written by `slp`.
    #[arg(long, default_value_t = 4)]
    pub modes: usize,
    /// Print JSON instead of the default table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the map invariants on a grid.
    Validate(CommonArgs),
    /// Beta-integral of `f` from `a` to `b`.
    Integrate(CommonArgs),
    /// Beta-derivative of `f` along the orbit of `x`.
    Diff(CommonArgs),
    /// Beta-exponential or trigonometric function at given points.
    Special(CommonArgs),
    /// Eigenpairs of a Sturm-Liouville problem.
    Slp(CommonArgs),
}

/// A function described in the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    /// Coefficients in ascending degree.
    Poly(Vec<f64>),
    Builtin(Builtin),
    /// `[re, im]`.
    Constant([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Sin,
    Cos,
    Exp,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<ScalarFunction, CliError> {
        Ok(match self {
            FunctionSpec::Poly(c) => {
                if c.is_empty() {
                    return Err(CliError::Config(
                        "polynomial coefficient list must be nonempty".into(),
                    ));
                }
                ScalarFunction::polynomial(Polynomial::real(c))
            }
            FunctionSpec::Constant([re, im]) => ScalarFunction::constant(Complex64::new(*re, *im)),
            FunctionSpec::Builtin(Builtin::Sin) => {
                ScalarFunction::real(f64::sin).with_derivative(|t| Complex64::new(t.cos(), 0.0))
            }
            FunctionSpec::Builtin(Builtin::Cos) => {
                ScalarFunction::real(f64::cos).with_derivative(|t| Complex64::new(-t.sin(), 0.0))
            }
            FunctionSpec::Builtin(Builtin::Exp) => {
                ScalarFunction::real(f64::exp).with_derivative(|t| Complex64::new(t.exp(), 0.0))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateBlock {
    pub f: FunctionSpec,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffBlock {
    pub f: FunctionSpec,
    /// Base point of the orbit.
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialBlock {
    pub kind: SpecialKind,
    pub p: FunctionSpec,
    pub points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlpBlock {
    pub r: FunctionSpec,
    pub endpoints: Endpoints,
    pub bc_left: [f64; 2],
    pub bc_right: [f64; 2],
    /// Number of unknown lattice levels per orbit.
    pub depth: usize,
}

/// One JSON run configuration; only the block of the chosen command is required.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub beta: BetaMapSpec,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub integrate: Option<IntegrateBlock>,
    #[serde(default)]
    pub diff: Option<DiffBlock>,
    #[serde(default)]
    pub special: Option<SpecialBlock>,
    #[serde(default)]
    pub slp: Option<SlpBlock>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let tol = self.tolerances.unwrap_or_default();
        tol.check().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(tol)
    }

    fn block<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        block
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing `{name}` block for this command")))
    }
}

/// A failure with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NonFiniteSample { .. }
            | Error::NoConvergence { .. }
            | Error::TruncationCap { .. }
            | Error::NonFiniteValue { .. }
            | Error::SeriesDivergence { .. }
            | Error::PoleEncountered { .. }
            | Error::EigenNoConvergence { .. } => CliError::Numerical(msg),
            Error::InvalidTolerances(_) => CliError::Config(msg),
            _ => CliError::Domain(msg),
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing to `stdout` and `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command; `Ok` carries the exit code of a completed run.
pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let args = match command {
        Command::Validate(a)
        | Command::Integrate(a)
        | Command::Diff(a)
        | Command::Special(a)
        | Command::Slp(a) => a,
    };
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let config = RunConfig::from_json(&text)?;
    let tol = config.tolerances()?;
    let map = config.beta.build()?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    match command {
        Command::Validate(_) => cmd_validate(&config, &map, &tol, args, stdout),
        Command::Integrate(_) => cmd_integrate(&config, &map, &tol, args, stdout),
        Command::Diff(_) => cmd_diff(&config, &map, &tol, args, stdout),
        Command::Special(_) => cmd_special(&config, &map, &tol, args, stdout),
        Command::Slp(_) => cmd_slp(&config, &map, &tol, args, stdout),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn lattice_csv(f: &LatticeFunction) -> String {
    let s = f.to_csv_string();
    if s.is_empty() {
        "k,t_k,weight,re_value,im_value\n".to_string()
    } else {
        s
    }
}

pub fn cmd_validate(
    config: &RunConfig,
    map: &BetaMap,
    tol: &Tolerances,
    args: &CommonArgs,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let report = map.validate(config.grid_size.unwrap_or(DEFAULT_GRID_SIZE), tol)?;
    let json = to_json(&report);
    if let Some(dir) = &args.out {
        write_file(dir, "validate.json", &json)?;
    }
    stdout.write_all(json.as_bytes())?;
    Ok(if report.pass { EXIT_OK } else { EXIT_DOMAIN })
}

#[derive(Serialize)]
struct IntegrateSummary {
    value: [f64; 2],
    tail_bound: f64,
    depth: usize,
}

pub fn cmd_integrate(
    config: &RunConfig,
    map: &BetaMap,
    tol: &Tolerances,
    args: &CommonArgs,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let block = RunConfig::block(&config.integrate, "integrate")?;
    let f = block.f.build()?;
    let estimate = beta_integral(&f, block.a, block.b, map, tol)?;
    let s0 = map.fixed_point();
    // orbit of b with positive weights and of a with negative ones, as summed
    let support = if block.a == block.b {
        Support::from_orbits(s0, vec![])
    } else {
        Support::two_sided(map, block.a, block.b, tol)?
    };
    let csv = lattice_csv(&LatticeFunction::sample(&f, Arc::new(support))?);
    let summary = to_json(&IntegrateSummary {
        value: [estimate.value.re, estimate.value.im],
        tail_bound: estimate.tail_bound,
        depth: estimate.depth,
    });
    if let Some(dir) = &args.out {
        write_file(dir, "integrate.csv", &csv)?;
        write_file(dir, "summary.json", &summary)?;
    }
    let shown = if args.json { &summary } else { &csv };
    stdout.write_all(shown.as_bytes())?;
    Ok(EXIT_OK)
}

pub fn cmd_diff(
    config: &RunConfig,
    map: &BetaMap,
    tol: &Tolerances,
    args: &CommonArgs,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let block = RunConfig::block(&config.diff, "diff")?;
    let f = block.f.build()?;
    let lattice = betacalc::build_lattice(map, block.x, tol)?;
    lattice.check_cap(tol.k_max)?;
    let support = Arc::new(Support::one_sided(lattice));
    let values = support
        .points()
        // adding +0 turns the -0 of a vanishing imaginary quotient into 0
        .map(|t| beta_derivative(&f, t, map, tol).map(|v| v + Complex64::new(0.0, 0.0)))
        .collect::<Result<Vec<_>, Error>>()?;
    let at_s0 = beta_derivative(&f, map.fixed_point(), map, tol)?;
    let df = LatticeFunction::new(support, values, at_s0)?;
    let csv = lattice_csv(&df);
    let json = to_json(&df.rows().collect::<Vec<_>>());
    if let Some(dir) = &args.out {
        write_file(dir, "diff.csv", &csv)?;
    }
    stdout.write_all(if args.json {
        json.as_bytes()
    } else {
        csv.as_bytes()
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SpecialRow {
    t: f64,
    re_value: f64,
    im_value: f64,
}

pub fn cmd_special(
    config: &RunConfig,
    map: &BetaMap,
    tol: &Tolerances,
    args: &CommonArgs,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let block = RunConfig::block(&config.special, "special")?;
    if block.points.is_empty() {
        return Err(CliError::Config("special.points must be nonempty".into()));
    }
    let p = match &block.p {
        FunctionSpec::Constant([re, im]) => CoefficientFunction::Constant(Complex64::new(*re, *im)),
        other => CoefficientFunction::Function(other.build()?),
    };
    let rows = block
        .points
        .iter()
        .map(|&t| {
            evaluate(block.kind, &p, t, map, tol).map(|v| SpecialRow {
                t,
                re_value: v.re,
                im_value: v.im,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in &rows {
            w.serialize(row).map_err(|e| CliError::Io(e.into()))?;
        }
        w.flush()?;
    }
    let csv = String::from_utf8(buf).expect("CSV output is UTF-8");
    if let Some(dir) = &args.out {
        write_file(dir, "special.csv", &csv)?;
    }
    if args.json {
        stdout.write_all(to_json(&rows).as_bytes())?;
    } else {
        stdout.write_all(csv.as_bytes())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_slp(
    config: &RunConfig,
    map: &BetaMap,
    tol: &Tolerances,
    args: &CommonArgs,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let block = RunConfig::block(&config.slp, "slp")?;
    let r = block.r.build()?;
    let problem = SlpProblem::new(
        map.clone(),
        block.endpoints,
        r,
        (block.bc_left[0], block.bc_left[1]),
        (block.bc_right[0], block.bc_right[1]),
        block.depth,
    )?
    .with_tolerances(*tol)?;
    let solution = problem.solve()?;
    let modes = args.modes.min(solution.eigenvalues.len());
    let mut json = solution.to_json(modes);
    json.push('\n');
    if let Some(dir) = &args.out {
        write_file(dir, "solution.json", &json)?;
        for i in 0..modes {
            write_file(
                dir,
                &format!("mode_{i}.csv"),
                &solution.eigenfunctions[i].to_csv_string(),
            )?;
        }
    }
    if args.json {
        stdout.write_all(json.as_bytes())?;
    } else {
        for v in &solution.eigenvalues {
            writeln!(stdout, "{v:e}")?;
        }
    }
    Ok(EXIT_OK)
}
