//! The `ordquant` command line.
//!
//! Standard output carries only the command's payload (text, JSON or CSV);
//! diagnostics and the `--verbose` run report go to standard error.
//!
//! Exit codes: 0 ok, 2 usage or parse error, 3 no δ = 1 crossing, 4 I/O,
//! 5 verification failure.

mod numbers;
pub mod selfcheck;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

pub use numbers::{format_complex, parse_exact, parse_exact_list, parse_f64_list, sig15};

use crate::ehrenfest::{
    departure_curve, ehrenfest_analytic, ehrenfest_diagnostics, ehrenfest_numeric, BreakTime,
    EhrenfestError, ModelConfig, OscillatorModel,
};
use crate::exprparse::{parse_expr, render_operator, render_phase, ParseError, ParsedExpr};
use crate::liouville::{verify_smoothing_identity, verify_smoothing_truncated, FlowMap, GaussianEnsemble, LiouvilleError};
use crate::opcore::{
    canonicalize, coherent_expectation_exact, quantize_symmetric_poly, Coeff, CommutatorRules,
    OpError, OrderTarget,
};
use crate::phasespace::{Coord, PhasePoint, PhasePoly};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CROSSING: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

pub const THREADS_ENV: &str = "ORDQUANT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ordquant", version, about = "Ordered quantization and Ehrenfest break times")]
struct Cli {
    /// Write a JSON run report to standard error.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Target {
    Qp,
    Pq,
    Normal,
    Antinormal,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ExpectMode {
    Symmetric,
    Raw,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Analytic,
    Numeric,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FlowKind {
    Identity,
    Harmonic,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bring an expression into a canonical operator order. Phase-space
    /// expressions are symmetrically quantized first.
    Order {
        #[arg(long)]
        expr: String,
        #[arg(long, value_enum, default_value = "qp")]
        target: Target,
    },
    /// Coherent-state expectation value at a phase-space center.
    Expect {
        #[arg(long)]
        expr: String,
        /// q1,p1[,q2,p2,...]
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        hbar: String,
        #[arg(long, value_enum, default_value = "symmetric")]
        mode: ExpectMode,
    },
    /// Gaussian smoothing exp((σ/4)∇²) of a phase-space polynomial.
    Smooth {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        inverse: bool,
    },
    /// Analytic and numeric Ehrenfest times of a model file.
    Ehrenfest {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
    },
    /// Departure curves δ(t), one CSV per ℏ, plus index.json.
    Figure1 {
        /// Defaults: N=2, k=2, ω=1, g=0.1, q=p=1.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "1,0.1,0.01")]
        hbar_list: String,
        #[arg(long, default_value_t = 60.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo check of the smoothing identity (linear flows) or of its
    /// first-order truncation (model flow).
    McVerify {
        #[arg(long, conflicts_with = "flow")]
        model: Option<PathBuf>,
        #[arg(long, value_enum)]
        flow: Option<FlowKind>,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ensemble center for --flow; defaults to 1 in every coordinate.
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        /// Frequencies for --flow harmonic; defaults to 1 per mode.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
    /// Exact identity suites.
    Selfcheck {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, hide = true)]
        corrupt_commutator: bool,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Payload still printed on standard out (verification failures).
    stdout: Option<String>,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into(), stdout: None }
}

fn usage(message: impl Into<String>) -> Failure {
    fail(EXIT_USAGE, message)
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        usage(e.to_string())
    }
}

impl From<OpError> for Failure {
    fn from(e: OpError) -> Self {
        usage(e.to_string())
    }
}

impl From<LiouvilleError> for Failure {
    fn from(e: LiouvilleError) -> Self {
        usage(e.to_string())
    }
}

impl From<EhrenfestError> for Failure {
    fn from(e: EhrenfestError) -> Self {
        match e {
            EhrenfestError::NoCrossing { .. } => fail(EXIT_NO_CROSSING, e.to_string()),
            _ => usage(e.to_string()),
        }
    }
}

struct Output {
    stdout: String,
    payload: Value,
    seeds: Vec<u64>,
}

impl Output {
    fn text(s: String) -> Self {
        Output { payload: Value::String(s.clone()), stdout: s + "\n", seeds: vec![] }
    }

    fn json<T: Serialize>(v: &T) -> Self {
        let payload = serde_json::to_value(v).expect("serializable");
        Output { stdout: format!("{payload}\n"), payload, seeds: vec![] }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'a str,
    inputs: Vec<String>,
    outputs: Value,
    exit_code: i32,
    seeds: Vec<u64>,
    elapsed_seconds: f64,
}

fn target_of(t: Target) -> OrderTarget {
    match t {
        Target::Qp => OrderTarget::QP,
        Target::Pq => OrderTarget::PQ,
        Target::Normal => OrderTarget::Normal,
        Target::Antinormal => OrderTarget::Antinormal,
    }
}

fn read_model(path: &Path) -> Result<OscillatorModel, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    let config: ModelConfig =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid model {}: {e}", path.display())))?;
    OscillatorModel::from_config(&config).map_err(|e| usage(e.to_string()))
}

fn cmd_order(expr: &str, target: Target) -> Result<Output, Failure> {
    let op = match parse_expr(expr)? {
        ParsedExpr::Phase(f) => quantize_symmetric_poly(&f),
        ParsedExpr::Operator(x) => x,
    };
    Ok(Output::text(render_operator(&canonicalize(&op, target_of(target))?)))
}

/// Evaluates an exact expectation at a rational ℏ when every grade is even,
/// otherwise in floating point.
fn exact_at(c: &Coeff, hbar: &BigRational) -> (f64, f64) {
    match c.at_hbar(hbar) {
        Some(g) => {
            let z = g.to_complex64();
            (z.re, z.im)
        }
        None => {
            let z = c.evaluate(crate::opcore::GaussRational::from_rational(hbar.clone()).to_complex64().re);
            (z.re, z.im)
        }
    }
}

fn cmd_expect(expr: &str, center: &str, hbar: &str, mode: ExpectMode) -> Result<Output, Failure> {
    let center = parse_exact_list(center).map_err(usage)?;
    if center.len() % 2 != 0 {
        return Err(usage(format!("--center needs q,p pairs, got {} values", center.len())));
    }
    let hbar = parse_exact(hbar).map_err(usage)?;
    if !numbers::is_positive(&hbar) {
        return Err(usage("--hbar must be positive"));
    }
    let modes = center.len() / 2;
    let value = match (mode, parse_expr(expr)?) {
        (ExpectMode::Symmetric, ParsedExpr::Phase(f)) => {
            if f.n_modes() > modes {
                return Err(usage(format!(
                    "expression uses {} modes but the center has {modes}",
                    f.n_modes()
                )));
            }
            f.smooth(&Coeff::hbar()).evaluate_exact(&center).map_err(|e| usage(e.to_string()))?
        }
        (ExpectMode::Raw, ParsedExpr::Operator(x)) => coherent_expectation_exact(&x, &center)?,
        (ExpectMode::Symmetric, ParsedExpr::Operator(_)) => {
            return Err(usage("--mode symmetric takes a phase-space expression in q, p; use --mode raw for operators"));
        }
        (ExpectMode::Raw, ParsedExpr::Phase(_)) => {
            return Err(usage("--mode raw takes an operator expression in Q, P, a, ad; use --mode symmetric for q, p"));
        }
    };
    let (re, im) = exact_at(&value, &hbar);
    Ok(Output::text(format_complex(re, im)))
}

fn cmd_smooth(expr: &str, sigma: &str, inverse: bool) -> Result<Output, Failure> {
    let f = match parse_expr(expr)? {
        ParsedExpr::Phase(f) => f,
        ParsedExpr::Operator(_) => return Err(usage("smooth takes a phase-space expression in q, p")),
    };
    let sigma = parse_exact(sigma).map_err(usage)?;
    if sigma < BigRational::from_integer(0.into()) {
        return Err(usage("--sigma must be non-negative"));
    }
    let s = Coeff::from_rational(sigma);
    let g = if inverse { crate::phasespace::inverse_smooth(&f, &s) } else { f.smooth(&s) };
    Ok(Output::text(render_phase(&g)))
}

fn cmd_ehrenfest(path: &Path, method: Method) -> Result<Output, Failure> {
    let model = read_model(path)?;
    let result = match method {
        Method::Analytic => ehrenfest_analytic(&model)?,
        Method::Numeric => {
            let mut r = ehrenfest_diagnostics(&model)?;
            r.t_numeric = Some(ehrenfest_numeric(&model)?);
            r
        }
        Method::Both => {
            let mut r = ehrenfest_analytic(&model)?;
            r.t_numeric = Some(ehrenfest_numeric(&model)?);
            r
        }
    };
    Ok(Output::json(&result))
}

#[derive(Serialize)]
struct CurveEntry {
    hbar: f64,
    file: String,
    crossing: Option<f64>,
    t_numeric: Option<BreakTime>,
    t_analytic: Option<BreakTime>,
}

fn cmd_figure1(
    model: Option<&Path>,
    hbar_list: &str,
    t_max: f64,
    points: usize,
    out: &Path,
) -> Result<Output, Failure> {
    if points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(usage("--t-max must be positive"));
    }
    let hbars = parse_f64_list(hbar_list).map_err(usage)?;
    if hbars.iter().any(|&h| h <= 0.0) {
        return Err(usage("--hbar-list values must be positive"));
    }
    let base = match model {
        Some(p) => read_model(p)?,
        None => OscillatorModel::figure_defaults(1.0),
    };
    let grid: Vec<f64> = (0..points)
        .map(|i| if i + 1 == points { t_max } else { t_max * i as f64 / (points - 1) as f64 })
        .collect();
    let mut curves = Vec::new();
    let mut files = Vec::new();
    for &h in &hbars {
        let m = base.with_hbar(h).map_err(|e| usage(e.to_string()))?;
        let curve = departure_curve(&m, &grid)?;
        let t_numeric = match ehrenfest_numeric(&m) {
            Ok(t) => Some(t),
            Err(EhrenfestError::NoCrossing { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let t_analytic = ehrenfest_analytic(&m).ok().and_then(|r| r.t_analytic);
        let file = format!("departure_hbar_{h}.csv");
        files.push((file.clone(), curve.to_csv()));
        curves.push(CurveEntry { hbar: h, file, crossing: curve.crossing, t_numeric, t_analytic });
    }
    let index = json!({
        "model": base.to_config(),
        "t_max": t_max,
        "points": points,
        "curves": curves,
    });
    fs::create_dir_all(out).map_err(|e| fail(EXIT_IO, format!("cannot create {}: {e}", out.display())))?;
    let write = |name: &str, body: &str| {
        fs::write(out.join(name), body)
            .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", out.join(name).display())))
    };
    for (name, body) in &files {
        write(name, body)?;
    }
    write("index.json", &format!("{}\n", serde_json::to_string_pretty(&index).expect("json")))?;
    Ok(Output { stdout: format!("{index}\n"), payload: index, seeds: vec![] })
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc_verify(
    model: Option<&Path>,
    flow: Option<FlowKind>,
    expr: &str,
    sigma: f64,
    t: f64,
    samples: u64,
    seed: u64,
    center: Option<&str>,
    omega: Option<&str>,
) -> Result<Output, Failure> {
    if !t.is_finite() {
        return Err(usage("--t must be finite"));
    }
    let f = match parse_expr(expr)? {
        ParsedExpr::Phase(f) => f,
        ParsedExpr::Operator(_) => return Err(usage("mc-verify takes a phase-space expression in q, p")),
    };
    let (report, pass) = match (model, flow) {
        (Some(path), _) => {
            let m = read_model(path)?;
            let component = single_coordinate(&f).ok_or_else(|| {
                usage("with --model the expression must be a single coordinate such as q1 or p2")
            })?;
            let ensemble = GaussianEnsemble::new(m.center().clone(), sigma)?;
            let r = verify_smoothing_truncated(&m, component, &ensemble, t, samples, seed)?;
            (serde_json::to_value(&r).expect("json"), r.pass)
        }
        (None, Some(kind)) => {
            let modes = f.n_modes().max(1);
            let center = match center {
                Some(c) => parse_f64_list(c).map_err(usage)?,
                None => vec![1.0; 2 * modes],
            };
            let center = PhasePoint::new(center).map_err(|e| usage(e.to_string()))?;
            let flow = match kind {
                FlowKind::Identity => FlowMap::Identity,
                FlowKind::Harmonic => FlowMap::Harmonic {
                    omega: match omega {
                        Some(w) => parse_f64_list(w).map_err(usage)?,
                        None => vec![1.0; center.n_modes()],
                    },
                },
            };
            let ensemble = GaussianEnsemble::new(center, sigma)?;
            let r = verify_smoothing_identity(&f, &ensemble, &flow, t, samples, seed)?;
            (serde_json::to_value(&r).expect("json"), r.pass)
        }
        (None, None) => return Err(usage("one of --model or --flow is required")),
    };
    let stdout = format!("{report}\n");
    if !pass {
        return Err(Failure {
            code: EXIT_VERIFY,
            message: "verification failed".into(),
            stdout: Some(stdout),
        });
    }
    Ok(Output { stdout, payload: report, seeds: vec![seed] })
}

/// Index of `(q1, p1, ...)` when `f` is exactly one coordinate.
fn single_coordinate(f: &PhasePoly) -> Option<usize> {
    let mut terms = f.terms();
    let (m, c) = terms.next()?;
    if terms.next().is_some() || !c.is_one() {
        return None;
    }
    let mut vars = m.vars();
    let (v, e) = vars.next()?;
    if e != 1 || vars.next().is_some() {
        return None;
    }
    Some(2 * v.mode as usize + usize::from(v.coord == Coord::P))
}

fn cmd_selfcheck(filter: Option<&str>, corrupt: bool) -> Result<Output, Failure> {
    let rules = if corrupt { selfcheck::corrupted_rules() } else { CommutatorRules::default() };
    let summary = selfcheck::run(filter, &rules).map_err(usage)?;
    let out = Output::json(&summary);
    if let Some(f) = &summary.first_failure {
        return Err(Failure {
            code: EXIT_VERIFY,
            message: format!(
                "selfcheck failed in suite {} at {}\n  expected: {}\n  actual:   {}",
                f.suite, f.case, f.expected, f.actual
            ),
            stdout: Some(out.stdout),
        });
    }
    Ok(out)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Order { .. } => "order",
        Command::Expect { .. } => "expect",
        Command::Smooth { .. } => "smooth",
        Command::Ehrenfest { .. } => "ehrenfest",
        Command::Figure1 { .. } => "figure1",
        Command::McVerify { .. } => "mc-verify",
        Command::Selfcheck { .. } => "selfcheck",
    }
}

fn dispatch(c: &Command) -> Result<Output, Failure> {
    match c {
        Command::Order { expr, target } => cmd_order(expr, *target),
        Command::Expect { expr, center, hbar, mode } => cmd_expect(expr, center, hbar, *mode),
        Command::Smooth { expr, sigma, inverse } => cmd_smooth(expr, sigma, *inverse),
        Command::Ehrenfest { model, method } => cmd_ehrenfest(model, *method),
        Command::Figure1 { model, hbar_list, t_max, points, out } => {
            cmd_figure1(model.as_deref(), hbar_list, *t_max, *points, out)
        }
        Command::McVerify { model, flow, expr, sigma, t, samples, seed, center, omega } => cmd_mc_verify(
            model.as_deref(),
            *flow,
            expr,
            *sigma,
            *t,
            *samples,
            *seed,
            center.as_deref(),
            omega.as_deref(),
        ),
        Command::Selfcheck { filter, corrupt_commutator } => {
            cmd_selfcheck(filter.as_deref(), *corrupt_commutator)
        }
    }
}

/// Runs one command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let start = Instant::now();
    let result = configure_threads().and_then(|_| dispatch(&cli.command));
    let (code, payload, seeds) = match result {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            (EXIT_OK, o.payload, o.seeds)
        }
        Err(f) => {
            if let Some(s) = &f.stdout {
                let _ = out.write_all(s.as_bytes());
            }
            let _ = writeln!(err, "error: {}", f.message);
            (f.code, Value::String(f.message), vec![])
        }
    };
    if cli.verbose {
        let report = RunReport {
            command: command_name(&cli.command),
            inputs: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
            outputs: payload,
            exit_code: code,
            seeds,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        };
        let _ = writeln!(err, "{}", serde_json::to_string(&report).expect("json"));
    }
    code
}
