//! The `stabreg` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use stabreg_core::catalog::{self, BUILTIN_NAMES};
use stabreg_core::charpoly::{exceptional_set, ExceptionalSet};
use stabreg_core::locus;
use stabreg_core::rational::{format_rational, parse_exact_real};
use stabreg_core::region::{GridSpec, RegionGrid, Viewport};
use stabreg_core::simulate::{self, Outcome, RunConfig};
use stabreg_core::stability::{self, StabilityVerdict, Status};
use stabreg_core::svg::{self, PlotSpec};
use stabreg_core::{CharPoly, Complex64, ExactComplex, MultistepScheme, Tolerances};

use crate::export::{self, format_complex, format_f64, ComplexRecord};
use crate::method_file;
use crate::parallel;

#[derive(Debug, Parser)]
#[command(name = "stabreg", version, about = "Stability regions of linear multistep and multiderivative multistep methods")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List or inspect the built-in methods.
    Methods {
        #[command(subcommand)]
        action: MethodsCommand,
    },
    /// Classify one point mu = h*lambda.
    Check(CheckArgs),
    /// Exceptional set E (zeros of the leading coefficient) and its verdicts.
    Exceptional(CommonArgs),
    /// Probe each exceptional point for isolation.
    Isolated(IsolatedArgs),
    /// Trace the root locus curve; CSV "theta,branch,re,im".
    Locus(LocusArgs),
    /// Classify a grid of points; CSV "re,im,classical,refined,marginal,degenerate,max_modulus".
    Scan(ScanArgs),
    /// Compare the one-step stability function region with the multistep verdict.
    CompareRk(CompareRkArgs),
    /// Iterate the recurrence at one mu.
    Simulate(SimulateArgs),
    /// Check that bounded simulations match the classifier.
    Equivalence(EquivalenceArgs),
    /// Render the stability region as an SVG document.
    Figure(FigureArgs),
}

#[derive(Debug, Subcommand)]
enum MethodsCommand {
    /// Names of the built-in methods.
    List(OutputArgs),
    /// Coefficients, characteristic polynomial and exceptional set of a method.
    Show(CommonArgs),
}

#[derive(Debug, Clone, Args)]
struct MethodArgs {
    /// Built-in method name (see `methods list`).
    #[arg(long, required_unless_present = "method_file", conflicts_with = "method_file")]
    method: Option<String>,
    /// JSON method file.
    #[arg(long, value_name = "PATH")]
    method_file: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug, Clone, Args)]
struct TolArgs {
    /// Distance within which mu counts as an exceptional point (tau_E).
    #[arg(long = "tau-e", value_name = "TOL", default_value = "1e-8", value_parser = positive)]
    tau_e: f64,
    /// Half-width of the unit-circle band (tau_circ).
    #[arg(long = "tau-circ", value_name = "TOL", default_value = "1e-9", value_parser = positive)]
    tau_circ: f64,
    /// Root clustering radius for multiplicity (tau_mult).
    #[arg(long = "tau-mult", value_name = "TOL", default_value = "1e-7", value_parser = positive)]
    tau_mult: f64,
    /// Relative size below which a leading coefficient counts as zero (tau_drop).
    #[arg(long = "tau-drop", value_name = "TOL", default_value = "1e-9", value_parser = positive)]
    tau_drop: f64,
    /// Accepted relative residual of computed roots (tau_res).
    #[arg(long = "tau-res", value_name = "TOL", default_value = "1e-10", value_parser = positive)]
    tau_res: f64,
    /// Radius merging numerically computed exceptional points (tau_sep).
    #[arg(long = "tau-sep", value_name = "TOL", default_value = "1e-8", value_parser = positive)]
    tau_sep: f64,
    /// Accepted relative residual of locus samples (tau_locus).
    #[arg(long = "tau-locus", value_name = "TOL", default_value = "1e-9", value_parser = positive)]
    tau_locus: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            degeneracy_radius: self.tau_e,
            unit_circle: self.tau_circ,
            multiplicity: self.tau_mult,
            degree_drop: self.tau_drop,
            residual: self.tau_res,
            separation: self.tau_sep,
            locus: self.tau_locus,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Emit a JSON record instead of text.
    #[arg(long)]
    json: bool,
    /// Write the output to a file instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Point to classify: `a+bi`, with integer, p/q or decimal parts (read exactly).
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
}

#[derive(Debug, Clone, Args)]
struct IsolatedArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Radius of the probe circle.
    #[arg(long, default_value = "1e-3", value_parser = positive)]
    radius: f64,
    /// Number of probes on the circle.
    #[arg(long, default_value_t = 16)]
    probes: usize,
    /// Angles used to trace the locus for the distance estimate.
    #[arg(long, default_value_t = 10_000)]
    locus_samples: usize,
}

#[derive(Debug, Clone, Args)]
struct LocusArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of equally spaced angles on the unit circle.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    /// `re_min,re_max,im_min,im_max`; defaults to the method's standard viewport.
    #[arg(long, allow_hyphen_values = true, value_name = "RECT")]
    viewport: Option<String>,
    /// Nodes along the real axis.
    #[arg(long, default_value_t = 201)]
    nx: usize,
    /// Nodes along the imaginary axis.
    #[arg(long, default_value_t = 201)]
    ny: usize,
}

#[derive(Debug, Clone, Args)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct CompareRkArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    /// Comma-separated initial values; random when omitted.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// Number of values y_0, y_1, ... to compute, initial values included.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Write the trajectory as CSV "n,re,im,abs" to this file.
    #[arg(long, value_name = "PATH")]
    trajectory: Option<PathBuf>,
    /// Seed for random initial values.
    #[arg(long, env = "STABREG_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args)]
struct EquivalenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Points to test (repeatable); when omitted, interior points are chosen automatically.
    #[arg(long, allow_hyphen_values = true)]
    mu: Vec<String>,
    /// Automatically chosen points per verdict class.
    #[arg(long, default_value_t = 10)]
    per_class: usize,
    /// Random initial vectors per point.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Number of values computed per run.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Seed for random initial values.
    #[arg(long, env = "STABREG_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args)]
struct FigureArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 560)]
    height: u32,
    #[arg(long, default_value = "5", value_parser = positive)]
    marker_radius: f64,
    /// Angles used to trace the locus.
    #[arg(long, default_value_t = 4000)]
    locus_samples: usize,
    #[arg(long)]
    no_locus: bool,
    #[arg(long)]
    no_exceptional: bool,
    /// Worker threads for the scan (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

/// Failure classes with their exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Primary output: to `--out` when given, otherwise standard output.
fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| compute(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(compute),
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("records serialize");
    text.push('\n');
    text
}

struct Loaded {
    scheme: MultistepScheme,
    cp: CharPoly,
    exc: ExceptionalSet,
    tol: Tolerances,
}

fn load(method: &MethodArgs, tol: &TolArgs) -> Result<Loaded, CliError> {
    let scheme = match (&method.method, &method.method_file) {
        (Some(name), _) => catalog::builtin(name).map_err(usage)?,
        (None, Some(path)) => method_file::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        (None, None) => return Err(usage("one of --method or --method-file is required")),
    };
    let tol = tol.tolerances();
    let cp = CharPoly::new(&scheme);
    let exc = exceptional_set(&cp, &tol);
    Ok(Loaded { scheme, cp, exc, tol })
}

fn parse_mu(text: &str) -> Result<ExactComplex, CliError> {
    ExactComplex::parse(text).map_err(|e| usage(format!("--mu: {e}")))
}

fn parse_viewport(text: &str) -> Result<Viewport, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(usage("--viewport expects re_min,re_max,im_min,im_max"));
    }
    let mut v = [0.0; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        let r = parse_exact_real(part).map_err(|e| usage(format!("--viewport: {e}")))?;
        *slot = stabreg_core::rational::rational_to_f64(&r);
    }
    Viewport::new(v[0], v[1], v[2], v[3]).map_err(usage)
}

/// Standard viewport for built-ins; otherwise a box around E and the
/// bounded part of the locus.
fn default_viewport(loaded: &Loaded) -> Result<Viewport, CliError> {
    if let Some(v) = catalog::standard_viewport(loaded.scheme.name()) {
        if catalog::builtin(loaded.scheme.name()).is_ok_and(|b| b == loaded.scheme) {
            return Ok(v);
        }
    }
    let curve = locus::trace(&loaded.cp, 2000, &loaded.tol);
    let points = curve
        .samples
        .iter()
        .map(|s| s.mu)
        .filter(|z| z.norm() <= 50.0)
        .chain(loaded.exc.values())
        .chain([Complex64::new(0.0, 0.0)]);
    let v = Viewport::enclosing(points, 0.15).ok_or_else(|| compute("cannot choose a viewport; pass --viewport"))?;
    // Symmetric about the real axis, so conjugate nodes pair up.
    let h = v.im_max.abs().max(v.im_min.abs()).max(1.0);
    Viewport::new(v.re_min, v.re_max, -h, h).map_err(compute)
}

fn grid_spec(loaded: &Loaded, grid: &GridArgs) -> Result<GridSpec, CliError> {
    let viewport = match &grid.viewport {
        Some(text) => parse_viewport(text)?,
        None => default_viewport(loaded)?,
    };
    GridSpec::new(viewport, grid.nx, grid.ny).map_err(usage)
}

fn status_word(s: Status) -> &'static str {
    s.as_str()
}

#[derive(Debug, Serialize)]
struct VerdictRecord {
    mu: ComplexRecord,
    exact: Option<String>,
    classical: &'static str,
    refined: &'static str,
    degenerate: bool,
    vacuous: bool,
    effective_degree: isize,
    roots: Vec<ComplexRecord>,
    max_modulus: f64,
}

impl VerdictRecord {
    fn new(v: &StabilityVerdict, exact: Option<String>) -> Self {
        Self {
            mu: v.mu.into(),
            exact,
            classical: status_word(v.classical),
            refined: status_word(v.refined),
            degenerate: v.degenerate,
            vacuous: v.is_vacuous(),
            effective_degree: v.effective_degree,
            roots: v.roots.roots.iter().map(|&z| z.into()).collect(),
            max_modulus: v.max_modulus,
        }
    }
}

fn roots_text(v: &StabilityVerdict) -> String {
    if v.roots.roots.is_empty() {
        "none".into()
    } else {
        v.roots.roots.iter().map(|&z| format_complex(z)).collect::<Vec<_>>().join(", ")
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Methods { action: MethodsCommand::List(output) } => methods_list(&output, stdout),
        Command::Methods { action: MethodsCommand::Show(args) } => methods_show(&args, stdout),
        Command::Check(args) => check(&args, stdout),
        Command::Exceptional(args) => exceptional(&args, stdout),
        Command::Isolated(args) => isolated(&args, stdout),
        Command::Locus(args) => locus_cmd(&args, stdout),
        Command::Scan(args) => scan(&args, stdout),
        Command::CompareRk(args) => compare_rk(&args, stdout),
        Command::Simulate(args) => simulate_cmd(&args, stdout),
        Command::Equivalence(args) => equivalence(&args, stdout),
        Command::Figure(args) => figure(&args, stdout),
    }
}

fn methods_list(output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let schemes: Vec<MultistepScheme> = BUILTIN_NAMES.iter().map(|n| catalog::builtin(n).expect("built-in")).collect();
    let text = if output.json {
        let records: Vec<_> = schemes
            .iter()
            .map(|s| json!({ "name": s.name(), "k": s.k(), "s": s.s(), "implicit": s.is_implicit() }))
            .collect();
        to_json(&records)
    } else {
        let mut t = String::new();
        for s in &schemes {
            let kind = if s.is_implicit() { "implicit" } else { "explicit" };
            let _ = writeln!(t, "{:<18} k={} s={} {kind}", s.name(), s.k(), s.s());
        }
        t
    };
    emit(output, &text, stdout)
}

fn exceptional_label(exc: &ExceptionalSet, index: usize) -> String {
    let p = &exc.points[index];
    match &p.exact {
        Some(form) => format!("{form} (exact)"),
        None => format!("{} (numeric)", format_complex(p.value)),
    }
}

fn methods_show(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.method, &args.tol)?;
    let s = &l.scheme;
    let irreducible = s.lmm_view().ok().map(|v| v.irreducible());
    let polys: Vec<String> = l.cp.coefficient_polys().iter().map(|p| p.to_string_in("mu")).collect();
    let exc: Vec<String> = (0..l.exc.len()).map(|i| exceptional_label(&l.exc, i)).collect();
    let viewport = catalog::standard_viewport(s.name()).filter(|_| catalog::builtin(s.name()).is_ok_and(|b| &b == s));
    let text = if args.output.json {
        let mut doc = method_file::to_value(s);
        let obj = doc.as_object_mut().expect("object");
        obj.insert("implicit".into(), json!(s.is_implicit()));
        obj.insert("consistent".into(), json!(s.is_consistent()));
        obj.insert("irreducible".into(), json!(irreducible));
        obj.insert("coefficient_polynomials".into(), json!(polys));
        obj.insert(
            "exceptional".into(),
            json!(l
                .exc
                .points
                .iter()
                .map(|p| json!({ "exact": p.exact.as_ref().map(|f| f.to_string()), "re": p.value.re, "im": p.value.im }))
                .collect::<Vec<_>>()),
        );
        obj.insert(
            "viewport".into(),
            json!(viewport.map(|v| [v.re_min, v.re_max, v.im_min, v.im_max])),
        );
        to_json(&doc)
    } else {
        let yes = |b: bool| if b { "yes" } else { "no" };
        let mut t = String::new();
        let _ = writeln!(t, "name: {}", s.name());
        let _ = writeln!(t, "k: {}", s.k());
        let _ = writeln!(t, "s: {}", s.s());
        let _ = writeln!(t, "implicit: {}", yes(s.is_implicit()));
        let _ = writeln!(t, "consistent: {}", yes(s.is_consistent()));
        let _ = writeln!(t, "irreducible: {}", irreducible.map_or("n/a", yes));
        for (j, row) in s.coefficients().iter().enumerate() {
            let entries: Vec<String> = row.iter().map(format_rational).collect();
            let _ = writeln!(t, "a[{j}]: {}", entries.join(", "));
        }
        for (l, p) in polys.iter().enumerate() {
            let _ = writeln!(t, "C_{l}(mu) = {p}");
        }
        let _ = writeln!(t, "exceptional set: {}", if exc.is_empty() { "empty".into() } else { exc.join(", ") });
        if let Some(v) = viewport {
            let _ = writeln!(t, "standard viewport: [{}, {}] x [{}, {}]", format_f64(v.re_min), format_f64(v.re_max), format_f64(v.im_min), format_f64(v.im_max));
        }
        t
    };
    emit(&args.output, &text, stdout)
}

fn check(args: &CheckArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.common.method, &args.common.tol)?;
    let mu = parse_mu(&args.mu)?;
    let v = stability::classify_exact(&l.cp, &l.exc, &mu, &l.tol).map_err(compute)?;
    let exact = mu.to_string();
    let text = if args.common.output.json {
        to_json(&json!({ "method": l.scheme.name(), "verdict": VerdictRecord::new(&v, Some(exact)) }))
    } else {
        let mut t = String::new();
        let _ = writeln!(t, "method: {}", l.scheme.name());
        let _ = writeln!(t, "mu: {} (exact {exact})", format_complex(v.mu));
        if v.degenerate {
            let _ = writeln!(t, "degenerate: yes, effective degree {}", v.effective_degree);
        } else {
            let _ = writeln!(t, "degenerate: no, degree {}", v.effective_degree);
        }
        let vacuous = if v.is_vacuous() { " (vacuous)" } else { "" };
        let _ = writeln!(t, "classical: {}{vacuous}", v.classical);
        let _ = writeln!(t, "refined: {}", v.refined);
        let _ = writeln!(t, "roots: {}", roots_text(&v));
        let _ = writeln!(t, "max modulus: {}", format_f64(v.max_modulus));
        t
    };
    emit(&args.common.output, &text, stdout)
}

fn exceptional(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.method, &args.tol)?;
    let verdicts = (0..l.exc.len())
        .map(|i| stability::classify_exceptional_point(&l.cp, &l.exc, i, &l.tol))
        .collect::<Result<Vec<_>, _>>()
        .map_err(compute)?;
    let text = if args.output.json {
        let points: Vec<_> = l
            .exc
            .points
            .iter()
            .zip(&verdicts)
            .map(|(p, v)| VerdictRecord::new(v, p.exact.as_ref().map(|f| f.to_string())))
            .collect();
        to_json(&json!({ "method": l.scheme.name(), "points": points }))
    } else {
        let mut t = String::new();
        let _ = writeln!(t, "method: {}", l.scheme.name());
        let n = l.exc.len();
        let _ = writeln!(t, "exceptional set: {n} point{}", if n == 1 { "" } else { "s" });
        for (i, v) in verdicts.iter().enumerate() {
            let _ = writeln!(t, "{}  mu = {}", exceptional_label(&l.exc, i), format_complex(l.exc.points[i].value));
            let _ = writeln!(t, "  classical: {}, refined: {}", v.classical, v.refined);
            let _ = writeln!(t, "  reduced degree: {}", v.effective_degree);
            let _ = writeln!(t, "  roots: {}", roots_text(v));
            let _ = writeln!(t, "  max modulus: {}", format_f64(v.max_modulus));
        }
        t
    };
    emit(&args.output, &text, stdout)
}

fn isolated(args: &IsolatedArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.common.method, &args.common.tol)?;
    let reports = stability::detect_isolated(&l.cp, &l.scheme, &l.exc, args.radius, args.probes, args.locus_samples, &l.tol)
        .map_err(|e| match e {
            stability::IsolationError::Classify(_) => compute(e),
            _ => usage(e),
        })?;
    let text = if args.common.output.json {
        let records: Vec<_> = reports
            .iter()
            .map(|r| {
                json!({
                    "mu": ComplexRecord::from(r.mu_star),
                    "exact": r.exact.as_ref().map(|f| f.to_string()),
                    "classical": status_word(r.verdict.classical),
                    "refined": status_word(r.verdict.refined),
                    "unstable_probes": r.unstable_probes,
                    "probe_count": r.probe_count,
                    "neighborhood_unstable": r.neighborhood_unstable,
                    "irreducible_guarantee": r.proposition_applies,
                    "min_locus_distance": r.min_locus_distance,
                    "isolated": r.isolated(),
                })
            })
            .collect();
        to_json(&json!({
            "method": l.scheme.name(),
            "probe_radius": args.radius,
            "locus_samples": args.locus_samples,
            "points": records,
        }))
    } else {
        let mut t = String::new();
        let _ = writeln!(t, "method: {}", l.scheme.name());
        let _ = writeln!(t, "probe radius: {}, probes: {}, locus samples: {}", format_f64(args.radius), args.probes, args.locus_samples);
        if reports.is_empty() {
            let _ = writeln!(t, "exceptional set: empty");
        }
        for (i, r) in reports.iter().enumerate() {
            let yes = |b: bool| if b { "yes" } else { "no" };
            let _ = writeln!(t, "{}  mu = {}", exceptional_label(&l.exc, i), format_complex(r.mu_star));
            let _ = writeln!(t, "  classical: {}, refined: {}", r.verdict.classical, r.verdict.refined);
            let _ = writeln!(t, "  unstable probes: {}/{}", r.unstable_probes, r.probe_count);
            let _ = writeln!(t, "  min locus distance: {}", format_f64(r.min_locus_distance));
            let _ = writeln!(t, "  irreducible multistep guarantee: {}", yes(r.proposition_applies));
            let _ = writeln!(t, "  isolated: {}", yes(r.isolated()));
        }
        t
    };
    emit(&args.common.output, &text, stdout)
}

fn locus_cmd(args: &LocusArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.common.method, &args.common.tol)?;
    let curve = locus::trace(&l.cp, args.samples, &l.tol);
    let residual = curve.max_relative_residual(&l.cp);
    if residual > l.tol.locus {
        return Err(compute(format!("locus residual {residual:e} exceeds tau_locus {:e}", l.tol.locus)));
    }
    let text = if args.common.output.json {
        let samples: Vec<_> = curve
            .samples
            .iter()
            .map(|s| json!({ "theta": s.theta, "branch": s.branch, "re": s.mu.re, "im": s.mu.im }))
            .collect();
        to_json(&json!({
            "method": l.scheme.name(),
            "n_samples": curve.n_samples,
            "branches": curve.branches,
            "singular_thetas": curve.singular_thetas,
            "max_relative_residual": residual,
            "samples": samples,
        }))
    } else {
        let mut buf = Vec::new();
        export::write_locus_csv(&curve, &mut buf).map_err(compute)?;
        String::from_utf8(buf).expect("CSV is UTF-8")
    };
    emit(&args.common.output, &text, stdout)
}

fn workers(requested: Option<usize>) -> Result<usize, CliError> {
    match requested {
        Some(0) => Err(usage("--workers must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(parallel::default_workers()),
    }
}

fn region_summary(grid: &RegionGrid) -> serde_json::Value {
    json!({
        "classical_stable": grid.count(|c| c.classical == Status::Stable),
        "refined_stable": grid.count(|c| c.refined == Status::Stable),
        "marginal": grid.count(|c| c.classical == Status::Marginal),
        "degenerate": grid.count(|c| c.degenerate),
    })
}

fn scan(args: &ScanArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.common.method, &args.common.tol)?;
    let spec = grid_spec(&l, &args.grid)?;
    let n = workers(args.workers)?;
    let grid = parallel::scan(&l.cp, &l.exc, &spec, &l.tol, n).map_err(compute)?;
    let text = if args.common.output.json {
        let v = spec.viewport;
        let cells: Vec<_> = (0..spec.ny)
            .flat_map(|j| (0..spec.nx).map(move |i| (i, j)))
            .map(|(i, j)| {
                let node = spec.node(i, j);
                let c = grid.cell(i, j);
                json!({
                    "re": node.re,
                    "im": node.im,
                    "classical": c.classical == Status::Stable,
                    "refined": c.refined == Status::Stable,
                    "marginal": c.classical == Status::Marginal,
                    "degenerate": c.degenerate,
                    "max_modulus": c.max_modulus,
                })
            })
            .collect();
        to_json(&json!({
            "method": l.scheme.name(),
            "viewport": [v.re_min, v.re_max, v.im_min, v.im_max],
            "nx": spec.nx,
            "ny": spec.ny,
            "counts": region_summary(&grid),
            "cells": cells,
        }))
    } else {
        let mut buf = Vec::new();
        export::write_region_csv(&grid, &mut buf).map_err(compute)?;
        String::from_utf8(buf).expect("CSV is UTF-8")
    };
    emit(&args.common.output, &text, stdout)
}

fn compare_rk(args: &CompareRkArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.common.method, &args.common.tol)?;
    let view = l.scheme.lmm_view().map_err(usage)?;
    let r = stability::rk_stability_function(&view).map_err(usage)?;
    let spec = grid_spec(&l, &args.grid)?;
    let points = stability::rk_vs_lmm_discrepancy(&l.scheme, &spec, &l.tol).map_err(compute)?;
    let text = if args.common.output.json {
        let pts: Vec<ComplexRecord> = points.iter().map(|&z| z.into()).collect();
        to_json(&json!({
            "method": l.scheme.name(),
            "stability_function": r.to_string_in("z"),
            "nx": spec.nx,
            "ny": spec.ny,
            "discrepancies": pts,
        }))
    } else {
        let mut t = String::new();
        let _ = writeln!(t, "method: {}", l.scheme.name());
        let _ = writeln!(t, "R(z) = {}", r.to_string_in("z"));
        let v = spec.viewport;
        let _ = writeln!(t, "grid: [{}, {}] x [{}, {}], {} x {}", format_f64(v.re_min), format_f64(v.re_max), format_f64(v.im_min), format_f64(v.im_max), spec.nx, spec.ny);
        let _ = writeln!(t, "discrepancies: {}", points.len());
        for z in &points {
            let _ = writeln!(t, "{}", format_complex(*z));
        }
        t
    };
    emit(&args.common.output, &text, stdout)
}

fn parse_init(text: &str) -> Result<Vec<Complex64>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|part| ExactComplex::parse(part).map(|z| z.to_complex64()).map_err(|e| usage(format!("--init: {e}"))))
        .collect()
}

fn simulate_cmd(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.common.method, &args.common.tol)?;
    let exact = parse_mu(&args.mu)?;
    let mu = exact.to_complex64();
    let (order, _) = simulate::required_order(&l.cp, &l.exc, mu, &l.tol).map_err(compute)?;
    let init = match &args.init {
        Some(text) => parse_init(text)?,
        None => simulate::random_init(&mut ChaCha8Rng::seed_from_u64(args.seed), order),
    };
    let config = RunConfig { record_trajectory: args.trajectory.is_some(), ..RunConfig::default() };
    let run = simulate::run(&l.cp, &l.exc, mu, &init, args.steps, &config, &l.tol).map_err(|e| match e {
        simulate::SimulateError::InitLength { .. } | simulate::SimulateError::TooFewSteps(_) | simulate::SimulateError::NonFinite => usage(e),
        _ => compute(e),
    })?;
    if let Some(path) = &args.trajectory {
        let file = std::fs::File::create(path).map_err(|e| compute(format!("cannot write {}: {e}", path.display())))?;
        export::write_trajectory_csv(&run, std::io::BufWriter::new(file)).map_err(compute)?;
    }
    let text = if args.common.output.json {
        to_json(&json!({
            "method": l.scheme.name(),
            "mu": ComplexRecord::from(mu),
            "exact": exact.to_string(),
            "order": run.order,
            "reduced_order": run.reduced_order,
            "initial_values": run.initial_values.iter().map(|&z| ComplexRecord::from(z)).collect::<Vec<_>>(),
            "n_steps": run.n_steps,
            "outcome": run.outcome.as_str(),
            "trajectory_max": run.trajectory_max,
            "final_window_max": run.final_window_max,
            "final_value": ComplexRecord::from(run.final_value),
            "blowup_step": run.blowup_step,
        }))
    } else {
        let mut t = String::new();
        let _ = writeln!(t, "method: {}", l.scheme.name());
        let _ = writeln!(t, "mu: {} (exact {exact})", format_complex(mu));
        let _ = writeln!(t, "order: {}{}", run.order, if run.reduced_order { " (reduced)" } else { "" });
        let inits: Vec<String> = run.initial_values.iter().map(|&z| format_complex(z)).collect();
        let _ = writeln!(t, "initial values: {}", if inits.is_empty() { "none".into() } else { inits.join(", ") });
        let _ = writeln!(t, "steps: {}", run.n_steps);
        let _ = writeln!(t, "outcome: {}", run.outcome.as_str());
        let _ = writeln!(t, "trajectory max: {}", format_f64(run.trajectory_max));
        let _ = writeln!(t, "final window max: {}", format_f64(run.final_window_max));
        let _ = writeln!(t, "final value: {}", format_complex(run.final_value));
        let _ = writeln!(t, "blowup step: {}", run.blowup_step.map_or("none".into(), |n| n.to_string()));
        t
    };
    emit(&args.common.output, &text, stdout)
}

fn equivalence(args: &EquivalenceArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.common.method, &args.common.tol)?;
    let mus: Vec<Complex64> = if args.mu.is_empty() {
        let viewport = default_viewport(&l)?;
        simulate::interior_sample_points(&l.cp, &l.exc, &viewport, args.per_class, 0.05, 0.1, &l.tol).map_err(compute)?
    } else {
        args.mu.iter().map(|m| parse_mu(m).map(|z| z.to_complex64())).collect::<Result<_, _>>()?
    };
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let rows = simulate::equivalence_check(&l.cp, &l.exc, &mus, args.trials, args.steps, args.seed, &l.tol).map_err(|e| match e {
        simulate::SimulateError::TooFewSteps(_) => usage(e),
        _ => compute(e),
    })?;
    let agreeing = rows.iter().filter(|r| r.agree).count();
    let count = |r: &simulate::EquivalenceRow, o: Outcome| r.outcomes.iter().filter(|&&x| x == o).count();
    let text = if args.common.output.json {
        let records: Vec<_> = rows
            .iter()
            .map(|r| {
                json!({
                    "mu": ComplexRecord::from(r.mu),
                    "verdict": status_word(r.verdict),
                    "bounded": count(r, Outcome::Bounded),
                    "blowup": count(r, Outcome::Blowup),
                    "inconclusive": r.inconclusive,
                    "agreeing": r.agreeing,
                    "agree": r.agree,
                })
            })
            .collect();
        to_json(&json!({
            "method": l.scheme.name(),
            "seed": args.seed,
            "trials": args.trials,
            "n_steps": args.steps,
            "points": records,
            "agreeing_points": agreeing,
            "total_points": rows.len(),
        }))
    } else {
        let mut t = String::new();
        let _ = writeln!(t, "method: {}", l.scheme.name());
        let _ = writeln!(t, "seed: {}, trials: {}, steps: {}", args.seed, args.trials, args.steps);
        for r in &rows {
            let _ = writeln!(
                t,
                "{}  {}  bounded {} blowup {} inconclusive {}  {}",
                format_complex(r.mu),
                r.verdict,
                count(r, Outcome::Bounded),
                count(r, Outcome::Blowup),
                r.inconclusive,
                if r.agree { "agree" } else { "DISAGREE" }
            );
        }
        let _ = writeln!(t, "agreement: {agreeing}/{}", rows.len());
        t
    };
    emit(&args.common.output, &text, stdout)
}

fn figure(args: &FigureArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if args.common.output.json && args.common.output.out.is_none() {
        return Err(usage("figure --json needs --out for the SVG document"));
    }
    let l = load(&args.common.method, &args.common.tol)?;
    let spec = grid_spec(&l, &args.grid)?;
    let plot = PlotSpec {
        width_px: args.width,
        height_px: args.height,
        marker_radius_px: args.marker_radius,
        include_locus: !args.no_locus,
        include_exceptional: !args.no_exceptional,
        ..PlotSpec::default()
    };
    plot.validate().map_err(usage)?;
    let grid = parallel::scan(&l.cp, &l.exc, &spec, &l.tol, workers(args.workers)?).map_err(compute)?;
    let curve = (!args.no_locus).then(|| locus::trace(&l.cp, args.locus_samples, &l.tol));
    let doc = svg::render(&grid, curve.as_ref(), Some(&l.exc), &plot).map_err(compute)?;
    let highlights = doc.matches("class=\"exceptional-stable\"").count();
    let others = doc.matches("class=\"exceptional-unstable\"").count();
    match (&args.common.output.out, args.common.output.json) {
        (Some(path), json_out) => {
            std::fs::write(path, &doc).map_err(|e| compute(format!("cannot write {}: {e}", path.display())))?;
            let text = if json_out {
                to_json(&json!({
                    "method": l.scheme.name(),
                    "path": path.display().to_string(),
                    "nx": spec.nx,
                    "ny": spec.ny,
                    "counts": region_summary(&grid),
                    "highlight_markers": highlights,
                    "other_markers": others,
                }))
            } else {
                format!("wrote {} ({highlights} highlight markers, {others} other markers)\n", path.display())
            };
            stdout.write_all(text.as_bytes()).map_err(compute)
        }
        (None, _) => stdout.write_all(doc.as_bytes()).map_err(compute),
    }
}
