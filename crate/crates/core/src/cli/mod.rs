//! Command-line front end.
//!
//! Every command writes either JSON (an object with the results and a
//! `meta` block recording all parameters, defaults included) or CSV. When
//! CSV goes to a file the metadata lands next to it in `<file>.meta.json`.
//! Errors are printed to stderr as `{"error": kind, "message": text}`; the
//! exit status is 0 on success, 2 for invalid input and 3 when the numerics
//! fail.

mod parse;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::entire::{counterexample_eval, counterexample_growth_fit, estimate_order, estimate_type, max_modulus_samples, predicted_growth, taylor_coefficients};
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::quadrature::QuadratureConfig;
use crate::sampling::{classify_sequence, generate_sampling_set, max_tau_bounds, points_to_csv};
use crate::stft::{full_grid_spectrogram, global_phase_residual, gs_reconstruct, Discriminator, Representation, StftGrid};
use crate::windows::{uniform_grid, window_ambiguity_scan, WindowModel};

pub use parse::{parse_angle, parse_sequence, parse_signal, read_samples};

fn real(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "phaseless", version, about = "Spectrogram phase retrieval with super-exponentially decaying windows")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<String>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Fixed quadrature truncation radius; derived from the decay envelope
    /// when absent.
    #[arg(long, global = true, value_parser = real)]
    quad_radius: Option<f64>,

    #[arg(long, global = true, default_value_t = 512)]
    quad_nodes: usize,

    #[arg(long, global = true, default_value_t = 1e-10, value_parser = real)]
    quad_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Largest admissible sampling steps for a window class.
    Bounds(BoundsArgs),
    /// The sampling set Λ as CSV `n,sign_x,sign_omega,x,omega`.
    SampleSet(SampleSetArgs),
    /// Predicted and estimated order and type of the window's entire extension.
    Growth(GrowthArgs),
    /// Uniqueness verdict for a sequence `c*k^p`.
    Classify(ClassifyArgs),
    /// Compare two signals through their spectrograms on Λ.
    Discriminate(DiscriminateArgs),
    /// Growth of the canonical-product counterexample.
    Counterexample(CounterexampleArgs),
    /// Scan the window's ambiguity function for zeros.
    ScanWindow(ScanWindowArgs),
    /// Recover a signal from full-grid spectrogram magnitudes.
    Reconstruct(ReconstructArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::SampleSet(_) => "sample-set",
            Command::Growth(_) => "growth",
            Command::Classify(_) => "classify",
            Command::Discriminate(_) => "discriminate",
            Command::Counterexample(_) => "counterexample",
            Command::ScanWindow(_) => "scan-window",
            Command::Reconstruct(_) => "reconstruct",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::SampleSet(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct WindowArgs {
    /// Decay exponent of the window's Fourier transform.
    #[arg(long, value_parser = real)]
    m: f64,
    /// Decay rate of the window's Fourier transform.
    #[arg(long, value_parser = real)]
    a: f64,
    #[arg(long, default_value_t = 1.0, value_parser = real)]
    c: f64,
    /// Modulation frequency of the window.
    #[arg(long, value_parser = real)]
    xi0: Option<f64>,
}

impl WindowArgs {
    fn model(&self) -> Result<WindowModel> {
        match self.xi0 {
            Some(xi0) => WindowModel::modulated(self.a, self.m, self.c, xi0),
            None => WindowModel::generalized_gaussian(self.a, self.m, self.c),
        }
    }
}

/// Window flags that default to the Gaussian `ĝ(ξ) = e^{-πξ²}`.
#[derive(Debug, Args, Serialize)]
struct DefaultWindowArgs {
    #[arg(long, default_value_t = 2.0, value_parser = real)]
    m: f64,
    #[arg(long, default_value_t = std::f64::consts::PI, value_parser = real)]
    a: f64,
    #[arg(long, default_value_t = 1.0, value_parser = real)]
    c: f64,
}

impl DefaultWindowArgs {
    fn model(&self) -> Result<WindowModel> {
        WindowModel::generalized_gaussian(self.a, self.m, self.c)
    }
}

#[derive(Debug, Args, Serialize)]
struct BoundsArgs {
    #[arg(long, value_parser = real)]
    m: f64,
    #[arg(long, value_parser = real)]
    a: f64,
}

#[derive(Debug, Args, Serialize)]
struct SampleSetArgs {
    #[arg(long, value_parser = real)]
    m: f64,
    /// When given, τ₁ and τ₂ must lie below the bounds for this decay rate.
    #[arg(long, value_parser = real)]
    a: Option<f64>,
    /// Defaults to 0.9 times the bound (requires --a).
    #[arg(long, value_parser = real)]
    tau1: Option<f64>,
    /// Defaults to 0.9 times the bound (requires --a).
    #[arg(long, value_parser = real)]
    tau2: Option<f64>,
    #[arg(long, default_value_t = 200)]
    n: u64,
    /// Prepend the origin.
    #[arg(long)]
    origin: bool,
}

#[derive(Debug, Args, Serialize)]
struct GrowthArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Taylor coefficients computed.
    #[arg(long, default_value_t = 80)]
    terms: usize,
    /// Radii at which the truncated series' maximum modulus is reported.
    #[arg(long, value_delimiter = ',', value_parser = real)]
    radii: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
struct ClassifyArgs {
    #[arg(long, value_parser = real)]
    rho: f64,
    #[arg(long, value_parser = real)]
    b: f64,
    /// Sequence `c*k^p`, `c*sqrt(k)` or `c*k`.
    #[arg(long)]
    seq: String,
    #[arg(long, default_value_t = 200)]
    terms: usize,
}

#[derive(Debug, Args, Serialize)]
struct DiscriminateArgs {
    /// Signal, e.g. `gauss(center=0,width=1,freq=0.5)+hermite(order=1)`.
    #[arg(long)]
    f: String,
    #[arg(long)]
    h: String,
    #[command(flatten)]
    window: DefaultWindowArgs,
    /// Defaults to 0.9 times the bound.
    #[arg(long, value_parser = real)]
    tau1: Option<f64>,
    /// Defaults to 0.9 times the bound.
    #[arg(long, value_parser = real)]
    tau2: Option<f64>,
    #[arg(long, default_value_t = 64)]
    n: u64,
    #[arg(long)]
    origin: bool,
    /// Spectrograms match when the largest deviation is at most tol times
    /// the largest magnitude.
    #[arg(long, default_value_t = crate::stft::DEFAULT_MATCH_TOL, value_parser = real)]
    tol: f64,
    /// Aligned residual below which the signals count as equal up to phase;
    /// defaults to --tol.
    #[arg(long, value_parser = real)]
    residual_tol: Option<f64>,
    /// Also write the spectrogram of f as CSV `x,omega,magnitude`.
    #[arg(long)]
    spectrogram_f: Option<String>,
    #[arg(long)]
    spectrogram_h: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct CounterexampleArgs {
    /// Sequence `c*k^p` of zeros λ_k.
    #[arg(long)]
    seq: String,
    #[arg(long, value_parser = real)]
    rho: f64,
    /// Type to compare the fitted growth coefficient with.
    #[arg(long, value_parser = real)]
    b: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16", value_parser = real)]
    radii: Vec<f64>,
    /// Number of product factors kept; chosen from the radii when absent.
    #[arg(long)]
    truncation: Option<usize>,
    /// Zeros ±λ_k, k <= this, at which F is evaluated.
    #[arg(long, default_value_t = 64)]
    check_zeros: usize,
}

#[derive(Debug, Args, Serialize)]
struct ScanWindowArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value_t = 0.0, value_parser = real)]
    omega: f64,
    #[arg(long, default_value_t = -5.0, value_parser = real, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 5.0, value_parser = real, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long, default_value_t = 1001)]
    points: usize,
}

#[derive(Debug, Args, Serialize)]
struct ReconstructArgs {
    /// The signal whose magnitudes are measured.
    #[arg(long)]
    f: String,
    #[command(flatten)]
    window: DefaultWindowArgs,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Signal grid `[-half, half)`.
    #[arg(long, default_value_t = 8.0, value_parser = real)]
    half: f64,
    #[arg(long, default_value_t = 0.0625, value_parser = real)]
    dt: f64,
    #[arg(long, default_value_t = 0.25, value_parser = real)]
    hop: f64,
}

struct Output {
    result: Map<String, Value>,
    csv: String,
    warnings: Vec<String>,
}

fn to_object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("serializable") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn run_bounds(args: &BoundsArgs) -> Result<Output> {
    let b = max_tau_bounds(args.m, args.a)?;
    let warnings = WindowModel::generalized_gaussian(args.a, args.m, 1.0)?.warnings();
    Ok(Output {
        result: to_object(&b),
        csv: csv_table("tau1_max,tau2_max", [vec![fmt_f64(b.tau1_max), fmt_f64(b.tau2_max)]]),
        warnings,
    })
}

fn resolve_taus(m: f64, a: Option<f64>, tau1: Option<f64>, tau2: Option<f64>) -> Result<(f64, f64)> {
    match (tau1, tau2) {
        (Some(t1), Some(t2)) => Ok((t1, t2)),
        _ => {
            let a = a.ok_or_else(|| Error::invalid("--tau1 and --tau2 are required unless --a is given"))?;
            let b = max_tau_bounds(m, a)?;
            Ok((tau1.unwrap_or(0.9 * b.tau1_max), tau2.unwrap_or(0.9 * b.tau2_max)))
        }
    }
}

fn run_sample_set(args: &SampleSetArgs) -> Result<Output> {
    let (tau1, tau2) = resolve_taus(args.m, args.a, args.tau1, args.tau2)?;
    let set = generate_sampling_set(args.m, tau1, tau2, args.n, args.origin, args.a)?;
    let mut result = Map::new();
    result.insert("tau1".into(), json!(tau1));
    result.insert("tau2".into(), json!(tau2));
    result.insert("points".into(), serde_json::to_value(&set.points).expect("serializable"));
    let mut warnings = set.warnings.clone();
    if let Some(a) = args.a {
        warnings.extend(WindowModel::generalized_gaussian(a, args.m, 1.0)?.warnings());
    }
    Ok(Output {
        result,
        csv: points_to_csv(&set.points),
        warnings,
    })
}

fn run_growth(args: &GrowthArgs, quad: &QuadratureConfig) -> Result<Output> {
    let w = args.window.model()?;
    let predicted = predicted_growth(w.m, w.a)?;
    let series = taylor_coefficients(&w, args.terms, quad)?;
    let order = estimate_order(&series)?;
    let type_at_predicted = estimate_type(&series, predicted.order)?;
    let mut result = Map::new();
    result.insert("predicted".into(), serde_json::to_value(&predicted).expect("serializable"));
    result.insert("estimated".into(), serde_json::to_value(&order).expect("serializable"));
    result.insert(
        "type_at_predicted_order".into(),
        serde_json::to_value(&type_at_predicted).expect("serializable"),
    );
    if !args.radii.is_empty() {
        if args.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("radii must be positive"));
        }
        let samples = max_modulus_samples(&series, &args.radii, 256);
        result.insert("max_modulus_samples".into(), json!(samples));
    }
    let rows = [
        ("predicted", &predicted),
        ("tail_regression", &order),
        ("type_at_predicted_order", &type_at_predicted),
    ]
    .into_iter()
    .map(|(name, e)| vec![name.to_string(), fmt_f64(e.order), fmt_f64(e.type_)]);
    Ok(Output {
        result,
        csv: csv_table("method,order,type", rows),
        warnings: w.warnings(),
    })
}

fn run_classify(args: &ClassifyArgs) -> Result<Output> {
    let seq = parse_sequence(&args.seq)?;
    let lambdas = seq.take(args.terms);
    let report = classify_sequence(&lambdas, args.rho, args.b)?;
    let verdict = serde_json::to_value(report.verdict).expect("serializable");
    let row = vec![
        fmt_f64(report.rho),
        fmt_f64(report.b),
        fmt_f64(report.uniq_threshold),
        fmt_f64(report.nonuniq_threshold),
        fmt_f64(report.density),
        verdict.as_str().unwrap_or_default().to_string(),
    ];
    Ok(Output {
        result: to_object(&report),
        csv: csv_table("rho,b,uniq_threshold,nonuniq_threshold,density,verdict", [row]),
        warnings: report.warnings.clone(),
    })
}

fn write_text(path: &str, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::invalid(format!("cannot write `{path}`: {e}")))
}

fn run_discriminate(args: &DiscriminateArgs, quad: &QuadratureConfig) -> Result<Output> {
    let f = parse_signal(&args.f)?;
    let h = parse_signal(&args.h)?;
    let w = args.window.model()?;
    let (tau1, tau2) = resolve_taus(w.m, Some(w.a), args.tau1, args.tau2)?;
    let set = generate_sampling_set(w.m, tau1, tau2, args.n, args.origin, Some(w.a))?;
    let points = set.coordinates();
    let d = Discriminator::new(&w, &points, args.tol)?
        .with_quadrature(*quad)
        .with_residual_tol(args.residual_tol.unwrap_or(args.tol));
    let sf = d.spectrogram(&f)?;
    let sh = d.spectrogram(&h)?;
    if let Some(p) = &args.spectrogram_f {
        write_text(p, &sf.to_csv())?;
    }
    if let Some(p) = &args.spectrogram_h {
        write_text(p, &sh.to_csv())?;
    }
    let report = d.compare(&f, &h, &sf, &sh)?;
    let mut result = to_object(&report);
    result.insert("tau1".into(), json!(tau1));
    result.insert("tau2".into(), json!(tau2));
    result.insert("points".into(), json!(points.len()));
    let verdict = serde_json::to_value(report.verdict).expect("serializable");
    let row = vec![
        fmt_f64(report.max_spectrogram_deviation),
        report.spectrograms_match.to_string(),
        fmt_f64(report.alignment_phase),
        fmt_f64(report.aligned_residual),
        verdict.as_str().unwrap_or_default().to_string(),
    ];
    Ok(Output {
        result,
        csv: csv_table("max_dev,match,alpha,residual,verdict", [row]),
        warnings: w.warnings(),
    })
}

fn run_counterexample(args: &CounterexampleArgs) -> Result<Output> {
    let seq = parse_sequence(&args.seq)?;
    let fit = counterexample_growth_fit(&seq, args.rho, &args.radii, args.truncation)?;
    let k = args.check_zeros.min(fit.truncation);
    let mut max_at_zeros: f64 = 0.0;
    for lambda in seq.take(k) {
        for z in [lambda, -lambda] {
            let v = counterexample_eval(&seq, args.rho, Complex64::new(z, 0.0), Some(fit.truncation))?;
            max_at_zeros = max_at_zeros.max(v.norm());
        }
    }
    let mut result = to_object(&fit);
    result.insert("zeros_checked".into(), json!(2 * k));
    result.insert("max_abs_at_zeros".into(), json!(max_at_zeros));
    if let Some(b) = args.b {
        result.insert("b".into(), json!(b));
        result.insert("coefficient_below_b".into(), json!(fit.coefficient < b));
    }
    let rows = fit
        .radii
        .iter()
        .zip(&fit.log_max_modulus)
        .zip(&fit.maximizing_angles)
        .map(|((r, l), t)| vec![fmt_f64(*r), fmt_f64(*l), fmt_f64(*t)]);
    Ok(Output {
        result,
        csv: csv_table("r,log_max_modulus,maximizing_angle", rows),
        warnings: Vec::new(),
    })
}

fn run_scan_window(args: &ScanWindowArgs, quad: &QuadratureConfig) -> Result<Output> {
    let w = args.window.model()?;
    if args.points < 2 || !(args.lo < args.hi) {
        return Err(Error::invalid("scan needs --lo < --hi and at least two points"));
    }
    let grid = uniform_grid(args.lo, args.hi, args.points);
    let report = window_ambiguity_scan(&w, args.omega, &grid, quad)?;
    let rows = report
        .grid
        .iter()
        .zip(&report.magnitudes)
        .map(|(x, v)| vec![fmt_f64(*x), fmt_f64(*v)]);
    Ok(Output {
        csv: csv_table("xi,magnitude", rows),
        result: to_object(&report),
        warnings: w.warnings(),
    })
}

fn run_reconstruct(args: &ReconstructArgs, seed: u64, quad: &QuadratureConfig) -> Result<Output> {
    let f = parse_signal(&args.f)?;
    let w = args.window.model()?;
    if !(args.half > 0.0 && args.dt > 0.0 && args.hop > 0.0) {
        return Err(Error::invalid("--half, --dt and --hop must be positive"));
    }
    let grid = StftGrid::symmetric(args.half, args.dt, args.hop)?;
    let mags = full_grid_spectrogram(&f, &w, grid, quad)?;
    let rec = gs_reconstruct(&mags, &w, args.iters, seed, quad)?;
    let Representation::GridSamples { values, t0, dt } = &rec.signal.repr else {
        unreachable!("reconstructions are sampled")
    };
    let samples: Vec<(f64, Complex64)> = values
        .iter()
        .enumerate()
        .map(|(j, v)| (t0 + j as f64 * dt, v * rec.signal.gain))
        .collect();
    let truth = f.sampled(&grid.time_grid())?;
    let align = global_phase_residual(&truth, &rec.signal)?;
    let mut result = Map::new();
    result.insert("consistency".into(), json!(rec.consistency));
    result.insert("iterations".into(), json!(rec.iterations));
    result.insert("restarts".into(), json!(rec.restarts));
    result.insert("alpha".into(), json!(align.alpha));
    result.insert("residual".into(), json!(align.residual));
    result.insert("grid".into(), serde_json::to_value(grid).expect("serializable"));
    result.insert(
        "samples".into(),
        json!(samples.iter().map(|(t, v)| [*t, v.re, v.im]).collect::<Vec<_>>()),
    );
    let rows = samples
        .iter()
        .map(|(t, v)| vec![fmt_f64(*t), fmt_f64(v.re), fmt_f64(v.im)]);
    Ok(Output {
        result,
        csv: csv_table("t,re,im", rows),
        warnings: w.warnings(),
    })
}

fn dispatch(cli: &Cli, quad: &QuadratureConfig) -> Result<Output> {
    match &cli.command {
        Command::Bounds(a) => run_bounds(a),
        Command::SampleSet(a) => run_sample_set(a),
        Command::Growth(a) => run_growth(a, quad),
        Command::Classify(a) => run_classify(a),
        Command::Discriminate(a) => run_discriminate(a, quad),
        Command::Counterexample(a) => run_counterexample(a),
        Command::ScanWindow(a) => run_scan_window(a, quad),
        Command::Reconstruct(a) => run_reconstruct(a, cli.seed, quad),
    }
}

fn meta(cli: &Cli, format: Format, quad: &QuadratureConfig, warnings: &[String]) -> Value {
    json!({
        "tool": "phaseless",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "parameters": cli.command,
        "format": format,
        "seed": cli.seed,
        "quadrature": quad,
        "warnings": warnings,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn error_json(kind: &str, message: &str) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}", json!({ "error": kind, "message": message }));
    s
}

fn execute(cli: &Cli) -> Result<()> {
    let quad = QuadratureConfig {
        radius: cli.quad_radius,
        nodes: cli.quad_nodes,
        tol: cli.quad_tol,
    };
    quad.validate()?;
    let format = cli.format.unwrap_or(cli.command.default_format());
    let out = dispatch(cli, &quad)?;
    let meta = meta(cli, format, &quad, &out.warnings);
    let body = match format {
        Format::Json => {
            let mut obj = out.result;
            obj.insert("meta".into(), meta.clone());
            pretty(&Value::Object(obj))
        }
        Format::Csv => out.csv,
    };
    match &cli.output {
        Some(path) => {
            write_text(path, &body)?;
            if format == Format::Csv {
                write_text(&format!("{path}.meta.json"), &pretty(&meta))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::invalid(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            eprintln!("{}", error_json("invalid-parameter", e.to_string().trim()));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}
