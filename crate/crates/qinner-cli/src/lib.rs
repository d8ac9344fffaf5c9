//! Command implementations for the `qinner` binary.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use quasi_inner::conformal::{psi_boundary, BoundaryGrid};
use quasi_inner::core_functions::{pole_part, rho, FactorSpec, Place};
use quasi_inner::diagnostics::{
    canonical_triangular, classify, spectral_profile, triangular_unitary_check, verify_suite, MAX_TRUNCATION,
};
use quasi_inner::fourier::{compare_streams, quadrature_spec, residue_coeffs, CoefficientStream};
use quasi_inner::sonin::{inductive_map_check, sonin_kernel};
use quasi_inner::QiError;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CoeffMethod {
    Residue,
    Quadrature,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "qinner", version, about = "Quasi-inner symbols: evaluation, coefficients, spectra, Sonin near-kernels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output file; stdout when absent. A `.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ρ(z) at the given points.
    Eval(EvalArgs),
    /// Fourier coefficients of κ = ρ∘ψ.
    Coeffs(CoeffsArgs),
    /// Singular values of the off-diagonal compression.
    Spectrum(SpectrumArgs),
    /// Quasi-innerness verdict over a truncation sweep.
    Classify(ClassifyArgs),
    /// Near-kernel of the truncated diagonal compression.
    Sonin(SoninArgs),
    /// The curve πκ(S¹), or π times its pole part.
    Figure(FigureArgs),
    /// Identity suites, coefficient cross-checks and verdicts in one file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub spec: String,
    /// Point as `re,im`; repeatable.
    #[arg(long = "z", allow_hyphen_values = true)]
    pub points: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 40)]
    pub kmax: usize,
    #[arg(long, value_enum, default_value_t = CoeffMethod::Both)]
    pub method: CoeffMethod,
    #[arg(long, default_value_t = 1 << 14)]
    pub grid: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_terms: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub sweep: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct SoninArgs {
    /// Place set as a comma list, e.g. `inf,2`.
    #[arg(long, value_delimiter = ',', default_value = "inf")]
    pub places: Vec<String>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Larger place set for the inductive map check.
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.5)]
    pub offset: f64,
    #[arg(long)]
    pub pole_part: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

/// Everything that determines a command's output; hashed into every file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub spec: Option<String>,
    pub grid: Option<usize>,
    pub offset: Option<f64>,
    pub n_terms: Option<usize>,
    pub k_max: Option<usize>,
    pub method: Option<CoeffMethod>,
    pub sweep: Vec<usize>,
    pub eps: Option<f64>,
    pub tolerance: Option<f64>,
    pub points: Vec<String>,
    pub places: Vec<String>,
    pub target: Vec<String>,
    pub pole_part: bool,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    fn base(command: &str, format: Format, output: Option<PathBuf>) -> Self {
        RunConfig {
            command: command.into(),
            spec: None,
            grid: None,
            offset: None,
            n_terms: None,
            k_max: None,
            method: None,
            sweep: vec![],
            eps: None,
            tolerance: None,
            points: vec![],
            places: vec![],
            target: vec![],
            pole_part: false,
            format,
            output,
        }
    }

    pub fn from_cli(cli: &Cli) -> Self {
        let f = cli.format;
        let o = cli.out.clone();
        match &cli.command {
            Command::Eval(a) => RunConfig { spec: Some(a.spec.clone()), points: a.points.clone(), ..Self::base("eval", f, o) },
            Command::Coeffs(a) => RunConfig {
                spec: Some(a.spec.clone()),
                k_max: Some(a.kmax),
                method: Some(a.method),
                grid: Some(a.grid),
                n_terms: Some(a.n_terms),
                ..Self::base("coeffs", f, o)
            },
            Command::Spectrum(a) => RunConfig { spec: Some(a.spec.clone()), sweep: vec![a.n], ..Self::base("spectrum", f, o) },
            Command::Classify(a) => RunConfig { spec: Some(a.spec.clone()), sweep: a.sweep.clone(), ..Self::base("classify", f, o) },
            Command::Sonin(a) => RunConfig {
                places: a.places.clone(),
                sweep: vec![a.n],
                eps: Some(a.eps),
                target: a.target.clone().unwrap_or_default(),
                ..Self::base("sonin", f, o)
            },
            Command::Figure(a) => RunConfig {
                spec: Some(a.spec.clone()),
                grid: Some(a.grid),
                offset: Some(a.offset),
                pole_part: a.pole_part,
                ..Self::base("figure", f, o)
            },
            Command::Report(a) => RunConfig { tolerance: Some(a.tolerance), ..Self::base("report", f, o) },
        }
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn spec(&self) -> Result<FactorSpec, CliError> {
        let s = self.spec.as_deref().ok_or_else(|| CliError::parse("missing --spec"))?;
        s.parse().map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn parse(msg: impl Into<String>) -> Self {
        CliError { kind: "parse", message: msg.into() }
    }

    fn resource(msg: impl Into<String>) -> Self {
        CliError { kind: "resource_limit", message: msg.into() }
    }

    pub fn to_json(&self) -> String {
        json!({ "schema_version": SCHEMA_VERSION, "error": self }).to_string()
    }
}

impl From<QiError> for CliError {
    fn from(e: QiError) -> Self {
        let kind = match e {
            QiError::Spec(_) => "parse",
            QiError::Precondition(_) => "precondition",
            _ => "numerical",
        };
        CliError { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { kind: "io", message: e.to_string() }
    }
}

pub enum Payload {
    Json(Value),
    Csv(String),
    Svg(String),
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n > MAX_TRUNCATION {
        return Err(CliError::resource(format!("truncation {n} exceeds {MAX_TRUNCATION}")));
    }
    Ok(())
}

fn parse_point(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || CliError::parse(format!("point `{s}` is not `re,im`"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.trim().parse().map_err(|_| bad())?, 0.0)),
        [re, im] => Ok(Complex64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn parse_place(s: &str) -> Result<Place, CliError> {
    match s.trim() {
        "inf" => Ok(Place::Archimedean),
        p => {
            let q: u64 = p.parse().map_err(|_| CliError::parse(format!("place `{p}` is neither `inf` nor a prime")))?;
            Place::prime(q).map_err(CliError::from)
        }
    }
}

fn parse_places(v: &[String]) -> Result<Vec<Place>, CliError> {
    v.iter().map(|s| parse_place(s)).collect()
}

/// Stream layout {spec, method, entries: [{k, re, im, err}]}.
pub fn stream_json(s: &CoefficientStream) -> Value {
    let entries: Vec<Value> = s
        .values
        .iter()
        .map(|(k, v)| json!({ "k": k, "re": v.re, "im": v.im, "err": s.bound(*k).unwrap_or(f64::NAN) }))
        .collect();
    json!({ "spec": s.spec, "method": s.method, "k_min": s.k_min, "k_max": s.k_max, "entries": entries })
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<Payload, CliError> {
    let spec = cfg.spec()?;
    if cfg.points.is_empty() {
        return Err(CliError::parse("no --z points given"));
    }
    let pts: Vec<Complex64> = cfg.points.iter().map(|p| parse_point(p)).collect::<Result<_, _>>()?;
    let rows: Vec<(Complex64, Result<Complex64, QiError>)> = pts.iter().map(|z| (*z, rho(&spec, *z))).collect();
    match cfg.format {
        Format::Csv => {
            let mut out = String::from("z_re,z_im,re,im,error\n");
            for (z, r) in &rows {
                match r {
                    Ok(v) => writeln!(out, "{:e},{:e},{:e},{:e},", z.re, z.im, v.re, v.im).unwrap(),
                    Err(e) => writeln!(out, "{:e},{:e},,,\"{}\"", z.re, z.im, e.to_string().replace('"', "'")).unwrap(),
                }
            }
            Ok(Payload::Csv(out))
        }
        _ => {
            let entries: Vec<Value> = rows
                .iter()
                .map(|(z, r)| match r {
                    Ok(v) => json!({ "z": [z.re, z.im], "value": [v.re, v.im] }),
                    Err(e) => json!({ "z": [z.re, z.im], "error": e.to_string() }),
                })
                .collect();
            Ok(Payload::Json(json!({ "spec": spec.to_string(), "values": entries })))
        }
    }
}

pub fn cmd_coeffs(cfg: &RunConfig) -> Result<Payload, CliError> {
    let spec = cfg.spec()?;
    let k_max = cfg.k_max.unwrap_or(40);
    let grid = cfg.grid.unwrap_or(1 << 14);
    let method = cfg.method.unwrap_or(CoeffMethod::Both);
    let mut streams = Vec::new();
    if matches!(method, CoeffMethod::Residue | CoeffMethod::Both) {
        let n_terms = if spec.primes().is_empty() { 40 } else { cfg.n_terms.unwrap_or(10_000) };
        streams.push(residue_coeffs(&spec, k_max, n_terms)?);
    }
    if matches!(method, CoeffMethod::Quadrature | CoeffMethod::Both) {
        streams.push(quadrature_spec(&spec, grid, -(k_max as i64), k_max as i64)?);
    }
    let comparison = if streams.len() == 2 { Some(compare_streams(&streams[0], &streams[1])?) } else { None };
    match cfg.format {
        Format::Csv => {
            let mut out = String::from("k,method,re,im,err\n");
            for s in &streams {
                for (k, v) in &s.values {
                    writeln!(out, "{k},{:?},{:e},{:e},{:e}", s.method, v.re, v.im, s.bound(*k).unwrap_or(f64::NAN)).unwrap();
                }
            }
            Ok(Payload::Csv(out))
        }
        _ => Ok(Payload::Json(json!({
            "streams": streams.iter().map(stream_json).collect::<Vec<_>>(),
            "comparison": comparison,
        }))),
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Payload, CliError> {
    let spec = cfg.spec()?;
    let n = cfg.sweep.first().copied().unwrap_or(64);
    check_n(n)?;
    let prof = spectral_profile(&spec, n)?;
    match cfg.format {
        Format::Csv => {
            let mut out = String::from("index,sigma\n");
            for (i, s) in prof.singular_values.iter().enumerate() {
                writeln!(out, "{},{:e}", i + 1, s).unwrap();
            }
            Ok(Payload::Csv(out))
        }
        _ => Ok(Payload::Json(json!({ "spec": spec.to_string(), "profile": prof }))),
    }
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Payload, CliError> {
    let spec = cfg.spec()?;
    for n in &cfg.sweep {
        check_n(*n)?;
    }
    let v = classify(&spec, &cfg.sweep)?;
    Ok(Payload::Json(serde_json::to_value(v).expect("verdict serializes")))
}

pub fn cmd_sonin(cfg: &RunConfig) -> Result<Payload, CliError> {
    let places = parse_places(&cfg.places)?;
    let n = cfg.sweep.first().copied().unwrap_or(256);
    check_n(n)?;
    let eps = cfg.eps.unwrap_or(1e-3);
    let mut report = sonin_kernel(&places, n, eps)?;
    let mut map = None;
    if !cfg.target.is_empty() {
        let target = parse_places(&cfg.target)?;
        let check = inductive_map_check(&places, &target, &report)?;
        report.map_residuals = Some(check.residuals.clone());
        map = Some(check);
    }
    match cfg.format {
        Format::Csv => {
            let mut out = String::from("vector,j,re,im\n");
            for (i, v) in report.kernel_basis.iter().enumerate() {
                for (j, z) in v.iter().enumerate() {
                    writeln!(out, "{i},{j},{:e},{:e}", z.re, z.im).unwrap();
                }
            }
            Ok(Payload::Csv(out))
        }
        _ => Ok(Payload::Json(json!({ "report": report, "map_check": map }))),
    }
}

/// Samples of πκ(e^{iθ}) (or π times the pole part) on the grid.
pub fn figure_curve(spec: &FactorSpec, grid: &BoundaryGrid, pole: bool) -> Result<Vec<Complex64>, QiError> {
    (0..grid.n_points)
        .map(|j| {
            let z = psi_boundary(grid.theta(j));
            let v = if pole { pole_part(spec, z, 30)? } else { rho(spec, z)? };
            Ok(v * PI)
        })
        .collect()
}

fn svg_polyline(values: &[Complex64]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        x0 = x0.min(v.re);
        x1 = x1.max(v.re);
        y0 = y0.min(v.im);
        y1 = y1.max(v.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let size = 800.0;
    let pad = 20.0;
    let scale = (size - 2.0 * pad) / span;
    let mut pts = String::new();
    for v in values {
        let x = pad + (v.re - x0) * scale;
        let y = size - pad - (v.im - y0) * scale;
        write!(pts, "{x:.3},{y:.3} ").unwrap();
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{}\"/>\n</svg>\n",
        pts.trim_end()
    )
}

pub fn cmd_figure(cfg: &RunConfig) -> Result<Payload, CliError> {
    let spec = cfg.spec()?;
    let grid = BoundaryGrid::new(cfg.grid.unwrap_or(4096), cfg.offset.unwrap_or(0.5))?;
    let values = figure_curve(&spec, &grid, cfg.pole_part)?;
    match cfg.format {
        Format::Svg => Ok(Payload::Svg(svg_polyline(&values))),
        Format::Csv => {
            let mut buf = Vec::new();
            quasi_inner::conformal::write_grid_csv(&mut buf, &grid, &values)?;
            Ok(Payload::Csv(String::from_utf8(buf).expect("ascii csv")))
        }
        Format::Json => {
            let pts: Vec<[f64; 3]> = values.iter().enumerate().map(|(j, v)| [grid.theta(j), v.re, v.im]).collect();
            Ok(Payload::Json(json!({ "spec": spec.to_string(), "pole_part": cfg.pole_part, "points": pts })))
        }
    }
}

pub fn cmd_report(cfg: &RunConfig) -> Result<Payload, CliError> {
    let tol = cfg.tolerance.unwrap_or(1e-9);
    let mut suites = Vec::new();
    for s in ["inf", "p:2", "p:3", "inf*p:2", "gauss:3:1"] {
        let spec: FactorSpec = s.parse()?;
        suites.push(verify_suite(&spec, tol)?);
    }
    let mut coeffs = Vec::new();
    for s in ["inf", "p:2"] {
        let spec: FactorSpec = s.parse()?;
        let r = residue_coeffs(&spec, 40, if spec.primes().is_empty() { 40 } else { 10_000 })?;
        let q = quadrature_spec(&spec, 1 << 14, -40, 40)?;
        coeffs.push(json!({ "spec": s, "comparison": compare_streams(&r, &q)? }));
    }
    let mut verdicts = Vec::new();
    for s in ["inf", "p:2", "inf*p:2", "inf*p:2*p:3"] {
        let spec: FactorSpec = s.parse()?;
        let v = classify(&spec, &[32, 64, 128, 256])?;
        verdicts.push(json!({ "spec": s, "decay_class": v.decay_class, "compact": v.compact, "points": v.evidence.points }));
    }
    let (a, b, d) = canonical_triangular(8);
    let tri = triangular_unitary_check(&a, &b, &d)?;
    Ok(Payload::Json(json!({
        "identity_suites": suites,
        "coefficient_checks": coeffs,
        "verdicts": verdicts,
        "triangular_unitary": tri,
    })))
}

pub fn run(cfg: &RunConfig) -> Result<Payload, CliError> {
    match cfg.command.as_str() {
        "eval" => cmd_eval(cfg),
        "coeffs" => cmd_coeffs(cfg),
        "spectrum" => cmd_spectrum(cfg),
        "classify" => cmd_classify(cfg),
        "sonin" => cmd_sonin(cfg),
        "figure" => cmd_figure(cfg),
        "report" => cmd_report(cfg),
        other => Err(CliError::parse(format!("unknown command {other}"))),
    }
}

/// Final file contents with the config hash embedded.
pub fn render(cfg: &RunConfig, payload: Payload) -> Result<String, CliError> {
    let hash = cfg.hash();
    match payload {
        Payload::Json(v) => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": cfg.command,
                "config_hash": hash,
                "config": cfg,
                "result": v,
            });
            Ok(serde_json::to_string_pretty(&doc).expect("json serializes") + "\n")
        }
        Payload::Csv(body) => Ok(format!("# schema_version={SCHEMA_VERSION} config_hash={hash}\n{body}")),
        Payload::Svg(body) => Ok(format!("<!-- schema_version={SCHEMA_VERSION} config_hash={hash} -->\n{body}")),
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn write_output(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            fs::write(path, text)?;
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let meta = json!({
                "schema_version": SCHEMA_VERSION,
                "config_hash": cfg.hash(),
                "created_unix": secs,
                "tool_version": env!("CARGO_PKG_VERSION"),
            });
            fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta).expect("json") + "\n")?;
            Ok(())
        }
    }
}

/// Caps the global thread pool when QH_THREADS is set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("QH_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::parse(format!("QH_THREADS=`{v}` is not an integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError { kind: "resource_limit", message: e.to_string() })?;
    }
    Ok(())
}

pub fn main_with(cli: Cli) -> i32 {
    let cfg = RunConfig::from_cli(&cli);
    let result = configure_threads().and_then(|_| run(&cfg)).and_then(|p| render(&cfg, p)).and_then(|t| write_output(&cfg, &t));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            2
        }
    }
}
