//! Command-line front end. Every subcommand resolves a [`RunConfig`] from an
//! optional TOML file plus flags (flags win), writes its artifacts into the
//! output directory together with `manifest.json`, and with `--check` turns
//! the relevant physical contracts into the exit status.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::floquet::{blocks_from_protocol, build_floquet_from_blocks, FloquetSpec, RabiParams};
use crate::fsl::{export_graph, floquet_fsl, lmg_fsl, Geometry, GraphFormat, LatticeGraph};
use crate::jc::{self, Fig1Options, JCParams, JcError};
use crate::linalg::eigvalsh;
use crate::lmg::{self, HusimiGrid, LMGParams, LmgError, SweepOptions};
use crate::propagate::{evolve, evolve_observe, uniform_grid, EvolveOptions};
use crate::spectra::{self, Law, SpectralEnsemble, UnfoldOptions};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BREACH: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "floquet-lm", version, about = "Driven light-matter models in extended Floquet space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Atomic inversion of the driven JC model from three pipelines.
    JcInversion,
    /// Time-resolved momentum distribution of the Fourier lattice.
    JcMomentum,
    /// Time-averaged magnetization and Husimi PR over a (Δ, ω) grid.
    LmgPhaseDiagram,
    /// Husimi function of an evolved LMG state.
    LmgHusimi {
        /// Also locate the Husimi zeros (stellar representation).
        #[arg(long)]
        zeros: bool,
    },
    /// Magnetization jumps of the slowly driven LMG model.
    LmgJumps,
    /// ⟨Sz⟩ and ⟨E0⟩ on the LMG Floquet lattice for two parameter points.
    Fig7,
    /// Unfolded nearest-neighbour spacing statistics.
    LevelStats {
        #[arg(long)]
        symmetry_resolved: bool,
    },
    /// Fock-state-lattice graph of a model.
    Fsl,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::JcInversion => "jc-inversion",
            Command::JcMomentum => "jc-momentum",
            Command::LmgPhaseDiagram => "lmg-phase-diagram",
            Command::LmgHusimi { .. } => "lmg-husimi",
            Command::LmgJumps => "lmg-jumps",
            Command::Fig7 => "fig7",
            Command::LevelStats { .. } => "level-stats",
            Command::Fsl => "fsl",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Timeint,
    Floquet,
    #[default]
    Both,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// jc, lmg, rabi; level-stats also takes synthetic-poisson and synthetic-wigner.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Parameter overrides, e.g. `--params g0=2 alpha=4`.
    #[arg(long, global = true, num_args = 1.., value_name = "KEY=VAL")]
    params: Vec<String>,
    /// Number of Fourier lattice sites (odd).
    #[arg(long, global = true)]
    sites: Option<usize>,
    /// Final time: a number or an expression like `pi/omega`, `2pi/omega`, `3T`.
    #[arg(long, global = true)]
    t_max: Option<String>,
    /// Number of time samples.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Grid as `NxM`.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Exit with status 2 when a physical contract fails.
    #[arg(long, global = true)]
    check: bool,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    pipeline: Option<Pipeline>,
    /// Also emit the Fock-state-lattice graph of the configured model.
    #[arg(long, global = true)]
    fsl: bool,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, toml::Value>,
    sites: Option<usize>,
    t_max: Option<toml::Value>,
    points: Option<usize>,
    grid: Option<String>,
    check: Option<bool>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    format: Option<Format>,
    pipeline: Option<Pipeline>,
    fsl: Option<bool>,
}

/// Fully resolved configuration, echoed into every manifest.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub model: String,
    /// Model parameters after defaults and overrides.
    pub params: Value,
    /// Command-level settings (sweep ranges, horizons, ...).
    pub settings: BTreeMap<String, Value>,
    pub pipeline: Pipeline,
    pub sites: Option<usize>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub grid: Option<(usize, usize)>,
    pub seed: u64,
    pub format: Format,
    pub check: bool,
    pub fsl: bool,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Breach(Vec<String>),
    Runtime(Error),
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        let e = e.into();
        match &e {
            Error::Config(m) => CliError::Config(m.clone()),
            Error::Jc(JcError::InvalidParams(m)) | Error::Lmg(LmgError::InvalidParams(m)) => {
                CliError::Config(m.clone())
            }
            Error::Floquet(crate::floquet::FloquetError::InvalidSpec(m)) => CliError::Config(m.clone()),
            _ => CliError::Runtime(e),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Entry point of the binary.
pub fn main() -> std::process::ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    std::process::ExitCode::from(run(std::env::args_os()) as u8)
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Config(m)) => {
            eprintln!("configuration error: {m}");
            EXIT_CONFIG
        }
        Err(CliError::Breach(v)) => {
            for m in v {
                eprintln!("contract breach: {m}");
            }
            EXIT_BREACH
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

// ---------------------------------------------------------------------------
// configuration

fn parse_scalar(raw: &str) -> Value {
    if let Ok(i) = raw.parse::<i64>() {
        return json!(i);
    }
    if let Ok(x) = raw.parse::<f64>() {
        return json!(x);
    }
    match raw {
        "true" => json!(true),
        "false" => json!(false),
        _ => json!(raw),
    }
}

fn toml_to_json(v: &toml::Value) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| config_err(e.to_string()))
}

/// Evaluates `t_max` expressions: a product/quotient of factors, each an
/// optional number followed by an optional symbol (`pi`, `π`, `omega`, `ω`, `T`).
pub fn eval_time(expr: &str, omega: f64) -> Result<f64, String> {
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty time expression".into());
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = s.as_str();
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let factor = &rest[..end];
        let split = factor
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_digit() || *c == '.' || *c == 'e' || *c == '-' || *c == '+'))
            .map(|(i, _)| i)
            .unwrap_or(factor.len());
        // "e" could start a number exponent only after a digit
        let (num, sym) = factor.split_at(split);
        let mut f = if num.is_empty() {
            1.0
        } else {
            num.parse::<f64>().map_err(|_| format!("bad number {num:?} in {expr:?}"))?
        };
        f *= match sym {
            "" => 1.0,
            "pi" | "π" => std::f64::consts::PI,
            "omega" | "ω" | "w" => omega,
            "T" => 2.0 * std::f64::consts::PI / omega,
            other => return Err(format!("unknown symbol {other:?} in {expr:?}")),
        };
        if num.is_empty() && sym.is_empty() {
            return Err(format!("empty factor in {expr:?}"));
        }
        value = if op == '*' { value * f } else { value / f };
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{expr:?} is not finite"))
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| config_err(format!("grid {s:?} is not of the form NxM")))?;
    let a: usize = a.trim().parse().map_err(|_| config_err(format!("bad grid {s:?}")))?;
    let b: usize = b.trim().parse().map_err(|_| config_err(format!("bad grid {s:?}")))?;
    if a == 0 || b == 0 {
        return Err(config_err("grid dimensions must be positive"));
    }
    Ok((a, b))
}

/// Raw layered inputs before model-specific resolution.
struct Layered {
    model: Option<String>,
    overrides: BTreeMap<String, Value>,
    sites: Option<usize>,
    t_max: Option<String>,
    points: Option<usize>,
    grid: Option<(usize, usize)>,
    check: bool,
    out_dir: PathBuf,
    seed: u64,
    format: Option<Format>,
    pipeline: Pipeline,
    fsl: bool,
}

fn layer(c: CommonArgs) -> Result<Layered, CliError> {
    let file: FileConfig = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let mut overrides = BTreeMap::new();
    for (k, v) in &file.params {
        overrides.insert(k.clone(), toml_to_json(v)?);
    }
    for item in c.params.iter().flat_map(|s| s.split(',')).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("parameter {item:?} is not KEY=VAL")))?;
        overrides.insert(k.trim().to_string(), parse_scalar(v.trim()));
    }
    let t_max = match (c.t_max, file.t_max) {
        (Some(s), _) => Some(s),
        (None, Some(toml::Value::String(s))) => Some(s),
        (None, Some(toml::Value::Float(x))) => Some(x.to_string()),
        (None, Some(toml::Value::Integer(x))) => Some(x.to_string()),
        (None, Some(other)) => return Err(config_err(format!("t_max {other} is not a time"))),
        (None, None) => None,
    };
    let grid = match c.grid.or(file.grid) {
        Some(g) => Some(parse_grid(&g)?),
        None => None,
    };
    Ok(Layered {
        model: c.model.or(file.model),
        overrides,
        sites: c.sites.or(file.sites),
        t_max,
        points: c.points.or(file.points),
        grid,
        check: c.check || file.check.unwrap_or(false),
        out_dir: c.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("out")),
        seed: c.seed.or(file.seed).unwrap_or(0),
        format: c.format.or(file.format),
        pipeline: c.pipeline.or(file.pipeline).unwrap_or_default(),
        fsl: c.fsl || file.fsl.unwrap_or(false),
    })
}

/// Removes `keys` from the overrides, returning those present.
fn take_settings(over: &mut BTreeMap<String, Value>, keys: &[(&str, Value)]) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    for (k, default) in keys {
        let v = over.remove(*k).unwrap_or_else(|| default.clone());
        out.insert(k.to_string(), v);
    }
    out
}

fn setting_f64(s: &BTreeMap<String, Value>, key: &str) -> Result<f64, CliError> {
    s.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| config_err(format!("setting {key} must be a number")))
}

/// Applies overrides to the serialized defaults of a parameter struct. Keys
/// match case-insensitively; unknown keys are an error.
fn resolve_params<T: Serialize + DeserializeOwned>(
    default: &T,
    over: &BTreeMap<String, Value>,
) -> Result<(T, Value), CliError> {
    let mut v = serde_json::to_value(default).map_err(|e| config_err(e.to_string()))?;
    let map = v.as_object_mut().expect("parameter structs serialize to objects");
    for (k, val) in over {
        let key = map
            .keys()
            .find(|existing| existing.eq_ignore_ascii_case(k))
            .cloned()
            .ok_or_else(|| {
                config_err(format!(
                    "unknown parameter {k:?}; expected one of {:?}",
                    map.keys().collect::<Vec<_>>()
                ))
            })?;
        map.insert(key, val.clone());
    }
    let parsed: T = serde_json::from_value(v.clone()).map_err(|e| config_err(format!("parameters: {e}")))?;
    let echoed = serde_json::to_value(&parsed).map_err(|e| config_err(e.to_string()))?;
    Ok((parsed, echoed))
}

fn jc_params(over: &BTreeMap<String, Value>) -> Result<(JCParams, Value), CliError> {
    let (mut p, _) = resolve_params(&JCParams::default(), over)?;
    if !over.keys().any(|k| k.eq_ignore_ascii_case("n_max")) {
        p.n_max = JCParams::default_cutoff(p.alpha);
    }
    p.validate()?;
    let echoed = serde_json::to_value(p).map_err(|e| config_err(e.to_string()))?;
    Ok((p, echoed))
}

fn lmg_params(default: LMGParams, over: &BTreeMap<String, Value>) -> Result<(LMGParams, Value), CliError> {
    let (p, v) = resolve_params(&default, over)?;
    p.validate()?;
    Ok((p, v))
}

fn rabi_params(over: &BTreeMap<String, Value>) -> Result<(RabiParams, Value), CliError> {
    let (p, v) = resolve_params(&RabiParams::new(1.0, 0.5, 2.0), over)?;
    if !(p.omega > 0.0) {
        return Err(config_err(format!("omega = {}", p.omega)));
    }
    Ok((p, v))
}

fn odd_sites(sites: usize) -> Result<usize, CliError> {
    if sites < 3 || sites % 2 == 0 {
        return Err(config_err(format!("--sites must be odd and at least 3, got {sites}")));
    }
    Ok(sites)
}

fn positive_points(points: usize) -> Result<usize, CliError> {
    if points < 2 {
        return Err(config_err("--points must be at least 2"));
    }
    Ok(points)
}

fn expect_model(l: &Layered, allowed: &[&str]) -> Result<String, CliError> {
    let model = l.model.clone().unwrap_or_else(|| allowed[0].to_string());
    if !allowed.contains(&model.as_str()) {
        return Err(config_err(format!("model {model:?} not supported here; use one of {allowed:?}")));
    }
    Ok(model)
}

fn expect_format(l: &Layered, allowed: &[Format]) -> Result<Format, CliError> {
    let f = l.format.unwrap_or(allowed[0]);
    if !allowed.contains(&f) {
        return Err(config_err(format!("format {f:?} not supported here; use one of {allowed:?}")));
    }
    Ok(f)
}

fn time_or(l: &Layered, omega: f64, default: f64) -> Result<f64, CliError> {
    match &l.t_max {
        Some(s) => {
            let t = eval_time(s, omega).map_err(config_err)?;
            if t <= 0.0 {
                return Err(config_err("--t-max must be positive"));
            }
            Ok(t)
        }
        None => Ok(default),
    }
}

fn base_config(command: &str, model: String, l: &Layered, format: Format) -> RunConfig {
    RunConfig {
        command: command.to_string(),
        model,
        params: Value::Null,
        settings: BTreeMap::new(),
        pipeline: l.pipeline,
        sites: None,
        t_max: None,
        points: None,
        grid: None,
        seed: l.seed,
        format,
        check: l.check,
        fsl: l.fsl,
        out_dir: l.out_dir.clone(),
    }
}

// ---------------------------------------------------------------------------
// outputs

/// Collects written artifacts so the manifest can hash them.
struct Outputs {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let bytes = bytes.as_ref();
        std::fs::write(self.dir.join(name), bytes).map_err(Error::from)?;
        self.files.insert(name.to_string(), blob_hash(bytes));
        log::info!("wrote {}", self.dir.join(name).display());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        text.push('\n');
        self.write(name, text)
    }

    fn finish(self, config: &RunConfig) -> Result<(), CliError> {
        let mut tree = Sha256::new();
        for (name, hash) in &self.files {
            tree.update(format!("{hash} {name}\n"));
        }
        let manifest = json!({
            "config": config,
            "files": self.files,
            "content_hash": hex(&tree.finalize()),
        });
        let mut text = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
        text.push('\n');
        std::fs::write(self.dir.join("manifest.json"), text).map_err(Error::from)?;
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Git-style object hash (`blob <len>\0` header) using SHA-256.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()));
    h.update(bytes);
    hex(&h.finalize())
}

fn csv(header: &[&str], columns: &[&[f64]]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| c[i].to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Accumulates contract outcomes; `--check` turns failures into exit 2.
#[derive(Default)]
struct Checks {
    results: Vec<(String, bool)>,
}

impl Checks {
    fn record(&mut self, what: impl Into<String>, ok: bool) {
        let what = what.into();
        log::info!("{}: {what}", if ok { "ok" } else { "FAILED" });
        self.results.push((what, ok));
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.results
                .iter()
                .map(|(w, ok)| json!({"contract": w, "pass": ok}))
                .collect(),
        )
    }

    fn verdict(self, enabled: bool) -> Result<(), CliError> {
        let failed: Vec<String> = self.results.into_iter().filter(|r| !r.1).map(|r| r.0).collect();
        if enabled && !failed.is_empty() {
            Err(CliError::Breach(failed))
        } else {
            Ok(())
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// commands

fn execute(cli: Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let layered = layer(cli.common)?;
    let mut out = Outputs::new(&layered.out_dir)?;
    let mut checks = Checks::default();
    let config = match &cli.command {
        Command::JcInversion => cmd_jc_inversion(&layered, &mut out, &mut checks)?,
        Command::JcMomentum => cmd_jc_momentum(&layered, &mut out, &mut checks)?,
        Command::LmgPhaseDiagram => cmd_phase_diagram(&layered, &mut out, &mut checks)?,
        Command::LmgHusimi { zeros } => cmd_husimi(&layered, *zeros, &mut out, &mut checks)?,
        Command::LmgJumps => cmd_jumps(&layered, &mut out, &mut checks)?,
        Command::Fig7 => cmd_fig7(&layered, &mut out, &mut checks)?,
        Command::LevelStats { symmetry_resolved } => {
            cmd_level_stats(&layered, *symmetry_resolved, &mut out, &mut checks)?
        }
        Command::Fsl => cmd_fsl(&layered, &mut out, &mut checks)?,
    };
    debug_assert_eq!(config.command, name);
    if config.fsl && name != "fsl" {
        emit_fsl(&config, &mut out)?;
    }
    out.json("checks.json", &checks.to_json())?;
    out.finish(&config)?;
    checks.verdict(config.check)
}

fn cmd_jc_inversion(l: &Layered, out: &mut Outputs, checks: &mut Checks) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["jc"])?;
    let format = expect_format(l, &[Format::Csv, Format::Json])?;
    let (p, pv) = jc_params(&l.overrides)?;
    let sites = odd_sites(l.sites.unwrap_or(1401))?;
    let mut opts = Fig1Options::for_params(&p);
    opts.t_max = time_or(l, p.omega, p.period())?;
    opts.points = positive_points(l.points.unwrap_or(opts.points))?;
    let times = uniform_grid(opts.t_max, opts.points);

    let analytic: Vec<f64> = if p.delta == 0.0 {
        times
            .iter()
            .map(|&t| jc::analytic_inversion(&p, t))
            .collect::<Result<_, _>>()?
    } else {
        vec![f64::NAN; times.len()]
    };
    let timeint = match l.pipeline {
        Pipeline::Floquet => vec![f64::NAN; times.len()],
        _ => jc::inversion_timeint(&p, &times, &opts.evolve)?,
    };
    let (floquet, min_norm) = match l.pipeline {
        Pipeline::Timeint => (vec![f64::NAN; times.len()], f64::NAN),
        _ => jc::inversion_floquet(&p, sites, &times, opts.floquet_tol)?,
    };

    let header = ["t", "analytic", "timeint", "floquet"];
    let cols: [&[f64]; 4] = [&times, &analytic, &timeint, &floquet];
    match format {
        Format::Json => out.json(
            "inversion.json",
            &json!({"t": times, "analytic": analytic, "timeint": timeint, "floquet": floquet}),
        )?,
        _ => out.write("inversion.csv", csv(&header, &cols))?,
    }
    out.write(
        "inversion.svg",
        svg::line_plot(
            "Atomic inversion",
            "t",
            "W(t)",
            &[("analytic", &times, &analytic), ("time integration", &times, &timeint), ("Floquet", &times, &floquet)],
        ),
    )?;

    // Contracts: time integration matches the closed form to 1e-6; the
    // truncated lattice is only trusted up to half the reversal time, where a
    // 5% relative L2 error is allowed.
    let reference = if p.delta == 0.0 { &analytic } else { &timeint };
    let t_tr = std::f64::consts::PI / (2.0 * p.omega);
    let mut summary = json!({"sites": sites, "min_projected_norm": min_norm});
    if l.pipeline != Pipeline::Floquet && p.delta == 0.0 {
        let d = max_abs_diff(&timeint, &analytic);
        summary["max_dev_timeint"] = json!(d);
        checks.record(format!("time integration vs closed form: {d:.3e} < 1e-6"), d < 1e-6);
        if let Some(i) = times.iter().position(|t| (t - 2.0 * t_tr).abs() < 1e-9) {
            let w = timeint[i];
            checks.record(format!("revival W(pi/omega) = {w:.8} within 1e-4 of 1"), (w - 1.0).abs() < 1e-4);
        }
    }
    if l.pipeline != Pipeline::Timeint && reference.iter().all(|x| x.is_finite()) {
        let early: Vec<usize> = (0..times.len()).filter(|&i| times[i] <= 0.5 * t_tr + 1e-12).collect();
        let num: f64 = early.iter().map(|&i| (floquet[i] - reference[i]).powi(2)).sum();
        let den: f64 = early.iter().map(|&i| reference[i].powi(2)).sum();
        let rel = (num / den).sqrt();
        summary["early_relative_l2_floquet"] = json!(rel);
        summary["max_dev_floquet"] = json!(max_abs_diff(&floquet, reference));
        checks.record(
            format!("Floquet lattice of {sites} sites on [0, t_tr/2]: relative L2 error {rel:.3e} < 5%"),
            rel < 0.05,
        );
        let radius = p.g0 * ((p.n_max + 1) as f64).sqrt() / p.omega;
        let spec = FloquetSpec::new(p.omega, sites / 2)?;
        checks.record(
            format!("Bessel localization radius {radius:.1} fits {sites} sites with 25% margin"),
            spec.check_radius(radius),
        );
    }
    out.json("summary.json", &summary)?;

    let mut cfg = base_config("jc-inversion", model, l, format);
    cfg.params = pv;
    cfg.sites = Some(sites);
    cfg.t_max = Some(opts.t_max);
    cfg.points = Some(opts.points);
    Ok(cfg)
}

fn cmd_jc_momentum(l: &Layered, out: &mut Outputs, checks: &mut Checks) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["jc"])?;
    let format = expect_format(l, &[Format::Csv, Format::Json])?;
    let (p, pv) = jc_params(&l.overrides)?;
    let sites = odd_sites(l.sites.unwrap_or(1401))?;
    let t_max = time_or(l, p.omega, p.period())?;
    let points = positive_points(l.points.unwrap_or(201))?;
    let times = uniform_grid(t_max, points);
    let map = jc::run_fig2(&p, sites, &times, 1e-9)?;

    match format {
        Format::Json => out.json("momentum.json", &map)?,
        _ => {
            let mut s = String::from("t");
            for k in &map.momenta {
                let _ = write!(s, ",{k}");
            }
            s.push('\n');
            for (t, row) in map.times.iter().zip(&map.p) {
                let _ = write!(s, "{t}");
                for v in row {
                    let _ = write!(s, ",{v}");
                }
                s.push('\n');
            }
            out.write("momentum.csv", s)?;
        }
    }
    // Rows of the heatmap are time, columns momentum.
    let logp: Vec<f64> = map.p.iter().flatten().map(|v| (v.max(1e-16)).log10()).collect();
    out.write(
        "momentum.svg",
        svg::heatmap("log10 P(k,t)", "k", "t", &map.momenta, &map.times, &logp),
    )?;

    let fit = map.fit_ridge();
    let rel = (fit.slope + p.omega).abs() / p.omega;
    let off = map.off_ridge_mass(0.1);
    checks.record(format!("ridge slope {:.6e} within 1% of -omega (rel. error {rel:.2e})", fit.slope), rel < 0.01);
    out.json(
        "ridge.json",
        &json!({"slope": fit.slope, "intercept": fit.intercept, "relative_error": rel, "off_ridge_mass": off}),
    )?;

    let mut cfg = base_config("jc-momentum", model, l, format);
    cfg.params = pv;
    cfg.sites = Some(sites);
    cfg.t_max = Some(t_max);
    cfg.points = Some(points);
    Ok(cfg)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn cmd_phase_diagram(l: &Layered, out: &mut Outputs, checks: &mut Checks) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["lmg"])?;
    let format = expect_format(l, &[Format::Csv, Format::Json])?;
    let mut over = l.overrides.clone();
    let sweep_defaults = SweepOptions::default();
    let settings = take_settings(
        &mut over,
        &[
            ("delta_min", json!(0.1)),
            ("delta_max", json!(10.0)),
            ("omega_min", json!(0.1)),
            ("omega_max", json!(8.0)),
            ("periods", json!(sweep_defaults.periods)),
            ("max_time", json!(sweep_defaults.max_time)),
            ("samples", json!(sweep_defaults.samples)),
        ],
    );
    let (base, pv) = lmg_params(LMGParams::new(1.0, 1.0, 10.0), &over)?;
    let (nd, nw) = l.grid.unwrap_or((8, 8));
    let deltas = linspace(setting_f64(&settings, "delta_min")?, setting_f64(&settings, "delta_max")?, nd);
    let omegas = linspace(setting_f64(&settings, "omega_min")?, setting_f64(&settings, "omega_max")?, nw);
    if omegas.iter().any(|w| !(*w > 0.0)) || deltas.iter().any(|d| !d.is_finite()) {
        return Err(config_err("sweep ranges need finite Δ and positive ω"));
    }
    let opts = SweepOptions {
        periods: setting_f64(&settings, "periods")?,
        max_time: setting_f64(&settings, "max_time")?,
        samples: setting_f64(&settings, "samples")? as usize,
        ..sweep_defaults
    };
    let pd = lmg::phase_diagram(&deltas, &omegas, &base, &opts);

    let (mut sz_csv, mut pr_csv) = (String::from("delta,omega,sz\n"), String::from("delta,omega,pr\n"));
    let mut sz = Vec::with_capacity(pd.points.len());
    let mut pr = Vec::with_capacity(pd.points.len());
    for (k, pt) in pd.points.iter().enumerate() {
        let (d, w) = (deltas[k % nd], omegas[k / nd]);
        let (a, b) = pt.map(|p| (p.sz_mean, p.pr_mean)).unwrap_or((f64::NAN, f64::NAN));
        let _ = writeln!(sz_csv, "{d},{w},{a}");
        let _ = writeln!(pr_csv, "{d},{w},{b}");
        sz.push(a);
        pr.push(b);
    }
    out.write("sz.csv", sz_csv)?;
    out.write("pr.csv", pr_csv)?;
    if format == Format::Json {
        out.json("phase_diagram.json", &pd)?;
    }
    out.write("sz.svg", svg::heatmap("time-averaged Sz", "Delta", "omega", &deltas, &omegas, &sz))?;
    out.write("pr.svg", svg::heatmap("partition ratio", "Delta", "omega", &deltas, &omegas, &pr))?;

    for (d, w, e) in &pd.failures {
        checks.record(format!("grid point Δ={d}, ω={w} evaluated ({e})"), false);
    }
    if nd >= 2 && nw >= 2 {
        let s = base.s;
        let corner = pd.points.len() - 1;
        let slow: Vec<f64> = pr[..nd].iter().copied().filter(|v| v.is_finite()).collect();
        let weak: Vec<f64> = (0..nw).map(|i| pr[i * nd]).filter(|v| v.is_finite()).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
        checks.record(
            format!("large Δ, large ω corner magnetized: Sz = {:.3} < -0.9 S", sz[corner]),
            sz[corner] < -0.9 * s,
        );
        checks.record(
            format!("corner PR {:.3} above the slowest-ω row mean {:.3}", pr[corner], mean(&slow)),
            pr[corner] > mean(&slow),
        );
        checks.record(
            format!("corner PR {:.3} above the weakest-Δ column mean {:.3}", pr[corner], mean(&weak)),
            pr[corner] > mean(&weak),
        );
    }

    let mut cfg = base_config("lmg-phase-diagram", model, l, format);
    cfg.params = pv;
    cfg.settings = settings;
    cfg.grid = Some((nd, nw));
    Ok(cfg)
}

fn cmd_husimi(l: &Layered, zeros: bool, out: &mut Outputs, checks: &mut Checks) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["lmg"])?;
    let format = expect_format(l, &[Format::Csv, Format::Json])?;
    let (p, pv) = lmg_params(LMGParams::new(0.5, 0.5, 25.0), &l.overrides)?;
    let two_s = p.two_s()?;
    let t = time_or(l, p.omega, 10.0)?;
    let h = lmg::lmg_hamiltonian(&p)?;
    let traj = evolve(&h, &lmg::south_pole(two_s), &[0.0, t], &EvolveOptions::default())?;
    let psi = &traj.states[1];
    let mut grid = HusimiGrid::default_for(two_s);
    if let Some((a, b)) = l.grid {
        grid.n_theta = a;
        grid.n_phi = b;
    }
    let field = lmg::husimi(psi, &grid)?;
    let pr = lmg::partition_ratio(&field)?;
    match format {
        Format::Json => out.json("husimi.json", &field)?,
        _ => {
            let mut buf = Vec::new();
            field.write_csv(&mut buf).map_err(Error::from)?;
            out.write("husimi.csv", buf)?;
        }
    }
    out.write(
        "husimi.svg",
        svg::heatmap("Husimi Q", "phi", "theta", &grid.phis(), &grid.thetas(), &field.values),
    )?;
    let mut summary = json!({"t": t, "partition_ratio": pr, "argmax": field.argmax()});
    if zeros {
        let z = lmg::husimi_zeros(psi)?;
        let listing: Vec<Value> = z
            .listing()
            .into_iter()
            .map(|(th, ph, m)| json!({"theta": th, "phi": ph, "multiplicity": m}))
            .collect();
        out.json("zeros.json", &listing)?;
        summary["zero_count"] = json!(z.z);
        summary["zeros_at_north_pole"] = json!(z.at_infinity);
        checks.record(
            format!("{} finite zeros + {} at the pole = 2S = {two_s}", z.z, z.at_infinity),
            z.z + z.at_infinity == two_s as usize,
        );
        if two_s <= 10 {
            let back = lmg::stellar_reconstruction(&z)?;
            let fid = back.fidelity(psi);
            summary["reconstruction_fidelity"] = json!(fid);
            checks.record(format!("stellar reconstruction fidelity {fid:.12} > 1 - 1e-8"), fid > 1.0 - 1e-8);
        }
    }
    out.json("summary.json", &summary)?;

    let mut cfg = base_config("lmg-husimi", model, l, format);
    cfg.params = pv;
    cfg.t_max = Some(t);
    cfg.grid = Some((grid.n_theta, grid.n_phi));
    cfg.settings.insert("zeros".into(), json!(zeros));
    Ok(cfg)
}

fn cmd_jumps(l: &Layered, out: &mut Outputs, checks: &mut Checks) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["lmg"])?;
    let format = expect_format(l, &[Format::Csv])?;
    let (p, pv) = lmg_params(LMGParams::new(20.0, 0.05, 10.0), &l.overrides)?;
    let two_s = p.two_s()?;
    let t_max = time_or(l, p.omega, 6.0 * p.period())?;
    let points = positive_points(l.points.unwrap_or(6001))?;
    let times = uniform_grid(t_max, points);
    let h = lmg::lmg_hamiltonian(&p)?;
    let s = 0.5 * two_s as f64;
    let mut sz = vec![0.0; times.len()];
    evolve_observe(&h, &lmg::south_pole(two_s), &times, &EvolveOptions::default(), |i, _, psi| {
        sz[i] = psi
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() * (k as f64 - s))
            .sum();
    })?;
    let jumps = lmg::detect_jumps(&times, &sz, p.omega)?;
    out.write("sz.csv", csv(&["t", "sz"], &[&times, &sz]))?;
    let mut s_csv = String::from("t,Sz_before,Sz_after\n");
    for j in &jumps {
        let _ = writeln!(s_csv, "{},{},{}", j.t, j.before, j.after);
    }
    out.write("jumps.csv", s_csv)?;
    out.write("sz.svg", svg::line_plot("Magnetization", "t", "Sz", &[("Sz", &times, &sz)]))?;

    let quarter = std::f64::consts::PI / (2.0 * p.omega);
    let misplaced = jumps
        .iter()
        .filter(|j| {
            let k = (j.t / quarter).round() as i64;
            k % 2 == 0 || (j.t - k as f64 * quarter).abs() > 0.5 * quarter
        })
        .count();
    checks.record(format!("{misplaced} of {} jumps away from cos(ωt) = 0", jumps.len()), misplaced == 0);
    let periods = t_max / p.period();
    if periods >= 6.0 - 1e-9 {
        checks.record(format!("{} jumps over {periods:.1} periods, at least 5", jumps.len()), jumps.len() >= 5);
    }

    let mut cfg = base_config("lmg-jumps", model, l, format);
    cfg.params = pv;
    cfg.t_max = Some(t_max);
    cfg.points = Some(points);
    Ok(cfg)
}

fn cmd_fig7(l: &Layered, out: &mut Outputs, checks: &mut Checks) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["lmg"])?;
    let format = expect_format(l, &[Format::Csv, Format::Json])?;
    let mut over = l.overrides.clone();
    let (a0, b0) = (lmg::point_a(), lmg::point_b());
    let settings = take_settings(
        &mut over,
        &[
            ("delta_a", json!(a0.delta)),
            ("omega_a", json!(a0.omega)),
            ("delta_b", json!(b0.delta)),
            ("omega_b", json!(b0.omega)),
        ],
    );
    let (base, pv) = lmg_params(LMGParams::new(1.0, 1.0, a0.s), &over)?;
    let a = LMGParams {
        delta: setting_f64(&settings, "delta_a")?,
        omega: setting_f64(&settings, "omega_a")?,
        ..base
    };
    let b = LMGParams {
        delta: setting_f64(&settings, "delta_b")?,
        omega: setting_f64(&settings, "omega_b")?,
        ..base
    };
    a.validate()?;
    b.validate()?;
    let sites = odd_sites(l.sites.unwrap_or(101))?;
    let t_max = time_or(l, a.omega, 200.0)?;
    let points = positive_points(l.points.unwrap_or(8001))?;
    let times = uniform_grid(t_max, points);
    let fig = lmg::run_fig7(&a, &b, sites, &times, 1e-9)?;

    match format {
        Format::Json => out.json("fig7.json", &fig)?,
        _ => out.write(
            "fig7.csv",
            csv(&["t", "sz_a", "e0_a", "sz_b", "e0_b"], &[&times, &fig.a.sz, &fig.a.e0, &fig.b.sz, &fig.b.e0]),
        )?,
    }
    out.write(
        "fig7_sz.svg",
        svg::line_plot("<Sz>", "t", "Sz", &[("A", &times, &fig.a.sz), ("B", &times, &fig.b.sz)]),
    )?;
    out.write(
        "fig7_e0.svg",
        svg::line_plot("<E0>", "t", "E0", &[("A", &times, &fig.a.e0), ("B", &times, &fig.b.e0)]),
    )?;

    let range = |v: &[f64]| {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let count = |v: &[f64], w: f64| lmg::oscillation_count(&times, v, 2.0 * std::f64::consts::PI / w, 0.3);
    let summary = json!({
        "a": {"sz_range": range(&fig.a.sz), "e0_range": range(&fig.a.e0),
              "sz_oscillations": count(&fig.a.sz, a.omega), "e0_oscillations": count(&fig.a.e0, a.omega)},
        "b": {"sz_range": range(&fig.b.sz), "e0_range": range(&fig.b.e0),
              "sz_oscillations": count(&fig.b.sz, b.omega), "e0_oscillations": count(&fig.b.e0, b.omega)},
    });
    checks.record(
        format!(
            "A oscillates more strongly than B: Sz range {:.3} > {:.3}",
            range(&fig.a.sz),
            range(&fig.b.sz)
        ),
        range(&fig.a.sz) > range(&fig.b.sz),
    );
    out.json("summary.json", &summary)?;

    let mut cfg = base_config("fig7", model, l, format);
    cfg.params = pv;
    cfg.settings = settings;
    cfg.sites = Some(sites);
    cfg.t_max = Some(t_max);
    cfg.points = Some(points);
    Ok(cfg)
}

fn cmd_level_stats(
    l: &Layered,
    resolved: bool,
    out: &mut Outputs,
    checks: &mut Checks,
) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["lmg", "synthetic-poisson", "synthetic-wigner"])?;
    let format = expect_format(l, &[Format::Csv])?;
    let mut over = l.overrides.clone();
    let mut cfg = base_config("level-stats", model.clone(), l, format);
    let (eigenvalues, sectors, expected) = if model == "lmg" {
        let (p, pv) = lmg_params(LMGParams::new(2.0, 0.25, 10.0), &over)?;
        let sites = odd_sites(l.sites.unwrap_or(201))?;
        let spec = FloquetSpec::new(p.omega, sites / 2)?;
        let hf = lmg::lmg_floquet(&p, &spec)?;
        let eigs = eigvalsh(&hf)?;
        let sectors = if resolved {
            let (p1, _) = lmg::parity_operators(p.two_s()?, spec.m)?;
            Some(spectra::sector_spectra(&hf, &p1)?)
        } else {
            None
        };
        cfg.params = pv;
        cfg.sites = Some(sites);
        (eigs, sectors, true)
    } else {
        if resolved {
            return Err(config_err("--symmetry-resolved needs --model lmg"));
        }
        let settings = take_settings(&mut over, &[("levels", json!(10001))]);
        if let Some(k) = over.keys().next() {
            return Err(config_err(format!("unknown parameter {k:?} for synthetic spectra")));
        }
        let n = settings["levels"]
            .as_u64()
            .ok_or_else(|| config_err("levels must be a positive integer"))? as usize;
        let law = if model == "synthetic-poisson" { Law::Poisson } else { Law::wigner(1)? };
        cfg.settings = settings;
        (spectra::synthetic_spectrum(law, n, l.seed), None, model == "synthetic-wigner")
    };

    let ens = SpectralEnsemble::new(eigenvalues, UnfoldOptions::default())?;
    let full = ens.report()?;
    out.json("spectrum.json", &json!({"eigenvalues": ens.eigenvalues, "window": [ens.window.start, ens.window.end]}))?;
    let mut buf = Vec::new();
    ens.histogram.write_csv(&mut buf).map_err(Error::from)?;
    out.write("hist.csv", buf)?;
    let centres: Vec<f64> = ens.histogram.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
    let poisson: Vec<f64> = centres.iter().map(|&s| Law::Poisson.density(s)).collect();
    let wigner: Vec<f64> = centres.iter().map(|&s| Law::wigner(1).map(|w| w.density(s)).unwrap_or(f64::NAN)).collect();
    out.write(
        "hist.svg",
        svg::line_plot(
            "Spacing distribution",
            "s",
            "P(s)",
            &[("data", &centres, &ens.histogram.densities), ("Poisson", &centres, &poisson), ("Wigner", &centres, &wigner)],
        ),
    )?;
    checks.record(
        format!(
            "repulsion verdict {} (P(s<{}) = {:.4}, Poisson {:.4}), expected {expected}",
            full.verdict, full.references.s0, full.frac_below, full.references.poisson
        ),
        full.verdict == expected,
    );
    if model == "lmg" {
        let ratio = full.frac_below / full.references.poisson;
        checks.record(
            format!("small-spacing weight {ratio:.3} of the Poisson expectation, below 0.5"),
            ratio < 0.5,
        );
    }
    let report = match sectors {
        Some([plus, minus]) => {
            let rp = SpectralEnsemble::new(plus, UnfoldOptions::default())?.report()?;
            let rm = SpectralEnsemble::new(minus, UnfoldOptions::default())?.report()?;
            json!({"full": full, "sectors": {"+1": rp, "-1": rm}})
        }
        None => json!({"full": full}),
    };
    out.json("report.json", &report)?;
    cfg.settings.insert("symmetry_resolved".into(), json!(resolved));
    Ok(cfg)
}

/// Graph(s) of the configured model: `(stem, graph, geometry)`.
fn model_graphs(
    model: &str,
    params: &Value,
    sites: usize,
) -> Result<Vec<(String, LatticeGraph, String)>, CliError> {
    let over: BTreeMap<String, Value> = params
        .as_object()
        .map(|m| m.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
        .unwrap_or_default();
    let m = sites / 2;
    Ok(match model {
        "jc" => {
            let (p, _) = jc_params(&over)?;
            let spec = FloquetSpec::new(p.omega, m)?;
            let blocks = blocks_from_protocol(&jc::jc_hamiltonian(&p)?, p.omega).map_err(Error::from)?;
            let f = floquet_fsl(&build_floquet_from_blocks(&blocks, &spec).map_err(Error::from)?)?;
            vec![("jc_floquet".into(), f.graph, format!("{:?}", f.geometry))]
        }
        "rabi" => {
            let (p, _) = rabi_params(&over)?;
            let spec = FloquetSpec::new(p.omega, m)?;
            let f = floquet_fsl(&p.floquet(&spec).map_err(Error::from)?)?;
            vec![("rabi_floquet".into(), f.graph, format!("{:?}", f.geometry))]
        }
        _ => {
            let (p, _) = lmg_params(LMGParams::new(2.0, 0.25, 3.0), &over)?;
            let st = lmg_fsl(p.two_s()?, p.delta, p.lambda)?;
            let spec = FloquetSpec::new(p.omega, m)?;
            let f = floquet_fsl(&lmg::lmg_floquet(&p, &spec)?)?;
            vec![
                ("lmg_static".into(), st.graph, "TwoChains".into()),
                ("lmg_floquet".into(), f.graph, format!("{:?}", f.geometry)),
            ]
        }
    })
}

fn write_graphs(
    out: &mut Outputs,
    graphs: &[(String, LatticeGraph, String)],
    format: GraphFormat,
) -> Result<(), CliError> {
    let ext = match format {
        GraphFormat::Dot => "dot",
        GraphFormat::Json => "json",
    };
    for (stem, g, _) in graphs {
        out.write(&format!("{stem}.{ext}"), export_graph(g, format)?)?;
    }
    Ok(())
}

fn cmd_fsl(l: &Layered, out: &mut Outputs, checks: &mut Checks) -> Result<RunConfig, CliError> {
    let model = expect_model(l, &["lmg", "jc", "rabi"])?;
    let format = expect_format(l, &[Format::Dot, Format::Json])?;
    let sites = odd_sites(l.sites.unwrap_or(11))?;
    // Small default systems keep graphs readable.
    let params = match model.as_str() {
        "jc" => {
            let mut over = l.overrides.clone();
            over.entry("alpha".into()).or_insert(json!(0.3));
            over.entry("omega".into()).or_insert(json!(0.5));
            jc_params(&over)?.1
        }
        "rabi" => rabi_params(&l.overrides)?.1,
        _ => lmg_params(LMGParams::new(2.0, 0.25, 3.0), &l.overrides)?.1,
    };
    let graphs = model_graphs(&model, &params, sites)?;
    let gf = if format == Format::Json { GraphFormat::Json } else { GraphFormat::Dot };
    write_graphs(out, &graphs, gf)?;

    let mut summary = serde_json::Map::new();
    for (stem, g, geometry) in &graphs {
        let rebuilt = g.to_operator();
        summary.insert(
            stem.clone(),
            json!({"nodes": g.nodes.len(), "edges": g.edges.len() / 2, "components": g.components.len(),
                   "geometry": geometry, "pairing_defect": g.pairing_defect(), "dimension": rebuilt.dim()}),
        );
    }
    for (stem, g, geometry) in &graphs {
        let expected = match stem.as_str() {
            "lmg_static" => Some((g.components.len() == 2, "two chains")),
            "lmg_floquet" => Some((geometry == &format!("{:?}", Geometry::SquareLattice), "tilted square lattice")),
            "rabi_floquet" => Some((geometry.starts_with("SpinFlipChain"), "spin-flip chain")),
            "jc_floquet" => Some((geometry.starts_with("DecoupledChains"), "decoupled chains")),
            _ => None,
        };
        if let Some((ok, what)) = expected {
            checks.record(format!("{stem} is a {what} ({geometry})"), ok);
        }
        checks.record(
            format!("{stem} edge pairing defect {:.1e} < 1e-12", g.pairing_defect()),
            g.pairing_defect() < 1e-12,
        );
    }
    out.json("summary.json", &summary)?;

    let mut cfg = base_config("fsl", model, l, format);
    cfg.params = params;
    cfg.sites = Some(sites);
    Ok(cfg)
}

/// `--fsl` on any other command: graph of the configured model.
fn emit_fsl(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let model = match cfg.model.as_str() {
        "jc" | "rabi" | "lmg" => cfg.model.as_str(),
        other => return Err(config_err(format!("--fsl has no graph for model {other:?}"))),
    };
    let sites = cfg.sites.unwrap_or(11).min(41) | 1;
    let graphs = model_graphs(model, &cfg.params, sites)?;
    let gf = if cfg.format == Format::Json { GraphFormat::Json } else { GraphFormat::Dot };
    let renamed: Vec<(String, LatticeGraph, String)> = graphs
        .into_iter()
        .map(|(stem, g, geo)| (format!("fsl_{stem}"), g, geo))
        .collect();
    write_graphs(out, &renamed, gf)
}
