//! Command-line front end: `compute`, `decompose`, and `verify`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use opradius::bounds::bound_spec;
use opradius::harness::{run_suite, EnsembleKind, SuiteConfig};
use opradius::linalg::{abs_op, aluthge, cartesian, polar_decompose};
use opradius::radius::{davis_wielandt, f_radius, numerical_radius, q_radius, OptimizerOptions};
use opradius::{CMatrix, OperatorTuple, RadiusEstimate, ScalarMap};
use serde_json::{json, Value};

pub const DEFAULT_MAP: &str = "power:2";
pub const DEFAULT_SUITE_SEED: u64 = 42;
pub const SEED_ENV: &str = "OPRADIUS_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Compute,
    Decompose,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RadiusKind {
    Numerical,
    F,
    Q,
    Dw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Parsed command line.
#[derive(Clone, Debug, PartialEq, Parser)]
#[command(name = "opradius", version, about = "Generalized operator radii of complex matrices")]
pub struct CliConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Matrix JSON file; repeat to form a tuple in order.
    #[arg(long = "in", value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    /// Defaults to `numerical` for one input and `f` otherwise.
    #[arg(long, value_enum)]
    pub radius: Option<RadiusKind>,
    /// Map spec such as `power:2`, `power:1/2`, `expm1`, `log1p`, `id`.
    /// `compute` defaults to power:2; `verify` defaults to the six standard maps.
    #[arg(long)]
    pub map: Option<String>,
    /// Exponent for `--radius q`.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Optimizer step tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Bound ids to check; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub bounds: Vec<String>,
    /// Ensemble kinds for `verify`.
    #[arg(long, value_delimiter = ',', default_values_t = default_ensembles())]
    pub ensembles: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn default_ensembles() -> Vec<String> {
    ["ginibre", "gue_hermitian", "haar_unitary", "nilpotent_jordan", "psd"].map(String::from).to_vec()
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl CliConfig {
    pub fn parse_args<I, T>(argv: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        Self::try_parse_from(argv)
    }

    /// Argument vector (program name first) that parses back to `self`.
    pub fn render(&self) -> Vec<String> {
        let mut argv = vec!["opradius".to_string(), value_name(&self.command)];
        let mut push = |flag: &str, value: String| {
            argv.push(format!("--{flag}"));
            argv.push(value);
        };
        for p in &self.inputs {
            push("in", p.display().to_string());
        }
        if let Some(r) = &self.radius {
            push("radius", value_name(r));
        }
        if let Some(m) = &self.map {
            push("map", m.clone());
        }
        push("q", self.q.to_string());
        if let Some(r) = self.restarts {
            push("restarts", r.to_string());
        }
        if let Some(s) = self.seed {
            push("seed", s.to_string());
        }
        if let Some(t) = self.tolerance {
            push("tolerance", t.to_string());
        }
        push("dims", join(&self.dims));
        push("ns", join(&self.ns));
        push("trials", self.trials.to_string());
        if !self.bounds.is_empty() {
            push("bounds", join(&self.bounds));
        }
        push("ensembles", join(&self.ensembles));
        if let Some(o) = &self.out {
            push("out", o.display().to_string());
        }
        push("format", value_name(&self.format));
        argv
    }

    fn optimizer(&self) -> OptimizerOptions {
        let mut opts = OptimizerOptions::default();
        opts.restarts = self.restarts;
        if let Some(s) = self.seed {
            opts.seed = s;
        }
        if let Some(t) = self.tolerance {
            opts.step_tol = t;
        }
        opts
    }

    fn map(&self) -> Result<ScalarMap, String> {
        ScalarMap::parse(self.map.as_deref().unwrap_or(DEFAULT_MAP)).map_err(|e| e.to_string())
    }
}

/// Failure of a command: exit status and a one-line diagnostic.
#[derive(Debug)]
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

impl From<opradius::Error> for Failure {
    fn from(e: opradius::Error) -> Self {
        usage(e.to_string())
    }
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_tuple(cfg: &CliConfig) -> Result<OperatorTuple, Failure> {
    if cfg.inputs.is_empty() {
        return Err(usage("at least one --in PATH is required"));
    }
    let ops = cfg.inputs.iter().map(|p| read_matrix(p)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
    Ok(OperatorTuple::new(ops)?)
}

fn single(tuple: &OperatorTuple, kind: &str) -> Result<CMatrix, Failure> {
    match tuple.ops() {
        [t] => Ok(t.clone()),
        ops => Err(usage(format!("--radius {kind} takes exactly one --in, got {}", ops.len()))),
    }
}

fn compute(cfg: &CliConfig) -> Result<String, Failure> {
    let tuple = read_tuple(cfg)?;
    let kind = cfg.radius.unwrap_or(if tuple.len() == 1 { RadiusKind::Numerical } else { RadiusKind::F });
    let opts = cfg.optimizer();
    let (map, est): (Option<String>, RadiusEstimate) = match kind {
        RadiusKind::Numerical => (None, numerical_radius(&single(&tuple, "numerical")?)?),
        RadiusKind::F => {
            let f = cfg.map().map_err(usage)?;
            (Some(f.name().to_string()), f_radius(&tuple, &f, &opts)?)
        }
        RadiusKind::Q => {
            let f = ScalarMap::power(cfg.q)?;
            (Some(f.name().to_string()), q_radius(&tuple, cfg.q, &opts)?)
        }
        RadiusKind::Dw => {
            let f = cfg.map().map_err(usage)?;
            (Some(f.name().to_string()), davis_wielandt(&single(&tuple, "dw")?, &f, &opts)?)
        }
    };
    Ok(match cfg.format {
        Format::Json => {
            let mut v = json!({ "radius": value_name(&kind), "map": map, "n": tuple.len(), "dim": tuple.dim() });
            if let (Value::Object(out), Ok(Value::Object(e))) = (&mut v, serde_json::to_value(&est)) {
                out.extend(e);
            }
            pretty(&v)
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "radius: {}", value_name(&kind));
            if let Some(m) = map {
                let _ = writeln!(s, "map: {m}");
            }
            let _ = writeln!(s, "value: {}", est.value);
            let _ = writeln!(s, "witness: {}", vector_text(&est.witness));
            let method = serde_json::to_value(est.method).ok().and_then(|m| m.as_str().map(String::from)).unwrap_or_default();
            let _ = writeln!(s, "method: {method}, starts: {}, converged: {}", est.starts_used, est.converged);
            s
        }
    })
}

fn decompose(cfg: &CliConfig) -> Result<String, Failure> {
    let tuple = read_tuple(cfg)?;
    let mut items = Vec::new();
    let mut text = String::new();
    for (path, t) in cfg.inputs.iter().zip(tuple.ops()) {
        let modulus = abs_op(t)?;
        let polar = polar_decompose(t)?;
        let al = aluthge(t)?;
        let (re, im) = cartesian(t);
        items.push(json!({
            "input": path.display().to_string(),
            "modulus": modulus,
            "polar": polar,
            "aluthge": al,
            "cartesian": { "real": re, "imaginary": im },
        }));
        let _ = writeln!(text, "== {}", path.display());
        for (name, m) in [
            ("|T|", &modulus),
            ("polar isometry U", &polar.isometry),
            ("polar modulus", &polar.modulus),
            ("Aluthge transform", &al),
            ("real part", &re),
            ("imaginary part", &im),
        ] {
            let _ = writeln!(text, "{name}:\n{}", matrix_text(m));
        }
    }
    Ok(match cfg.format {
        Format::Json => pretty(&Value::Array(items)),
        Format::Text => text,
    })
}

fn suite_config(cfg: &CliConfig) -> Result<SuiteConfig, Failure> {
    let kinds = cfg
        .ensembles
        .iter()
        .map(|k| k.parse::<EnsembleKind>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut suite = SuiteConfig::grid(&kinds, &cfg.dims, &cfg.ns, cfg.trials, cfg.seed.unwrap_or(DEFAULT_SUITE_SEED));
    if !cfg.bounds.is_empty() {
        for id in &cfg.bounds {
            bound_spec(id)?;
        }
        suite.bounds = cfg.bounds.clone();
    }
    if let Some(m) = &cfg.map {
        ScalarMap::parse(m)?;
        suite.maps = vec![m.clone()];
    }
    suite.restarts = cfg.restarts;
    Ok(suite)
}

fn verify(cfg: &CliConfig) -> Result<(String, bool), Failure> {
    let report = run_suite(&suite_config(cfg)?)?;
    let body = match cfg.format {
        Format::Json => report.to_json()? + "\n",
        Format::Text => report.render_text(),
    };
    Ok((body, report.overall_pass))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn complex_text(z: opradius::C64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn vector_text(v: &[opradius::C64]) -> String {
    format!("[{}]", v.iter().map(|&z| complex_text(z)).collect::<Vec<_>>().join(", "))
}

fn matrix_text(m: &CMatrix) -> String {
    m.entries()
        .chunks(m.dim())
        .map(|row| format!("  {}", row.iter().map(|&z| complex_text(z)).collect::<Vec<_>>().join("  ")))
        .collect::<Vec<_>>()
        .join("\n")
}

fn emit(cfg: &CliConfig, body: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => stdout.write_all(body.as_bytes()).map_err(|e| usage(format!("stdout: {e}"))),
    }
}

fn dispatch(cfg: &CliConfig, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match cfg.command {
        Command::Compute => emit(cfg, &compute(cfg)?, stdout).map(|_| 0),
        Command::Decompose => emit(cfg, &decompose(cfg)?, stdout).map(|_| 0),
        Command::Verify => {
            let (body, pass) = verify(cfg)?;
            emit(cfg, &body, stdout)?;
            if cfg.out.is_some() {
                let _ = writeln!(stdout, "overall: {}", if pass { "PASS" } else { "FAIL" });
            }
            Ok(if pass { 0 } else { 1 })
        }
    }
}

/// Parses `argv`, runs the command, and returns the exit status:
/// 0 on success or a passing suite, 1 on suite failure, 2 on usage or IO errors.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::parse_args(argv) {
        Ok(cfg) => cfg,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{}", line.trim());
            return 2;
        }
    };
    match dispatch(&cfg, stdout) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}
