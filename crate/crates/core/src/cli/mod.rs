//! Command-line experiment runner.
//!
//! Settings come from an optional flat `key = value` file and from flags,
//! with flags taking precedence. The merged raw strings are echoed into the
//! report unchanged; [`RunConfig`] holds their validated, typed form.

mod commands;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::check::CheckOptions;
use crate::error::{Error, Result};
use crate::geometry::{ConnectionVariant, GeometryConfig, FINE_STRUCTURE};
use crate::nonlinear_kg::{DeltaForm, DropletScheme, PerturbationSpec, RadialGrid};
use crate::report::{Format, RunReport};
use crate::scalar_field::{Extension, FieldParams, Sector};

pub use commands::run;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "CPN_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "cpn", version, about = "Numerics on CP(N-1): geometry, coset flows, generator fields, scalar-field expansions and droplet solves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fubini-Study metric and connection at a point
    Metric(Flags),
    /// CP(1) geodesic residuals and the Theta equation
    Geodesic(Flags),
    /// Coset flow matrix for a seeded direction, optionally over a tau sweep
    Flow(Flags),
    /// Generator fields: closure, transcribed comparisons, tangent components
    Fields(Flags),
    /// Hermite expansion of the Lommel field
    Expand(Flags),
    /// Droplet solve, or a sweep over tau
    Droplet(Flags),
    /// Full invariant suite
    Check(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Metric(_) => "metric",
            Command::Geodesic(_) => "geodesic",
            Command::Flow(_) => "flow",
            Command::Fields(_) => "fields",
            Command::Expand(_) => "expand",
            Command::Droplet(_) => "droplet",
            Command::Check(_) => "check",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Metric(f)
            | Command::Geodesic(f)
            | Command::Flow(f)
            | Command::Fields(f)
            | Command::Expand(f)
            | Command::Droplet(f)
            | Command::Check(f) => f,
        }
    }
}

/// Every flag is kept as the string the user typed.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Hilbert-space dimension N
    #[arg(long)]
    pub dim: Option<String>,
    /// Density-sphere radius R (default alpha^-1/2)
    #[arg(long)]
    pub radius: Option<String>,
    /// Klein-Gordon coupling alpha
    #[arg(long)]
    pub alpha: Option<String>,
    /// Reduced Planck constant hbar
    #[arg(long)]
    pub hbar: Option<String>,
    /// Flow parameter tau
    #[arg(long)]
    pub tau: Option<String>,
    /// Hermite modes M
    #[arg(long)]
    pub modes: Option<String>,
    /// Radial grid points
    #[arg(long)]
    pub grid: Option<String>,
    /// Outer radius of the radial grid
    #[arg(long)]
    pub rho_max: Option<String>,
    /// Droplet convergence tolerance
    #[arg(long)]
    pub tol: Option<String>,
    /// Seed of the random generator (ChaCha8)
    #[arg(long)]
    pub seed: Option<String>,
    /// Connection variant: levi_civita or printed
    #[arg(long)]
    pub variant: Option<String>,
    /// Report path (default: $CPN_OUTPUT_DIR/<command>.<format>, else stdout)
    #[arg(long)]
    pub output: Option<String>,
    /// Report format: json or csv
    #[arg(long)]
    pub format: Option<String>,
    /// Geodesic rate g
    #[arg(long)]
    pub rate: Option<String>,
    /// Delta Psi form: general or small_tau
    #[arg(long)]
    pub form: Option<String>,
    /// Continuation of the Lommel field to y < 0: analytic, timelike or even
    #[arg(long)]
    pub extension: Option<String>,
    /// Field sector: spacelike or timelike
    #[arg(long)]
    pub sector: Option<String>,
    /// Droplet iteration limit
    #[arg(long)]
    pub max_iter: Option<String>,
    /// Droplet update damping in (0, 1]
    #[arg(long)]
    pub damping: Option<String>,
    /// Tau sweep: comma-separated values, or period:<steps> for one geodesic period
    #[arg(long)]
    pub taus: Option<String>,
    /// Length scale r0 of y = (rho/r0)^2
    #[arg(long)]
    pub r0: Option<String>,
    /// Chart coordinates as comma-separated re,im pairs
    #[arg(long)]
    pub point: Option<String>,
    /// Flat key = value file; flags override its entries
    #[arg(long)]
    pub config: Option<String>,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("dim", &self.dim),
            ("radius", &self.radius),
            ("alpha", &self.alpha),
            ("hbar", &self.hbar),
            ("tau", &self.tau),
            ("modes", &self.modes),
            ("grid", &self.grid),
            ("rho-max", &self.rho_max),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("variant", &self.variant),
            ("output", &self.output),
            ("format", &self.format),
            ("rate", &self.rate),
            ("form", &self.form),
            ("extension", &self.extension),
            ("sector", &self.sector),
            ("max-iter", &self.max_iter),
            ("damping", &self.damping),
            ("taus", &self.taus),
            ("r0", &self.r0),
            ("point", &self.point),
        ]
    }
}

const KEYS: [&str; 22] = [
    "dim", "radius", "alpha", "hbar", "tau", "modes", "grid", "rho-max", "tol", "seed", "variant", "output", "format", "rate",
    "form", "extension", "sector", "max-iter", "damping", "taus", "r0", "point",
];

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// skipped; `_` in keys is read as `-`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigInvalid(format!("line {}: expected key = value, got '{line}'", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::ConfigInvalid(format!("line {}: unknown key '{}'", no + 1, k.trim())));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Raw settings: file entries overridden by flags, plus the command name.
pub fn merge(command: &str, flags: &Flags) -> Result<BTreeMap<String, String>> {
    let mut raw = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigInvalid(format!("config file {path}: {e}")))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in flags.entries() {
        if let Some(v) = v {
            raw.insert(k.to_string(), v.clone());
        }
    }
    raw.insert("command".into(), command.into());
    Ok(raw)
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub dim: usize,
    pub radius: f64,
    pub alpha: f64,
    pub hbar: f64,
    pub tau: f64,
    pub modes: usize,
    pub grid: usize,
    pub rho_max: f64,
    pub tol: f64,
    pub seed: u64,
    pub variant: ConnectionVariant,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub rate: f64,
    pub form: DeltaForm,
    pub extension: Extension,
    pub sector: Sector,
    pub max_iter: usize,
    pub damping: f64,
    pub taus: Option<Vec<f64>>,
    pub r0: f64,
    pub point: Option<Vec<num_complex::Complex64>>,
}

fn bad(key: &str, value: &str, why: &str) -> Error {
    Error::ConfigInvalid(format!("{key} = '{value}': {why}"))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| bad(key, v, "not a number"))?;
    if !x.is_finite() {
        return Err(bad(key, v, "must be finite"));
    }
    Ok(x)
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x = parse_f64(key, v)?;
    if x <= 0.0 {
        return Err(bad(key, v, "must be positive"));
    }
    Ok(x)
}

fn count(key: &str, v: &str, lo: usize, hi: usize) -> Result<usize> {
    let n: usize = v.parse().map_err(|_| bad(key, v, "not a non-negative integer"))?;
    if !(lo..=hi).contains(&n) {
        return Err(bad(key, v, &format!("must lie in {lo}..={hi}")));
    }
    Ok(n)
}

fn parse_taus(v: &str, rate: f64) -> Result<Vec<f64>> {
    if let Some(steps) = v.strip_prefix("period:") {
        let steps = count("taus", steps, 1, 10_000)?;
        return Ok(crate::nonlinear_kg::period_taus(rate, steps));
    }
    v.split(',').map(|s| parse_f64("taus", s.trim())).collect()
}

fn parse_point(v: &str) -> Result<Vec<num_complex::Complex64>> {
    let xs: Vec<f64> = v.split(',').map(|s| parse_f64("point", s.trim())).collect::<Result<_>>()?;
    if xs.is_empty() || !xs.len().is_multiple_of(2) {
        return Err(bad("point", v, "expected re,im pairs"));
    }
    Ok(xs.chunks(2).map(|p| num_complex::Complex64::new(p[0], p[1])).collect())
}

impl RunConfig {
    pub fn from_raw(raw: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| raw.get(k).map(String::as_str);
        let command = get("command").ok_or_else(|| Error::ConfigInvalid("missing command".into()))?.to_string();
        let f = |k: &str, d: f64| get(k).map_or(Ok(d), |v| positive(k, v));
        let rate = f("rate", 1.0)?;
        let modes = get("modes").map_or(Ok(16), |v| count("modes", v, 1, 512))?;
        let default_dim = if command == "droplet" { modes } else { 2 };
        let cfg = Self {
            dim: get("dim").map_or(Ok(default_dim), |v| count("dim", v, 2, 1024))?,
            radius: f("radius", FINE_STRUCTURE.powf(-0.5))?,
            alpha: f("alpha", FINE_STRUCTURE)?,
            hbar: f("hbar", 1.0)?,
            tau: get("tau").map_or(Ok(0.1), |v| parse_f64("tau", v))?,
            modes,
            grid: get("grid").map_or(Ok(161), |v| count("grid", v, crate::nonlinear_kg::MIN_POINTS, 100_000))?,
            rho_max: f("rho-max", 4.0)?,
            tol: f("tol", 1e-6)?,
            seed: get("seed").map_or(Ok(7), |v| v.parse().map_err(|_| bad("seed", v, "not a non-negative integer")))?,
            variant: get("variant").map_or(Ok(ConnectionVariant::default()), str::parse)?,
            output: get("output").map(PathBuf::from),
            format: get("format").map_or(Ok(Format::Json), str::parse)?,
            rate,
            form: get("form").map_or(Ok(DeltaForm::default()), str::parse)?,
            extension: get("extension").map_or(Ok(Extension::default()), str::parse)?,
            sector: match get("sector") {
                None | Some("spacelike") => Sector::Spacelike,
                Some("timelike") => Sector::Timelike,
                Some(v) => return Err(bad("sector", v, "expected spacelike or timelike")),
            },
            max_iter: get("max-iter").map_or(Ok(200), |v| count("max-iter", v, 0, 1_000_000))?,
            damping: f("damping", 0.5)?,
            taus: get("taus").map(|v| parse_taus(v, rate)).transpose()?,
            r0: f("r0", 1.0)?,
            point: get("point").map(parse_point).transpose()?,
            command,
        };
        if cfg.damping > 1.0 {
            return Err(bad("damping", get("damping").unwrap_or_default(), "must lie in (0, 1]"));
        }
        if cfg.command == "droplet" && cfg.dim != cfg.modes {
            return Err(Error::ConfigInvalid(format!(
                "droplet needs dim = modes (the coefficient vector is the state), got dim {} and modes {}",
                cfg.dim, cfg.modes
            )));
        }
        if let Some(p) = &cfg.point {
            if p.len() + 1 != cfg.dim {
                return Err(Error::ConfigInvalid(format!("point has {} coordinates, dim {} needs {}", p.len(), cfg.dim, cfg.dim - 1)));
            }
        }
        Ok(cfg)
    }

    pub fn geometry(&self) -> Result<GeometryConfig> {
        GeometryConfig::new(self.dim, self.radius, self.hbar).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn field(&self) -> FieldParams {
        FieldParams {
            alpha: self.alpha,
            r0: self.r0,
            sector: self.sector,
        }
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.rho_max, self.grid)
    }

    pub fn droplet_scheme(&self) -> Result<DropletScheme> {
        Ok(DropletScheme {
            damping: self.damping,
            max_iter: self.max_iter,
            tol: self.tol,
            grid: self.radial_grid()?,
            perturbation: PerturbationSpec {
                tau: self.tau,
                g: self.rate,
                form: self.form,
                variant: self.variant,
            },
        })
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            seed: self.seed,
            dim: self.dim,
        }
    }

    /// Explicit `--output`, else `$CPN_OUTPUT_DIR/<command>.<ext>`, else
    /// `None` for stdout.
    pub fn output_path(&self, env_dir: Option<&Path>) -> Option<PathBuf> {
        self.output
            .clone()
            .or_else(|| env_dir.map(|d| d.join(format!("{}.{}", self.command, self.format.extension()))))
    }
}

/// Exit status for a finished run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigInvalid(_) => EXIT_CONFIG,
        _ => EXIT_FAILED,
    }
}

/// Writes the report where the config says. The parent directory is created
/// if needed.
pub fn emit(report: &RunReport, cfg: &RunConfig, env_dir: Option<&Path>) -> Result<()> {
    let text = report.serialize(cfg.format)?;
    match cfg.output_path(env_dir) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Parses arguments, runs the command and writes the report. Returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let prepared = merge(cli.command.name(), cli.command.flags()).and_then(|raw| Ok((RunConfig::from_raw(&raw)?, raw)));
    let (cfg, raw) = match prepared {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let outcome = run(&cfg, raw).and_then(|(report, ok)| {
        emit(&report, &cfg, env_dir.as_deref())?;
        Ok(ok)
    });
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("error: {} reported failures", cfg.command);
            EXIT_FAILED
        }
        Err(e) => {
            eprintln!("error: {}: {e}", cfg.command);
            exit_code(&e)
        }
    }
}
