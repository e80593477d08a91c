use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::Failure;

pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_N_T: usize = 128;
pub const DEFAULT_GRID: usize = 201;
pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "berger-cgc", version, about = "Constant Gauss curvature spheres in Berger spheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Existence and Pogorelov thresholds per tau.
    Thresholds,
    /// Phase portraits: grid values and traced contours.
    Phase,
    /// Sphere profiles, reports and meshes.
    Sphere,
    /// Embedded/non-embedded region and its boundary curve.
    EmbedRegion,
    /// Run the invariant suites.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Thresholds => "thresholds",
            Command::Phase => "phase",
            Command::Sphere => "sphere",
            Command::EmbedRegion => "embed-region",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Obj,
}

/// `a:b:n`, `n` equally spaced values from `a` to `b` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start + step * i as f64 })
            .collect()
    }
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected a:b:n, got '{s}'"));
        };
        let start: f64 = a.trim().parse().map_err(|_| format!("bad range start '{a}'"))?;
        let end: f64 = b.trim().parse().map_err(|_| format!("bad range end '{b}'"))?;
        let count: usize = n.trim().parse().map_err(|_| format!("bad range count '{n}'"))?;
        if count == 0 {
            return Err("range must contain at least one value".into());
        }
        if !start.is_finite() || !end.is_finite() {
            return Err("range ends must be finite".into());
        }
        Ok(Self { start, end, count })
    }
}

impl fmt::Display for GridRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.count)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// tau values, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub tau: Vec<f64>,
    /// Curvature values, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub k: Vec<f64>,
    /// tau values as a:b:n.
    #[arg(long, global = true)]
    pub tau_range: Option<GridRange>,
    /// Curvature values as a:b:n.
    #[arg(long, global = true)]
    pub k_range: Option<GridRange>,
    /// Profile samples over the full sphere.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Rotation steps of the mesh.
    #[arg(long = "n-t", global = true)]
    pub n_t: Option<usize>,
    /// Phase grid points per axis.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Relative tolerance of the profile integrator.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output formats.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// TOML file with the same keys (underscored); flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    tau: Option<OneOrMany<f64>>,
    k: Option<OneOrMany<f64>>,
    tau_range: Option<String>,
    k_range: Option<String>,
    samples: Option<usize>,
    n_t: Option<usize>,
    grid: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<OneOrMany<Format>>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub taus: Vec<f64>,
    pub ks: Vec<f64>,
    pub samples: usize,
    pub n_t: usize,
    pub grid: usize,
    pub tol: Option<f64>,
    /// `None` when neither flag nor file named a directory.
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl RunConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    Failure::Config(msg.into()).into()
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn parse_range(s: &str) -> Result<GridRange> {
    s.parse().map_err(config_error)
}

fn values(list: Vec<f64>, range: Option<GridRange>) -> Vec<f64> {
    let mut v = list;
    if let Some(r) = range {
        v.extend(r.values());
    }
    v
}

/// Merges flags over the optional config file and validates the result.
pub fn resolve(command: Command, opts: &Opts) -> Result<RunConfig> {
    let file = match &opts.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };

    // a flag replaces the whole file entry, lists included
    let (taus, ks) = {
        let flag_tau = !opts.tau.is_empty() || opts.tau_range.is_some();
        let flag_k = !opts.k.is_empty() || opts.k_range.is_some();
        let taus = if flag_tau {
            values(opts.tau.clone(), opts.tau_range)
        } else {
            let range = file.tau_range.as_deref().map(parse_range).transpose()?;
            values(file.tau.map(OneOrMany::into_vec).unwrap_or_default(), range)
        };
        let ks = if flag_k {
            values(opts.k.clone(), opts.k_range)
        } else {
            let range = file.k_range.as_deref().map(parse_range).transpose()?;
            values(file.k.map(OneOrMany::into_vec).unwrap_or_default(), range)
        };
        (taus, ks)
    };

    let formats = if !opts.format.is_empty() {
        opts.format.clone()
    } else if let Some(f) = file.format {
        f.into_vec()
    } else {
        vec![Format::Csv]
    };

    let cfg = RunConfig {
        command,
        taus,
        ks,
        samples: opts.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
        n_t: opts.n_t.or(file.n_t).unwrap_or(DEFAULT_N_T),
        grid: opts.grid.or(file.grid).unwrap_or(DEFAULT_GRID),
        tol: opts.tol.or(file.tol),
        out: opts.out.clone().or(file.out),
        formats,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if let Some(t) = cfg.taus.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        bail!(config_error(format!("tau must be positive and finite, got {t}")));
    }
    if let Some(k) = cfg.ks.iter().find(|k| !k.is_finite()) {
        bail!(config_error(format!("K must be finite, got {k}")));
    }
    if cfg.grid < 2 {
        bail!(config_error(format!("grid must be at least 2, got {}", cfg.grid)));
    }
    if cfg.samples < 3 {
        bail!(config_error(format!("samples must be at least 3, got {}", cfg.samples)));
    }
    if cfg.n_t < 3 {
        bail!(config_error(format!("n-t must be at least 3, got {}", cfg.n_t)));
    }
    if let Some(t) = cfg.tol {
        if !(t.is_finite() && t > 0.0) {
            bail!(config_error(format!("tol must be positive, got {t}")));
        }
    }
    let need_tau = matches!(
        cfg.command,
        Command::Phase | Command::Sphere | Command::EmbedRegion
    );
    if need_tau && cfg.taus.is_empty() {
        bail!(config_error(format!("{} needs --tau or --tau-range", cfg.command.name())));
    }
    if need_tau && cfg.ks.is_empty() {
        bail!(config_error(format!("{} needs --k or --k-range", cfg.command.name())));
    }
    Ok(())
}
