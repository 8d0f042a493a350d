//! Flat key=value experiment configs with CLI overrides.
//!
//! One `key = value` pair per line, `#` starts a comment, later keys win.
//! Every key is also exposed as a `spinctl run` flag that overrides the
//! file value.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use spinsim::{GlobalScheme, LocalScheme, Scheme};

use crate::CliError;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    /// Noiseless optimization trajectories and evaluation-count summary.
    Convergence,
    /// Averaged fidelity/population dynamics plus best-run controls.
    Dynamics,
    /// Global-vs-local comparison under depolarizing noise.
    NoiseCompare,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Convergence => "convergence",
            Experiment::Dynamics => "dynamics",
            Experiment::NoiseCompare => "noise-compare",
        };
        f.write_str(name)
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "convergence" => Ok(Experiment::Convergence),
            "dynamics" => Ok(Experiment::Dynamics),
            "noise-compare" => Ok(Experiment::NoiseCompare),
            other => Err(format!(
                "unknown experiment '{other}' (expected convergence, dynamics, or noise-compare)"
            )),
        }
    }
}

/// Which control parameterizations to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeChoice {
    Local,
    Global,
    Both,
}

impl fmt::Display for SchemeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SchemeChoice::Local => "local",
            SchemeChoice::Global => "global",
            SchemeChoice::Both => "both",
        };
        f.write_str(name)
    }
}

impl FromStr for SchemeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "local" => Ok(SchemeChoice::Local),
            "global" => Ok(SchemeChoice::Global),
            "both" => Ok(SchemeChoice::Both),
            other => Err(format!("unknown scheme '{other}' (expected local, global, or both)")),
        }
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Chain length `N`.
    pub n_sites: usize,
    /// Evolution time `T`.
    pub horizon: f64,
    /// Trotter slice count `L`.
    pub n_slices: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub scheme: SchemeChoice,
    /// Independent optimization runs `R`.
    pub realizations: usize,
    /// Base seed; realization `r` uses `seed + r`.
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    /// Local-scheme box half-width (default 2π).
    pub local_bound: f64,
    /// Local-scheme init half-width: angles start in `U(-v, v)`.
    pub local_init: f64,
    /// Global-scheme curvature box half-width.
    pub c_bound: f64,
    /// Global-scheme curvature init half-width.
    pub c_init: f64,
    /// Profile-center anchors; default `di = 0`, `df = N - 1`.
    pub di: Option<f64>,
    pub df: Option<f64>,
    /// Depolarizing probability per qubit per layer (noise-compare only).
    pub noise_p: f64,
    /// Control-effort penalty weight λ.
    pub lambda: f64,
    /// Output directory for CSV artifacts.
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Convergence,
            n_sites: 3,
            horizon: 2.0,
            n_slices: 8,
            jx: 1.0,
            jy: 1.0,
            jz: 0.2,
            scheme: SchemeChoice::Both,
            realizations: 10,
            seed: 1234,
            tol: 1e-4,
            max_iters: 500,
            local_bound: 2.0 * std::f64::consts::PI,
            local_init: 0.5,
            c_bound: 3.0,
            c_init: 0.5,
            di: None,
            df: None,
            noise_p: 1e-3,
            lambda: 0.0,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_field<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("key '{key}': cannot parse '{value}': {e}")))
}

impl ExperimentConfig {
    /// Parse a key=value config file over the defaults.
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Apply one key=value assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "experiment" => self.experiment = parse_field(key, value)?,
            "n" => self.n_sites = parse_field(key, value)?,
            "t" => self.horizon = parse_field(key, value)?,
            "l" => self.n_slices = parse_field(key, value)?,
            "jx" => self.jx = parse_field(key, value)?,
            "jy" => self.jy = parse_field(key, value)?,
            "jz" => self.jz = parse_field(key, value)?,
            "scheme" => self.scheme = parse_field(key, value)?,
            "realizations" => self.realizations = parse_field(key, value)?,
            "seed" => self.seed = parse_field(key, value)?,
            "tol" => self.tol = parse_field(key, value)?,
            "max_iters" => self.max_iters = parse_field(key, value)?,
            "local_bound" => self.local_bound = parse_field(key, value)?,
            "local_init" => self.local_init = parse_field(key, value)?,
            "c_bound" => self.c_bound = parse_field(key, value)?,
            "c_init" => self.c_init = parse_field(key, value)?,
            "di" => self.di = Some(parse_field(key, value)?),
            "df" => self.df = Some(parse_field(key, value)?),
            "noise_p" => self.noise_p = parse_field(key, value)?,
            "lambda" => self.lambda = parse_field(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Invariant checks beyond per-field parsing.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.n_sites < 2 {
            return bad("n must be at least 2");
        }
        if self.n_slices < 2 {
            return bad("l must be at least 2");
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("t must be positive and finite");
        }
        for (name, v) in [("jx", self.jx), ("jy", self.jy), ("jz", self.jz)] {
            if !v.is_finite() {
                return Err(CliError::Config(format!("{name} must be finite")));
            }
        }
        if self.realizations < 1 {
            return bad("realizations must be at least 1");
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be positive and finite");
        }
        if !(self.local_bound.is_finite() && self.local_bound > 0.0) {
            return bad("local_bound must be positive and finite");
        }
        if self.local_init < 0.0 || self.local_init > self.local_bound {
            return bad("local_init must lie within [0, local_bound]");
        }
        if !(self.c_bound.is_finite() && self.c_bound > 0.0) {
            return bad("c_bound must be positive and finite");
        }
        if self.c_init < 0.0 || self.c_init > self.c_bound {
            return bad("c_init must lie within [0, c_bound]");
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return bad("noise_p must lie within [0, 1]");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be non-negative and finite");
        }
        let di = self.di_value();
        let df = self.df_value();
        if !di.is_finite() || !df.is_finite() {
            return bad("di and df must be finite");
        }
        Ok(())
    }

    pub fn di_value(&self) -> f64 {
        self.di.unwrap_or(0.0)
    }

    pub fn df_value(&self) -> f64 {
        self.df.unwrap_or((self.n_sites - 1) as f64)
    }

    /// Instantiate one of the two parameterizations with the configured
    /// bounds and init overrides applied.
    pub fn build_scheme(&self, choice: SchemeChoice) -> Result<Scheme, CliError> {
        match choice {
            SchemeChoice::Local => {
                let mut scheme = LocalScheme::new(self.n_slices, self.n_sites)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                scheme.bound = self.local_bound;
                scheme.init = (-self.local_init, self.local_init);
                Ok(Scheme::Local(scheme))
            }
            SchemeChoice::Global => {
                let mut scheme =
                    GlobalScheme::new(self.n_slices, self.di_value(), self.df_value())
                        .map_err(|e| CliError::Config(e.to_string()))?;
                scheme.c_bound = self.c_bound;
                scheme.c_init = (-self.c_init, self.c_init);
                Ok(Scheme::Global(scheme))
            }
            SchemeChoice::Both => {
                Err(CliError::Config("internal: build_scheme needs a single scheme".into()))
            }
        }
    }

    /// The single schemes this run covers, in reporting order.
    pub fn scheme_list(&self) -> Vec<SchemeChoice> {
        match self.scheme {
            SchemeChoice::Local => vec![SchemeChoice::Local],
            SchemeChoice::Global => vec![SchemeChoice::Global],
            SchemeChoice::Both => vec![SchemeChoice::Local, SchemeChoice::Global],
        }
    }
}
