//! Flat `key = value` experiment configs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::measurement::NoiseMode;
use crate::signal::GenConfig;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSetting {
    None,
    Gaussian,
    Capped,
}

impl NoiseSetting {
    pub fn mode(self) -> Option<NoiseMode> {
        match self {
            NoiseSetting::None => None,
            NoiseSetting::Gaussian => Some(NoiseMode::GaussianScaled),
            NoiseSetting::Capped => Some(NoiseMode::Capped),
        }
    }

    fn name(self) -> &'static str {
        match self {
            NoiseSetting::None => "none",
            NoiseSetting::Gaussian => "gaussian",
            NoiseSetting::Capped => "capped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    None,
    P,
    Mu,
    LambdaS,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::P => "p",
            SweepAxis::Mu => "mu",
            SweepAxis::LambdaS => "lambda_s",
        }
    }
}

/// Everything needed to reproduce a set of seeded trials.
///
/// `noise_level` is relative in the sweep experiments: the per-entry noise
/// standard deviation is `noise_level * ||phi a[0]|| / sqrt(m)`. In theorem
/// mode it is the absolute noise energy bound `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub n_pairs: usize,
    /// Number of measurements (target samples).
    pub measurements: usize,
    pub beta: f64,
    pub mu: f64,
    pub lambda: f64,
    pub eta: f64,
    pub p: usize,
    pub dl: f64,
    pub tau: f64,
    pub noise: NoiseSetting,
    pub noise_level: f64,
    /// RIP constant used by the capped noise mode outside theorem mode.
    pub noise_delta: f64,
    pub trials: usize,
    pub q: usize,
    pub seed: u64,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub s_values: Vec<usize>,
    /// Target `q_max / S` ratio for the threshold-sparsity fit.
    pub level: f64,
    pub tail_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n: 128,
            s: 8,
            n_pairs: 2,
            measurements: 40,
            beta: 1.0,
            mu: 0.8,
            lambda: 0.05,
            eta: 1.0,
            p: 1,
            dl: 1.0,
            tau: 1.0,
            noise: NoiseSetting::Gaussian,
            noise_level: 0.3,
            noise_delta: 0.0,
            trials: 50,
            q: 32,
            seed: 1,
            sweep_axis: SweepAxis::None,
            sweep_values: Vec::new(),
            lambda_values: Vec::new(),
            s_values: Vec::new(),
            level: 4.0,
            tail_fraction: 0.25,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| Error::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn gen_config(&self, seed: u64) -> GenConfig {
        GenConfig {
            n: self.n,
            s: self.s,
            n_pairs: self.n_pairs,
            len: self.measurements,
            beta: self.beta,
            mu: self.mu,
            seed,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { lambda: self.lambda, eta: self.eta, p: self.p, dl: self.dl, tau: self.tau }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        if self.m == 0 {
            return Err(Error::Config("m must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if !(self.noise_level >= 0.0) {
            return Err(Error::Config("noise_level must be non-negative".into()));
        }
        if !(0.0 < self.tail_fraction && self.tail_fraction <= 1.0) {
            return Err(Error::Config("tail_fraction must lie in (0, 1]".into()));
        }
        self.gen_config(self.seed).validate().map_err(cfg)?;
        self.solver_config().validate().map_err(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "m" => self.m = parse_num(key, v)?,
            "n" => self.n = parse_num(key, v)?,
            "s" => self.s = parse_num(key, v)?,
            "n_pairs" => self.n_pairs = parse_num(key, v)?,
            "measurements" => self.measurements = parse_num(key, v)?,
            "beta" => self.beta = parse_num(key, v)?,
            "mu" => self.mu = parse_num(key, v)?,
            "lambda" => self.lambda = parse_num(key, v)?,
            "eta" => self.eta = parse_num(key, v)?,
            "p" => self.p = parse_num(key, v)?,
            "dl" => self.dl = parse_num(key, v)?,
            "tau" => self.tau = parse_num(key, v)?,
            "noise_mode" => {
                self.noise = match v {
                    "none" => NoiseSetting::None,
                    "gaussian" => NoiseSetting::Gaussian,
                    "capped" => NoiseSetting::Capped,
                    _ => return Err(Error::Config(format!("noise_mode: unknown value {v:?}"))),
                }
            }
            "noise_level" => self.noise_level = parse_num(key, v)?,
            "noise_delta" => self.noise_delta = parse_num(key, v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "q" => self.q = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "sweep_axis" => {
                self.sweep_axis = match v {
                    "none" => SweepAxis::None,
                    "p" | "P" => SweepAxis::P,
                    "mu" => SweepAxis::Mu,
                    "lambda_s" => SweepAxis::LambdaS,
                    _ => return Err(Error::Config(format!("sweep_axis: unknown value {v:?}"))),
                }
            }
            "sweep_values" => self.sweep_values = parse_list(key, v)?,
            "lambda_values" => self.lambda_values = parse_list(key, v)?,
            "s_values" => self.s_values = parse_list(key, v)?,
            "level" => self.level = parse_num(key, v)?,
            "tail_fraction" => self.tail_fraction = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_base(text, Self::default())
    }

    /// Like [`ExperimentConfig::parse`] but starting from `base`.
    pub fn parse_with_base(text: &str, base: Self) -> Result<Self> {
        let mut cfg = base;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "m = {}", self.m);
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "s = {}", self.s);
        let _ = writeln!(out, "n_pairs = {}", self.n_pairs);
        let _ = writeln!(out, "measurements = {}", self.measurements);
        let _ = writeln!(out, "beta = {}", self.beta);
        let _ = writeln!(out, "mu = {}", self.mu);
        let _ = writeln!(out, "lambda = {}", self.lambda);
        let _ = writeln!(out, "eta = {}", self.eta);
        let _ = writeln!(out, "p = {}", self.p);
        let _ = writeln!(out, "dl = {}", self.dl);
        let _ = writeln!(out, "tau = {}", self.tau);
        let _ = writeln!(out, "noise_mode = {}", self.noise.name());
        let _ = writeln!(out, "noise_level = {}", self.noise_level);
        let _ = writeln!(out, "noise_delta = {}", self.noise_delta);
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "q = {}", self.q);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "sweep_axis = {}", self.sweep_axis.name());
        let _ = writeln!(out, "sweep_values = {}", join(&self.sweep_values));
        let _ = writeln!(out, "lambda_values = {}", join(&self.lambda_values));
        let _ = writeln!(out, "s_values = {}", join(&self.s_values));
        let _ = writeln!(out, "level = {}", self.level);
        let _ = writeln!(out, "tail_fraction = {}", self.tail_fraction);
        out
    }
}
