//! Seeded trial runner and parameter sweeps.

use nalgebra::DVector;
use rayon::prelude::*;

use super::config::{ExperimentConfig, NoiseSetting};
use crate::error::{invalid, Error, Result};
use crate::measurement::{gen_gaussian_matrix, gen_noise_stream, measure, MeasurementMatrix};
use crate::rng::{derive_seed, stream};
use crate::signal::{assemble_target, DynamicTarget};
use crate::solver::run_streaming;
use crate::theory::PreconditionReport;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "STREAM_ISTA_THREADS";

/// Runs `f` on a pool sized by `STREAM_ISTA_THREADS`, or on the global pool.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, trial as u64)
}

/// Matrix, target and noisy measurements for one trial.
#[derive(Debug, Clone)]
pub struct Instance {
    pub phi: MeasurementMatrix,
    pub target: DynamicTarget,
    pub measurements: Vec<DVector<f64>>,
}

/// Builds the instance for `seed`. Gaussian noise has per-entry standard
/// deviation `noise_level * ||phi a[0]|| / sqrt(m)`; capped noise uses
/// `sigma = noise_level * ||phi a[0]||` and `noise_delta`.
pub fn build_instance(config: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let phi = gen_gaussian_matrix(config.m, config.n, seed)?;
    let target = assemble_target(&config.gen_config(seed))?;
    let clean0 = (phi.entries() * &target.samples[0]).norm();
    let (sigma, mode) = match config.noise {
        NoiseSetting::None => (0.0, None),
        NoiseSetting::Gaussian => (config.noise_level * clean0 / (config.m as f64).sqrt(), config.noise.mode()),
        NoiseSetting::Capped => (config.noise_level * clean0, config.noise.mode()),
    };
    let measurements = target
        .samples
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let noise = match mode {
                Some(mode) => gen_noise_stream(config.m, sigma, config.noise_delta, mode, seed, stream::NOISE_BASE + k as u64)?,
                None => DVector::zeros(config.m),
            };
            measure(&phi, x, &noise)
        })
        .collect::<Result<_>>()?;
    Ok(Instance { phi, target, measurements })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// `||a[kP] - target[kP-1]||` for each measurement.
    pub pre_measurement: Vec<f64>,
    pub max_support: usize,
    pub preconditions: Option<PreconditionReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub trials: Vec<TrialResult>,
}

impl TrialSet {
    pub fn from_trials(trials: Vec<TrialResult>) -> Self {
        let len = trials.first().map_or(0, |t| t.pre_measurement.len());
        let n = trials.len() as f64;
        let mut mean = vec![0.0; len];
        for t in &trials {
            for (m, e) in mean.iter_mut().zip(&t.pre_measurement) {
                *m += e;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; len];
        if trials.len() > 1 {
            for t in &trials {
                for ((s, e), m) in std.iter_mut().zip(&t.pre_measurement).zip(&mean) {
                    *s += (e - m) * (e - m);
                }
            }
            std.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt());
        }
        Self { mean, std, trials }
    }

    /// Steady state of every trial's own curve.
    pub fn per_trial_steady(&self, tail_fraction: f64) -> Result<Vec<f64>> {
        self.trials.iter().map(|t| estimate_steady_state(&t.pre_measurement, tail_fraction)).collect()
    }

    pub fn steady(&self, tail_fraction: f64) -> Result<f64> {
        estimate_steady_state(&self.mean, tail_fraction)
    }

    /// `k,error_mean,error_std` with `k` counting measurements from 1.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("k,error_mean,error_std\n");
        for (k, (m, s)) in self.mean.iter().zip(&self.std).enumerate() {
            out.push_str(&format!("{},{},{}\n", k + 1, m, s));
        }
        out
    }
}

pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialResult> {
    let inst = build_instance(config, trial_seed(config.seed, trial))?;
    let init = DVector::zeros(config.n);
    let trace = run_streaming(&inst.phi, &inst.measurements, &inst.target, &config.solver_config(), &init)?;
    Ok(TrialResult { pre_measurement: trace.pre_measurement_errors(), max_support: trace.max_support(), preconditions: None })
}

/// Runs `config.trials` independent trials; the result depends only on the
/// config, not on scheduling.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialSet> {
    config.validate()?;
    let trials = with_pool(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, t).map_err(|e| Error::Trial { trial: t, source: Box::new(e) }))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(TrialSet::from_trials(trials))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub set: TrialSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    P,
    Mu,
}

/// One averaged curve per value. Trial seeds are shared across values, so
/// neighbouring points are paired comparisons.
pub fn sweep(config: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return invalid("sweep needs at least one value");
    }
    values
        .iter()
        .map(|&value| {
            let mut cfg = config.clone();
            match param {
                SweepParam::P => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return invalid(format!("P must be a positive integer, got {value}"));
                    }
                    cfg.p = value as usize;
                }
                SweepParam::Mu => cfg.mu = value,
            }
            Ok(SweepPoint { value, set: run_trials(&cfg)? })
        })
        .collect()
}

/// Mean of the last `tail_fraction` of `curve` (at least one point).
pub fn estimate_steady_state(curve: &[f64], tail_fraction: f64) -> Result<f64> {
    if curve.len() < 4 {
        return invalid("steady state needs a curve of at least 4 points");
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return invalid("tail_fraction must lie in (0, 1]");
    }
    let tail = ((curve.len() as f64 * tail_fraction).ceil() as usize).clamp(1, curve.len());
    let slice = &curve[curve.len() - tail..];
    Ok(slice.iter().sum::<f64>() / slice.len() as f64)
}

/// Standard error of the mean paired difference `a - b`.
pub fn paired_standard_error(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (var / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRatioCell {
    pub lambda: f64,
    pub s: usize,
    /// Mean over trials of `max_l |Gamma[l]| / S`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QRatioSweep {
    pub cells: Vec<QRatioCell>,
    pub level: f64,
    /// `(S, lambda)` where the ratio crosses `level`, by linear interpolation
    /// between the two grid thresholds that bracket it.
    pub crossings: Vec<(usize, f64)>,
    /// Least-squares `C` in `lambda = C / sqrt(S)` over the crossings.
    pub c_fit: Option<f64>,
}

impl QRatioSweep {
    pub fn csv(&self) -> String {
        let mut out = String::from("lambda,S,ratio\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{}\n", c.lambda, c.s, c.ratio));
        }
        out
    }

    pub fn ratios_for(&self, s: usize) -> Vec<(f64, f64)> {
        self.cells.iter().filter(|c| c.s == s).map(|c| (c.lambda, c.ratio)).collect()
    }
}

/// Interpolated threshold where a non-increasing ratio curve crosses `level`.
pub fn level_crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2).find_map(|w| {
        let ((l0, r0), (l1, r1)) = (w[0], w[1]);
        if r0 >= level && r1 <= level {
            if r0 == r1 {
                Some(0.5 * (l0 + l1))
            } else {
                Some(l0 + (r0 - level) / (r0 - r1) * (l1 - l0))
            }
        } else {
            None
        }
    })
}

/// Least-squares `C` for `lambda = C / sqrt(S)`.
pub fn fit_inverse_sqrt(points: &[(usize, f64)]) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    let num: f64 = points.iter().map(|&(s, l)| l / (s as f64).sqrt()).sum();
    let den: f64 = points.iter().map(|&(s, _)| 1.0 / s as f64).sum();
    Some(num / den)
}

/// Ratio `q_max / S` over a threshold-sparsity grid. The number of switching
/// pairs scales with `S` in the proportion `n_pairs / s` of `config`.
pub fn sweep_lambda_s(config: &ExperimentConfig, lambda_values: &[f64], s_values: &[usize]) -> Result<QRatioSweep> {
    if lambda_values.is_empty() || s_values.is_empty() {
        return invalid("threshold and sparsity grids must be nonempty");
    }
    let mut cells = Vec::with_capacity(lambda_values.len() * s_values.len());
    let mut crossings = Vec::new();
    for &s in s_values {
        let mut row = Vec::with_capacity(lambda_values.len());
        for &lambda in lambda_values {
            let mut cfg = config.clone();
            cfg.s = s;
            cfg.n_pairs = config.n_pairs * s / config.s.max(1);
            cfg.lambda = lambda;
            let set = run_trials(&cfg)?;
            let ratio = set.trials.iter().map(|t| t.max_support as f64 / s as f64).sum::<f64>() / set.trials.len() as f64;
            cells.push(QRatioCell { lambda, s, ratio });
            row.push((lambda, ratio));
        }
        if let Some(l) = level_crossing(&row, config.level) {
            crossings.push((s, l));
        }
    }
    let c_fit = fit_inverse_sqrt(&crossings);
    Ok(QRatioSweep { cells, level: config.level, crossings, c_fit })
}

/// `||a - target|| / ||target||`.
pub fn rmse(a: &DVector<f64>, target: &DVector<f64>) -> Result<f64> {
    if a.len() != target.len() {
        return invalid("dimension mismatch");
    }
    let t = target.norm();
    if t == 0.0 {
        return invalid("relative error is undefined for a zero target");
    }
    Ok((a - target).norm() / t)
}
