//! Theorem mode: small instances where the RIP constant can be enumerated,
//! hypotheses checked, and traces compared against the closed-form bounds.

use nalgebra::DVector;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::experiment::{trial_seed, with_pool};
use crate::error::{invalid, Error, Result};
use crate::measurement::{gen_gaussian_matrix, gen_noise_stream, measure, rip_exact, MeasurementMatrix, NoiseMode, RipMethod, DEFAULT_RIP_BUDGET};
use crate::rng::stream;
use crate::signal::{assemble_target, estimate_beta, estimate_mu_dl, zero_hold, DynamicTarget};
use crate::solver::{lca_simulate, run_streaming, SolverConfig};
use crate::theory::{
    check_thm1_preconditions, check_thm2_preconditions, compute_d, ista_error_bound, ista_one_step_bound, lca_error_bound,
    min_lambda_thm1, min_lambda_thm2, IstaBoundParams, IstaProblem, LcaBoundParams, PreconditionReport,
};

/// Absolute slack on top of every analytic bound.
pub const BOUND_TOL: f64 = 1e-9;

/// Largest RIP constant usable for capped noise generation.
const NOISE_DELTA_MAX: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Dominance {
    pub iterations: usize,
    /// Iterations where the error exceeded the bound by more than the tolerance.
    pub violations: usize,
    /// `max_l (error[l] - bound[l])`.
    pub max_excess: f64,
    /// Iterations breaking the one-step recursion.
    pub step_violations: usize,
    pub max_support: usize,
    pub q: usize,
}

impl Dominance {
    pub fn ok(&self) -> bool {
        self.violations == 0 && self.step_violations == 0 && self.max_support <= self.q
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm1Outcome {
    pub trial: usize,
    pub delta: f64,
    pub lambda: f64,
    pub report: PreconditionReport,
    pub params: Option<IstaBoundParams>,
    /// Present when every hypothesis passed.
    pub dominance: Option<Dominance>,
}

fn capped_measurements(phi: &MeasurementMatrix, target: &DynamicTarget, sigma: f64, delta: f64, seed: u64) -> Result<Vec<DVector<f64>>> {
    let delta = delta.clamp(0.0, NOISE_DELTA_MAX);
    target
        .samples
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let e = gen_noise_stream(phi.rows(), sigma, delta, NoiseMode::Capped, seed, stream::NOISE_BASE + k as u64)?;
            measure(phi, x, &e)
        })
        .collect()
}

/// One Theorem-1 trial. `noise_level` is the noise energy bound `sigma`;
/// `lambda` is raised to the smallest value meeting the energy budget when needed.
pub fn thm1_trial(config: &ExperimentConfig, trial: usize) -> Result<Thm1Outcome> {
    let seed = trial_seed(config.seed, trial);
    let q = config.q;
    let level = config.s + 2 * q;
    if level > config.n {
        return invalid(format!("RIP level S+2q={level} exceeds n={}", config.n));
    }
    let phi = gen_gaussian_matrix(config.m, config.n, seed)?;
    let rip = rip_exact(&phi, level, DEFAULT_RIP_BUDGET)?;
    let delta = rip.delta;
    let target = assemble_target(&config.gen_config(seed))?;
    let sigma = config.noise_level;
    let measurements = capped_measurements(&phi, &target, sigma, delta, seed)?;

    let held = zero_hold(&target, config.p)?;
    let beta = estimate_beta(&target);
    let mu = if held.len() >= 2 { estimate_mu_dl(&held)? / config.dl } else { 0.0 };
    let lambda = match min_lambda_thm1(delta, q, beta, sigma, config.eta) {
        Ok(l) => config.lambda.max(l * (1.0 + 1e-9)),
        Err(_) => config.lambda,
    };
    let init = DVector::zeros(config.n);
    let mut report = check_thm1_preconditions(delta, q, beta, sigma, lambda, config.eta, &init, 0);
    report.delta_method = Some(RipMethod::Exact);
    if !report.all_pass() {
        return Ok(Thm1Outcome { trial, delta, lambda, report, params: None, dominance: None });
    }

    let solver = SolverConfig { lambda, ..config.solver_config() };
    let trace = run_streaming(&phi, &measurements, &target, &solver, &init)?;
    let e1 = trace.records.first().map_or(0.0, |r| r.error);
    let params = IstaBoundParams::new(IstaProblem { delta, eta: config.eta, sigma, lambda, q, mu, dl: config.dl, p: config.p, beta }, e1)?;

    let mut dom = Dominance { iterations: trace.records.len(), violations: 0, max_excess: f64::NEG_INFINITY, step_violations: 0, max_support: trace.max_support(), q };
    for (l, r) in trace.records.iter().enumerate() {
        let excess = r.error - ista_error_bound(l, &params);
        dom.max_excess = dom.max_excess.max(excess);
        if excess > BOUND_TOL {
            dom.violations += 1;
        }
        if l > 0 {
            let step = (&held.samples[l] - &held.samples[l - 1]).norm();
            if r.error > ista_one_step_bound(&params, trace.records[l - 1].error, step) + BOUND_TOL {
                dom.step_violations += 1;
            }
        }
    }
    Ok(Thm1Outcome { trial, delta, lambda, report, params: Some(params), dominance: Some(dom) })
}

pub fn check_theorem1(config: &ExperimentConfig) -> Result<Vec<Thm1Outcome>> {
    with_pool(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| thm1_trial(config, t).map_err(|e| Error::Trial { trial: t, source: Box::new(e) }))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcaDominance {
    pub iterations: usize,
    /// `max_l (error[l] - bound(l tau))` before slack.
    pub max_excess: f64,
    /// `max_l max(0, error[l] - bound(l tau) - slack)`.
    pub max_violation: f64,
    pub violations: usize,
    pub slack: f64,
    pub max_support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm2Outcome {
    pub trial: usize,
    pub delta: f64,
    pub lambda: f64,
    pub report: PreconditionReport,
    pub params: Option<LcaBoundParams>,
    pub coarse: Option<LcaDominance>,
    /// Same instance with every sample repeated `refine` times and `tau / refine`.
    pub fine: Option<LcaDominance>,
}

/// Smallest `mu` with `||a'|| + ||a|| / tau <= mu` on a trajectory sampled every `dt`.
pub fn sampled_mu(trajectory: &[DVector<f64>], tau: f64, dt: f64) -> f64 {
    let n = trajectory.len();
    (0..n)
        .map(|j| {
            let d = match n {
                1 => 0.0,
                _ if j + 1 < n => (&trajectory[j + 1] - &trajectory[j]).norm() / dt,
                _ => (&trajectory[j] - &trajectory[j - 1]).norm() / dt,
            };
            d + trajectory[j].norm() / tau
        })
        .fold(0.0, f64::max)
}

fn lca_dominance(
    phi: &MeasurementMatrix,
    stream: &[DVector<f64>],
    traj: &DynamicTarget,
    params: &LcaBoundParams,
    slack: f64,
) -> Result<LcaDominance> {
    let trace = lca_simulate(phi, stream, traj, params.lambda, params.tau, &DVector::zeros(phi.cols()))?;
    let mut out = LcaDominance { iterations: trace.records.len(), max_excess: f64::NEG_INFINITY, max_violation: 0.0, violations: 0, slack, max_support: trace.max_support() };
    for (l, r) in trace.records.iter().enumerate() {
        let excess = r.error - lca_error_bound(l as f64 * params.tau, params);
        out.max_excess = out.max_excess.max(excess);
        let v = excess - slack;
        if v > BOUND_TOL {
            out.violations += 1;
            out.max_violation = out.max_violation.max(v);
        }
    }
    Ok(out)
}

/// One Theorem-2 trial on the Euler trace. The measurement stream is zero-held
/// by `config.p` to the simulation rate; `mu` is the sampled derivative-energy
/// bound, `beta = max(||a(0)||, tau mu)`, and `lambda` is raised to satisfy the
/// decay condition when possible. `slack_factor * delta * mu * tau` is allowed
/// on top of the bound.
pub fn thm2_trial(config: &ExperimentConfig, trial: usize, slack_factor: f64, refine: usize) -> Result<Thm2Outcome> {
    if refine == 0 {
        return invalid("refine must be at least 1");
    }
    let seed = trial_seed(config.seed, trial);
    let q = config.q;
    let level = config.s + q;
    if level > config.n {
        return invalid(format!("RIP level S+q={level} exceeds n={}", config.n));
    }
    let phi = gen_gaussian_matrix(config.m, config.n, seed)?;
    let delta = rip_exact(&phi, level, DEFAULT_RIP_BUDGET)?.delta;
    let base = assemble_target(&config.gen_config(seed))?;
    let sigma = config.noise_level;
    let base_y = capped_measurements(&phi, &base, sigma, delta, seed)?;
    let traj = zero_hold(&base, config.p)?;
    let stream: Vec<DVector<f64>> = base_y.iter().flat_map(|y| std::iter::repeat_n(y.clone(), config.p)).collect();

    let tau = config.tau;
    let mu = sampled_mu(&traj.samples, tau, tau);
    let e0 = traj.samples[0].norm();
    let beta = e0.max(tau * mu);
    let lambda = match min_lambda_thm2(delta, q, beta, sigma, tau * mu, e0) {
        Ok(l) => config.lambda.max(l * (1.0 + 1e-9)),
        Err(_) => config.lambda,
    };
    let init = DVector::zeros(config.n);
    let d = if delta < 1.0 { compute_d(delta, tau, mu, sigma, lambda, q)? } else { f64::INFINITY };
    let mut report = check_thm2_preconditions(delta, q, beta, sigma, lambda, e0, d, &init, 0);
    report.delta_method = Some(RipMethod::Exact);
    if !report.all_pass() {
        return Ok(Thm2Outcome { trial, delta, lambda, report, params: None, coarse: None, fine: None });
    }
    let params = LcaBoundParams::new(delta, tau, mu, sigma, lambda, q, beta, e0)?;
    let coarse = lca_dominance(&phi, &stream, &traj, &params, slack_factor * delta * mu * tau)?;

    let fine_traj = zero_hold(&traj, refine)?;
    let fine_stream: Vec<DVector<f64>> = stream.iter().flat_map(|y| std::iter::repeat_n(y.clone(), refine)).collect();
    let fine_tau = tau / refine as f64;
    let fine_mu = sampled_mu(&fine_traj.samples, fine_tau, fine_tau);
    let fine_params = LcaBoundParams::new(delta, fine_tau, fine_mu, sigma, lambda, q, e0.max(fine_tau * fine_mu), e0)?;
    let fine = lca_dominance(&phi, &fine_stream, &fine_traj, &fine_params, slack_factor * delta * fine_mu * fine_tau)?;
    Ok(Thm2Outcome { trial, delta, lambda, report, params: Some(params), coarse: Some(coarse), fine: Some(fine) })
}

pub fn check_theorem2(config: &ExperimentConfig, slack_factor: f64, refine: usize) -> Result<Vec<Thm2Outcome>> {
    with_pool(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| thm2_trial(config, t, slack_factor, refine).map_err(|e| Error::Trial { trial: t, source: Box::new(e) }))
            .collect()
    })
}

/// `condition,lhs,rhs,pass` rows for a batch of reports, conditions prefixed by trial.
pub fn preconditions_csv<'a>(reports: impl IntoIterator<Item = (usize, &'a PreconditionReport)>) -> String {
    let mut out = String::from("condition,lhs,rhs,pass\n");
    for (trial, r) in reports {
        out.push_str(&r.to_lines(&format!("trial{trial}.")));
    }
    out
}
