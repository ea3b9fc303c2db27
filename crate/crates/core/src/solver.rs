//! Streaming ISTA and its LCA reading.
//!
//! A new measurement arrives every `P` iterations; iteration `l = kP + i`
//! works against measurement `k` and the zero-held target sample `k`.
//! Nothing waits for convergence between measurements.

use std::io::Write;

use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::measurement::MeasurementMatrix;
use crate::signal::DynamicTarget;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub eta: f64,
    /// Iterations per measurement.
    pub p: usize,
    /// Time taken by one iteration.
    pub dl: f64,
    /// LCA time constant.
    pub tau: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { lambda: 0.1, eta: 1.0, p: 1, dl: 1.0, tau: 1.0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return invalid("lambda must be positive");
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return invalid("eta must be positive");
        }
        if self.p == 0 {
            return invalid("P must be at least 1");
        }
        if !(self.dl > 0.0) || !(self.tau > 0.0) {
            return invalid("dl and tau must be positive");
        }
        Ok(())
    }
}

/// Internal state `u`, output `a = T(u)` and active set.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: DVector<f64>,
    pub a: DVector<f64>,
    pub l: usize,
    pub gamma: Vec<usize>,
    pub lambda: f64,
}

impl SolverState {
    pub fn new(u: DVector<f64>, lambda: f64) -> Self {
        let a = soft_threshold(&u, lambda);
        let gamma = active_indices(&u, lambda);
        Self { u, a, l: 0, gamma, lambda }
    }

    fn set_u(&mut self, u: DVector<f64>) {
        self.a = soft_threshold(&u, self.lambda);
        self.gamma = active_indices(&u, self.lambda);
        self.u = u;
    }
}

/// Entry-wise soft threshold; `|u| <= lambda` maps to zero.
pub fn soft_threshold(u: &DVector<f64>, lambda: f64) -> DVector<f64> {
    u.map(|x| if x.abs() <= lambda { 0.0 } else { x - lambda * x.signum() })
}

/// `{ n : |u_n| > lambda }`.
pub fn active_indices(u: &DVector<f64>, lambda: f64) -> Vec<usize> {
    u.iter().enumerate().filter(|(_, x)| x.abs() > lambda).map(|(i, _)| i).collect()
}

pub fn active_set(state: &SolverState) -> Vec<usize> {
    active_indices(&state.u, state.lambda)
}

/// Indices of the `q` largest magnitudes, ordered by (magnitude desc, index asc).
pub fn top_q_indices(u: &DVector<f64>, q: usize) -> Result<Vec<usize>> {
    if q == 0 || q > u.len() {
        return invalid(format!("q={q} outside 1..={}", u.len()));
    }
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&i, &j| u[j].abs().total_cmp(&u[i].abs()).then(i.cmp(&j)));
    order.truncate(q);
    Ok(order)
}

/// Euclidean norm of the `q` largest-magnitude entries.
pub fn top_q_energy(u: &DVector<f64>, q: usize) -> Result<f64> {
    Ok(top_q_indices(u, q)?.iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt())
}

/// `0.5 ||y - phi a||^2 + lambda ||a||_1`.
pub fn l1_objective(phi: &MeasurementMatrix, y: &DVector<f64>, a: &DVector<f64>, lambda: f64) -> f64 {
    let r = y - phi.entries() * a;
    0.5 * r.norm_squared() + lambda * a.lp_norm(1)
}

fn step(state: &mut SolverState, y: &DVector<f64>, phi: &MeasurementMatrix, eta: f64) {
    let phi_m = phi.entries();
    let residual = y - phi_m * &state.a;
    let u = &state.a + phi_m.tr_mul(&residual) * eta;
    state.set_u(u);
    state.l += 1;
}

/// One gradient step from `a[l]` followed by the threshold.
pub fn ista_iterate(state: &SolverState, y: &DVector<f64>, phi: &MeasurementMatrix, config: &SolverConfig) -> Result<SolverState> {
    config.validate()?;
    if y.len() != phi.rows() || state.u.len() != phi.cols() {
        return invalid("dimension mismatch between state, measurement and matrix");
    }
    let mut next = SolverState { lambda: config.lambda, ..state.clone() };
    step(&mut next, y, phi, config.eta);
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub l: usize,
    pub k: usize,
    pub i: usize,
    /// `||a[l+1] - target[l]||`.
    pub error: f64,
    /// `|Gamma[l+1]|`, the active set of the output whose error is recorded.
    pub gamma_size: usize,
    /// The active set or the target support changed at this iteration.
    pub switched: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub p: usize,
    pub records: Vec<TraceRecord>,
    /// `|Gamma[0]|`.
    pub initial_gamma_size: usize,
    /// `||a[0] - target[0]||`.
    pub initial_error: f64,
    pub final_state: SolverState,
}

impl SolverTrace {
    /// `||a[kP] - target[kP-1]||` for `k = 1..=K`, the last error before
    /// measurement `k` arrives.
    pub fn pre_measurement_errors(&self) -> Vec<f64> {
        self.records.iter().filter(|r| r.i + 1 == self.p).map(|r| r.error).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    pub fn max_support(&self) -> usize {
        self.records.iter().map(|r| r.gamma_size).fold(self.initial_gamma_size, usize::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "l,k,i,error,gamma_size,switch")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{},{},{}", r.l, r.k, r.i, r.error, r.gamma_size, u8::from(r.switched))?;
        }
        Ok(())
    }
}

/// Runs `P` iterations per measurement over the whole stream.
pub fn run_streaming(
    phi: &MeasurementMatrix,
    measurements: &[DVector<f64>],
    target: &DynamicTarget,
    config: &SolverConfig,
    init_u: &DVector<f64>,
) -> Result<SolverTrace> {
    config.validate()?;
    if measurements.len() != target.len() {
        return invalid(format!("{} measurements for {} target samples", measurements.len(), target.len()));
    }
    if init_u.len() != phi.cols() || init_u.iter().any(|x| !x.is_finite()) {
        return invalid("init_u must be finite with one entry per column");
    }
    if measurements.iter().any(|y| y.len() != phi.rows()) || target.samples.iter().any(|t| t.len() != phi.cols()) {
        return invalid("dimension mismatch between measurements, target and matrix");
    }
    let mut state = SolverState::new(init_u.clone(), config.lambda);
    let initial_gamma_size = state.gamma.len();
    let initial_error = target.samples.first().map_or(0.0, |t| (&state.a - t).norm());
    let mut records = Vec::with_capacity(measurements.len() * config.p);
    let mut prev_support: Option<&Vec<usize>> = None;
    for (k, (y, truth)) in measurements.iter().zip(&target.samples).enumerate() {
        let support = &target.support[k];
        for i in 0..config.p {
            let before = state.gamma.clone();
            let l = state.l;
            step(&mut state, y, phi, config.eta);
            let target_switch = i == 0 && prev_support.is_some_and(|s| s != support);
            records.push(TraceRecord {
                l,
                k,
                i,
                error: (&state.a - truth).norm(),
                gamma_size: state.gamma.len(),
                switched: state.gamma != before || target_switch,
            });
        }
        prev_support = Some(support);
    }
    Ok(SolverTrace { p: config.p, records, initial_gamma_size, initial_error, final_state: state })
}

/// Euler discretization of the LCA with step equal to its time constant:
/// streaming ISTA with `eta = 1`, `dl = tau` and one iteration per sample.
///
/// `measurements` and `target` are given at the simulation rate; zero-hold
/// them beforehand to make the solver faster relative to the signal.
pub fn lca_simulate(
    phi: &MeasurementMatrix,
    measurements: &[DVector<f64>],
    target: &DynamicTarget,
    lambda: f64,
    tau: f64,
    init_u: &DVector<f64>,
) -> Result<SolverTrace> {
    let config = SolverConfig { lambda, eta: 1.0, p: 1, dl: tau, tau };
    run_streaming(phi, measurements, target, &config, init_u)
}
