//! Closed-form tracking-error bounds for streaming ISTA and the LCA, their
//! hypotheses as checkable reports, and numeric versions of the supporting
//! lemmas.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::measurement::{MeasurementMatrix, RipMethod};
use crate::solver::{active_indices, top_q_indices, soft_threshold, top_q_energy};

/// `|eta - 1| + delta * eta`; requires `0 < eta < 2/(1+delta)` and `0 <= delta < 1`.
pub fn compute_c(eta: f64, delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return invalid(format!("delta={delta} must lie in [0, 1)"));
    }
    let upper = 2.0 / (1.0 + delta);
    if !(eta > 0.0 && eta < upper) {
        return Err(Error::Precondition(format!(
            "step size condition 0 < eta < 2/(1+delta) = {upper} fails for eta={eta}"
        )));
    }
    Ok((eta - 1.0).abs() + delta * eta)
}

fn check_c(c: f64) -> Result<()> {
    if !(0.0..1.0).contains(&c) {
        return invalid(format!("contraction factor c={c} must lie in [0, 1)"));
    }
    Ok(())
}

/// Static offset `(eta sigma + lambda sqrt(q)) / (1 - c)`.
pub fn compute_v(eta: f64, sigma: f64, lambda: f64, q: usize, c: f64) -> Result<f64> {
    check_c(c)?;
    Ok((eta * sigma + lambda * (q as f64).sqrt()) / (1.0 - c))
}

/// `c / (1 - c^P) * mu * dl + V`.
pub fn compute_w(c: f64, p: usize, mu: f64, dl: f64, v: f64) -> Result<f64> {
    check_c(c)?;
    if p == 0 {
        return invalid("P must be at least 1");
    }
    Ok(c / (1.0 - c.powi(p as i32)) * mu * dl + v)
}

/// Problem data entering the ISTA bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IstaProblem {
    /// RIP constant at level `S + 2q`.
    pub delta: f64,
    pub eta: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub q: usize,
    pub mu: f64,
    pub dl: f64,
    pub p: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IstaBoundParams {
    pub c: f64,
    pub v: f64,
    pub w: f64,
    pub q: usize,
    pub delta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub dl: f64,
    pub p: usize,
    pub lambda: f64,
    pub eta: f64,
    pub beta: f64,
    /// `||a[1] - target[0]||`.
    pub e1: f64,
}

impl IstaBoundParams {
    pub fn new(problem: IstaProblem, e1: f64) -> Result<Self> {
        let IstaProblem { delta, eta, sigma, lambda, q, mu, dl, p, beta } = problem;
        let c = compute_c(eta, delta)?;
        let v = compute_v(eta, sigma, lambda, q, c)?;
        let w = compute_w(c, p, mu, dl, v)?;
        Ok(Self { c, v, w, q, delta, sigma, mu, dl, p, lambda, eta, beta, e1 })
    }
}

fn powu(c: f64, n: usize) -> f64 {
    if n > i32::MAX as usize {
        c.powf(n as f64)
    } else {
        c.powi(n as i32)
    }
}

/// Right-hand side bounding `||a[l+1] - target[l]||`.
pub fn ista_error_bound(l: usize, params: &IstaBoundParams) -> f64 {
    let IstaBoundParams { c, v, w, p, mu, dl, e1, .. } = *params;
    let i = l % p;
    powu(c, l) * (e1 - w) + powu(c, i + 1) / (1.0 - powu(c, p)) * mu * dl + v
}

/// Limit of the pre-measurement bound: `V + c^P/(1-c^P) mu dl`.
pub fn ista_steady_state(params: &IstaBoundParams) -> f64 {
    let cp = powu(params.c, params.p);
    params.v + cp / (1.0 - cp) * params.mu * params.dl
}

/// The per-iteration inequality the ISTA bound is built from:
/// `lambda sqrt(q) + eta sigma + c (prev_error + target_step)`.
pub fn ista_one_step_bound(params: &IstaBoundParams, prev_error: f64, target_step: f64) -> f64 {
    params.lambda * (params.q as f64).sqrt() + params.eta * params.sigma + params.c * (prev_error + target_step)
}

/// `(tau mu + sigma + lambda sqrt(q)) / (1 - delta)`.
pub fn compute_d(delta: f64, tau: f64, mu: f64, sigma: f64, lambda: f64, q: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return invalid(format!("delta={delta} must lie in [0, 1)"));
    }
    Ok((tau * mu + sigma + lambda * (q as f64).sqrt()) / (1.0 - delta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcaBoundParams {
    pub d: f64,
    /// RIP constant at level `S + q`.
    pub delta: f64,
    pub tau: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub q: usize,
    pub beta: f64,
    /// `||a(0) - target(0)||`.
    pub e0: f64,
}

impl LcaBoundParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(delta: f64, tau: f64, mu: f64, sigma: f64, lambda: f64, q: usize, beta: f64, e0: f64) -> Result<Self> {
        let d = compute_d(delta, tau, mu, sigma, lambda, q)?;
        Ok(Self { d, delta, tau, mu, sigma, lambda, q, beta, e0 })
    }
}

/// `exp(-(1-delta) t/tau) e0 + (1 - exp(-(1-delta) t/tau)) D`.
pub fn lca_error_bound(t: f64, params: &LcaBoundParams) -> f64 {
    let decay = (-(1.0 - params.delta) * t / params.tau).exp();
    decay * params.e0 + (1.0 - decay) * params.d
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.to_string(), lhs, rhs, pass: lhs <= rhs }
    }

    fn lt(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.to_string(), lhs, rhs, pass: lhs < rhs }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Outcome of checking a theorem's hypotheses on one instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PreconditionReport {
    pub checks: Vec<ConditionCheck>,
    /// How the RIP constant used in the checks was obtained.
    pub delta_method: Option<RipMethod>,
}

impl PreconditionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    /// `condition,lhs,rhs,pass` lines, without header.
    pub fn to_lines(&self, prefix: &str) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(out, "{prefix}{},{},{},{}", c.name, c.lhs, c.rhs, c.pass);
        }
        out
    }
}

fn initial_top_q(init_u: &DVector<f64>, q: usize) -> f64 {
    if q == 0 || init_u.is_empty() {
        return 0.0;
    }
    top_q_energy(init_u, q.min(init_u.len())).unwrap_or(f64::INFINITY)
}

/// Hypotheses of the ISTA tracking bound, with `delta` at level `S + 2q`.
#[allow(clippy::too_many_arguments)]
pub fn check_thm1_preconditions(
    delta: f64,
    q: usize,
    beta: f64,
    sigma: f64,
    lambda: f64,
    eta: f64,
    init_u: &DVector<f64>,
    init_gamma_size: usize,
) -> PreconditionReport {
    let c = (eta - 1.0).abs() + delta * eta;
    let lsq = lambda * (q as f64).sqrt();
    let checks = vec![
        ConditionCheck { name: "step_size".into(), lhs: eta, rhs: 2.0 / (1.0 + delta), pass: eta > 0.0 && eta < 2.0 / (1.0 + delta) },
        ConditionCheck::lt("rip_below_one", delta, 1.0),
        ConditionCheck::lt("contraction", c, 1.0),
        ConditionCheck::le("initial_active", init_gamma_size as f64, q as f64),
        ConditionCheck::le("initial_top_q_energy", initial_top_q(init_u, q), lsq),
        ConditionCheck::le("energy_budget", eta * (1.0 + delta) * beta + eta * sigma, (1.0 - c) * lsq),
    ];
    PreconditionReport { checks, delta_method: None }
}

/// Hypotheses of the LCA tracking bound, with `delta` at level `S + q`.
#[allow(clippy::too_many_arguments)]
pub fn check_thm2_preconditions(
    delta: f64,
    q: usize,
    beta: f64,
    sigma: f64,
    lambda: f64,
    e0: f64,
    d: f64,
    init_u: &DVector<f64>,
    init_gamma_size: usize,
) -> PreconditionReport {
    let lsq = lambda * (q as f64).sqrt();
    let checks = vec![
        ConditionCheck::lt("rip_below_one", delta, 1.0),
        ConditionCheck::le("initial_active", init_gamma_size as f64, q as f64),
        ConditionCheck::le("initial_top_q_energy", initial_top_q(init_u, q), lsq),
        ConditionCheck::le("decay_condition", delta * e0.max(d) + beta + sigma, lsq),
    ];
    PreconditionReport { checks, delta_method: None }
}

/// Smallest threshold satisfying the ISTA energy budget for the given data.
pub fn min_lambda_thm1(delta: f64, q: usize, beta: f64, sigma: f64, eta: f64) -> Result<f64> {
    let c = compute_c(eta, delta)?;
    if q == 0 {
        return invalid("q must be positive");
    }
    Ok((eta * (1.0 + delta) * beta + eta * sigma) / ((1.0 - c) * (q as f64).sqrt()))
}

/// Smallest threshold satisfying the LCA decay condition when the initial
/// error `e0` does not exceed `D`. Requires `delta < 1/2`.
pub fn min_lambda_thm2(delta: f64, q: usize, beta: f64, sigma: f64, tau_mu: f64, e0: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&delta) {
        return invalid(format!("decay condition is unsatisfiable for delta={delta} >= 1/2"));
    }
    if q == 0 {
        return invalid("q must be positive");
    }
    // delta (tau_mu + sigma + x)/(1-delta) + beta + sigma <= x, x = lambda sqrt(q)
    let k = delta / (1.0 - delta);
    let x_d = (beta + sigma + k * (tau_mu + sigma)) / (1.0 - k);
    // if e0 > D the condition reads delta e0 + beta + sigma <= x
    let x_e = delta * e0 + beta + sigma;
    Ok(x_d.max(x_e) / (q as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// The four consequences of the RIP on supports `gamma1 ∪ gamma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipLemmaReport {
    /// `(1-delta)||x||^2 <= ||phi x||^2`.
    pub lower_isometry: InequalityCheck,
    /// `||phi x||^2 <= (1+delta)||x||^2`.
    pub upper_isometry: InequalityCheck,
    /// `||phi_{G1}^T phi_{G1^c ∩ G2} x|| <= delta ||x||`.
    pub cross_gram: InequalityCheck,
    /// `||(I_{G1} - phi_{G1}^T phi_{G1 ∪ G2}) x|| <= delta ||x||`.
    pub identity_defect: InequalityCheck,
    /// `||phi_{G1}^T y|| <= sqrt(1+delta) ||y||`.
    pub adjoint: InequalityCheck,
}

impl RipLemmaReport {
    pub fn checks(&self) -> [InequalityCheck; 5] {
        [self.lower_isometry, self.upper_isometry, self.cross_gram, self.identity_defect, self.adjoint]
    }

    pub fn all_hold(&self, tol: f64) -> bool {
        self.checks().iter().all(|c| c.holds(tol))
    }
}

fn restrict(v: &DVector<f64>, set: &[usize]) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for &i in set {
        out[i] = v[i];
    }
    out
}

/// Evaluates both sides of each RIP consequence for `|gamma1| <= q`,
/// `|gamma2| <= s`, `x` supported on their union, and `delta` the constant
/// at level `s + q`.
#[allow(clippy::too_many_arguments)]
pub fn lemma_rip_inequalities(
    phi: &MeasurementMatrix,
    gamma1: &[usize],
    gamma2: &[usize],
    x: &DVector<f64>,
    y: &DVector<f64>,
    delta: f64,
    q: usize,
    s: usize,
) -> Result<RipLemmaReport> {
    let n = phi.cols();
    if gamma1.len() > q || gamma2.len() > s {
        return invalid(format!("support sizes {}/{} exceed q={q}/S={s}", gamma1.len(), gamma2.len()));
    }
    if gamma1.iter().chain(gamma2).any(|&i| i >= n) {
        return invalid("support index out of range");
    }
    if x.len() != n || y.len() != phi.rows() {
        return invalid("dimension mismatch");
    }
    let mut union: Vec<usize> = gamma1.iter().chain(gamma2).copied().collect();
    union.sort_unstable();
    union.dedup();
    if x.iter().enumerate().any(|(i, v)| *v != 0.0 && union.binary_search(&i).is_err()) {
        return invalid("x is not supported on gamma1 ∪ gamma2");
    }
    let m = phi.entries();
    let xn = x.norm();
    let xn2 = x.norm_squared();
    let phix2 = (m * x).norm_squared();

    let outside: Vec<usize> = gamma2.iter().filter(|i| !gamma1.contains(i)).copied().collect();
    let cross = restrict(&m.tr_mul(&(m * restrict(x, &outside))), gamma1).norm();
    let gram_x = m.tr_mul(&(m * x));
    let defect = (restrict(x, gamma1) - restrict(&gram_x, gamma1)).norm();
    let adj = restrict(&m.tr_mul(y), gamma1).norm();

    Ok(RipLemmaReport {
        lower_isometry: InequalityCheck { lhs: (1.0 - delta) * xn2, rhs: phix2 },
        upper_isometry: InequalityCheck { lhs: phix2, rhs: (1.0 + delta) * xn2 },
        cross_gram: InequalityCheck { lhs: cross, rhs: delta * xn },
        identity_defect: InequalityCheck { lhs: defect, rhs: delta * xn },
        adjoint: InequalityCheck { lhs: adj, rhs: (1.0 + delta).sqrt() * y.norm() },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InactiveCheck {
    /// `||u_Delta|| <= lambda sqrt(q)`.
    pub premise: bool,
    pub top_q: Vec<usize>,
    pub active: Vec<usize>,
    /// `Some(|active| <= q && active ⊆ top_q)` when the premise holds.
    pub conclusion: Option<bool>,
}

pub fn lemma_inactive_check(u: &DVector<f64>, lambda: f64, q: usize) -> Result<InactiveCheck> {
    let top_q = top_q_indices(u, q)?;
    let energy = top_q.iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt();
    let premise = energy <= lambda * (q as f64).sqrt();
    let a = soft_threshold(u, lambda);
    let active: Vec<usize> = active_indices(u, lambda);
    debug_assert!(active.iter().all(|&i| a[i] != 0.0));
    let conclusion = premise.then(|| active.len() <= q && active.iter().all(|i| top_q.contains(i)));
    Ok(InactiveCheck { premise, top_q, active, conclusion })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetEnergyOutcome {
    /// The bound held at every sample.
    Holds { max_ratio: f64 },
    /// The sampled trajectory breaks the derivative-energy premise at `sample`.
    NotApplicable { sample: usize, lhs: f64, rhs: f64 },
    Violated { sample: usize, lhs: f64, rhs: f64 },
}

/// Checks `||a(t)|| <= exp(-t/tau)(||a(0)|| - tau mu) + tau mu` on a
/// trajectory sampled every `dt`, after confirming the premise
/// `||a'(t)|| + ||a(t)||/tau <= mu` with forward differences.
pub fn lemma_target_energy_check(trajectory: &[DVector<f64>], tau: f64, mu: f64, dt: f64, tol: f64) -> Result<TargetEnergyOutcome> {
    if trajectory.len() < 2 {
        return invalid("trajectory needs at least two samples");
    }
    if !(tau > 0.0 && dt > 0.0) {
        return invalid("tau and dt must be positive");
    }
    let n = trajectory.len();
    for j in 0..n {
        let deriv = if j + 1 < n {
            (&trajectory[j + 1] - &trajectory[j]).norm() / dt
        } else {
            (&trajectory[j] - &trajectory[j - 1]).norm() / dt
        };
        let lhs = deriv + trajectory[j].norm() / tau;
        if lhs > mu * (1.0 + tol) {
            return Ok(TargetEnergyOutcome::NotApplicable { sample: j, lhs, rhs: mu });
        }
    }
    let start = trajectory[0].norm();
    let mut max_ratio: f64 = 0.0;
    for (j, a) in trajectory.iter().enumerate() {
        let t = j as f64 * dt;
        let rhs = (-t / tau).exp() * (start - tau * mu) + tau * mu;
        let lhs = a.norm();
        if lhs > rhs + tol * rhs.abs().max(1.0) {
            return Ok(TargetEnergyOutcome::Violated { sample: j, lhs, rhs });
        }
        if rhs > 0.0 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
    }
    Ok(TargetEnergyOutcome::Holds { max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::gen_identity;
    use approx::assert_abs_diff_eq;

    #[test]
    fn c_examples() {
        assert_abs_diff_eq!(compute_c(1.0, 0.3).unwrap(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(compute_c(0.5, 0.2).unwrap(), 0.6, epsilon = 1e-15);
        assert!(matches!(compute_c(2.0, 0.0), Err(Error::Precondition(_))));
        assert!(compute_c(0.0, 0.0).is_err());
        assert!(compute_c(1.0, 1.0).is_err());
    }

    #[test]
    fn v_and_w_examples() {
        let v = compute_v(1.0, 0.0, 0.1, 4, 0.5).unwrap();
        assert_abs_diff_eq!(v, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(compute_w(0.5, 1, 1.0, 1.0, 0.4).unwrap(), 1.4, epsilon = 1e-15);
        assert_eq!(compute_w(0.5, 3, 0.0, 1.0, 0.4).unwrap(), 0.4);
        assert!(compute_v(1.0, 0.0, 0.1, 4, 1.0).is_err());
        assert!(compute_w(1.2, 1, 1.0, 1.0, 0.4).is_err());
    }

    fn params(c: f64, p: usize, mu: f64, v: f64, e1: f64) -> IstaBoundParams {
        let w = compute_w(c, p, mu, 1.0, v).unwrap();
        IstaBoundParams { c, v, w, q: 1, delta: c, sigma: 0.0, mu, dl: 1.0, p, lambda: 0.1, eta: 1.0, beta: 1.0, e1 }
    }

    #[test]
    fn bound_starts_at_initial_error() {
        for p in 1..6 {
            let pr = params(0.37, p, 0.9, 0.2, 3.1);
            assert_abs_diff_eq!(ista_error_bound(0, &pr), 3.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn bound_limit_with_one_iteration_per_measurement() {
        let pr = params(0.5, 1, 1.0, 0.4, 2.0);
        let lim = 0.4 + 0.5 / 0.5 * 1.0;
        assert_abs_diff_eq!(ista_error_bound(200, &pr), lim, epsilon = 1e-12);
        assert_abs_diff_eq!(ista_steady_state(&pr), lim, epsilon = 1e-12);
    }

    #[test]
    fn bound_worked_value() {
        // 0.125 * (2 - (0.5/0.75 + 0.4)) + 0.25/0.75 + 0.4 = 0.85 exactly
        let pr = params(0.5, 2, 1.0, 0.4, 2.0);
        assert_abs_diff_eq!(ista_error_bound(3, &pr), 0.85, epsilon = 1e-14);
    }

    #[test]
    fn steady_state_static_and_large_p() {
        let pr = params(0.5, 3, 0.0, 0.4, 2.0);
        assert_eq!(ista_steady_state(&pr), 0.4);
        let mut last = f64::INFINITY;
        for p in 1..30 {
            let s = ista_steady_state(&params(0.6, p, 1.0, 0.4, 2.0));
            assert!(s < last && s > 0.4);
            last = s;
        }
    }

    #[test]
    fn d_examples_and_match_with_ista() {
        assert_abs_diff_eq!(compute_d(0.0, 1.0, 0.0, 0.0, 1.0, 4).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(compute_d(0.5, 1.0, 1.0, 1.0, 0.0, 7).unwrap(), 4.0, epsilon = 1e-15);
        assert!(compute_d(1.0, 1.0, 1.0, 1.0, 1.0, 1).is_err());
        let (delta, tau, mu, sigma, lambda, q) = (0.3, 0.7, 1.3, 0.2, 0.15, 3);
        let pr = IstaBoundParams::new(IstaProblem { delta, eta: 1.0, sigma, lambda, q, mu, dl: tau, p: 1, beta: 1.0 }, 1.0).unwrap();
        let d = compute_d(delta, tau, mu, sigma, lambda, q).unwrap();
        // the ISTA limit lags the target by one step of size mu * dl
        assert!(ista_steady_state(&pr) <= d);
        assert_abs_diff_eq!(ista_steady_state(&pr) + mu * tau, d, epsilon = 1e-14);
        let still = IstaBoundParams { mu: 0.0, ..pr };
        assert_abs_diff_eq!(ista_steady_state(&still), compute_d(delta, tau, 0.0, sigma, lambda, q).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn lca_bound_shape() {
        let pr = LcaBoundParams::new(0.2, 1.5, 1.0, 0.1, 0.3, 2, 1.0, 5.0).unwrap();
        assert_eq!(lca_error_bound(0.0, &pr), 5.0);
        assert_abs_diff_eq!(lca_error_bound(1e6, &pr), pr.d, epsilon = 1e-12);
        let half = pr.tau / (1.0 - pr.delta) * 2f64.ln();
        assert_abs_diff_eq!(lca_error_bound(half, &pr), (5.0 + pr.d) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn thm1_reports() {
        let zero = DVector::zeros(5);
        let r = check_thm1_preconditions(0.0, 4, 1.0, 0.0, 1.0, 1.0, &zero, 0);
        assert!(r.all_pass());
        assert_eq!(r.get("initial_top_q_energy").unwrap().lhs, 0.0);
        let e = r.get("energy_budget").unwrap();
        assert_eq!((e.lhs, e.rhs), (1.0, 2.0));
        let r = check_thm1_preconditions(0.5, 1, 10.0, 0.0, 0.1, 1.0, &zero, 0);
        assert!(!r.all_pass());
        let e = r.get("energy_budget").unwrap();
        assert_abs_diff_eq!(e.lhs, 15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.rhs, 0.05, epsilon = 1e-12);
        assert_eq!(r.failing(), vec!["energy_budget"]);
        let lines = r.to_lines("");
        assert!(lines.contains("energy_budget,15,0.05,false"));
    }

    #[test]
    fn min_lambda_meets_energy_budget() {
        let lam = min_lambda_thm1(0.35, 2, 1.3, 0.2, 0.9).unwrap();
        let r = check_thm1_preconditions(0.35, 2, 1.3, 0.2, lam * (1.0 + 1e-12), 0.9, &DVector::zeros(3), 0);
        assert!(r.all_pass(), "{r:?}");
        let r = check_thm1_preconditions(0.35, 2, 1.3, 0.2, lam * 0.99, 0.9, &DVector::zeros(3), 0);
        assert!(!r.all_pass());
    }

    #[test]
    fn thm2_reports() {
        let zero = DVector::zeros(3);
        let r = check_thm2_preconditions(0.0, 4, 1.0, 0.5, 1.0, 7.0, 9.0, &zero, 0);
        let d = r.get("decay_condition").unwrap();
        assert_eq!((d.lhs, d.rhs), (1.5, 2.0));
        let r = check_thm2_preconditions(0.1, 1, 0.5, 0.0, 1.0, 1.0, 2.0, &zero, 0);
        assert!(r.all_pass());
        assert_abs_diff_eq!(r.get("decay_condition").unwrap().lhs, 0.7, epsilon = 1e-15);
        let at_equality = check_thm2_preconditions(0.0, 1, 0.5, 0.5, 1.0, 0.0, 0.0, &zero, 0);
        assert!(at_equality.all_pass());
        let halved = check_thm2_preconditions(0.0, 1, 0.5, 0.5, 0.5, 0.0, 0.0, &zero, 0);
        assert!(!halved.all_pass());
    }

    #[test]
    fn min_lambda_thm2_meets_decay_condition() {
        let (delta, q, beta, sigma, tau_mu) = (0.2, 2, 1.0, 0.1, 1.4);
        let e0 = beta;
        let lam = min_lambda_thm2(delta, q, beta, sigma, tau_mu, e0).unwrap() * (1.0 + 1e-12);
        let d = compute_d(delta, 1.0, tau_mu, sigma, lam, q).unwrap();
        let r = check_thm2_preconditions(delta, q, beta, sigma, lam, e0, d, &DVector::zeros(4), 0);
        assert!(r.all_pass(), "{r:?}");
        assert!(min_lambda_thm2(0.5, q, beta, sigma, tau_mu, e0).is_err());
    }

    #[test]
    fn rip_lemma_on_identity() {
        let phi = gen_identity(6).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0, 0.0, 0.5, 0.0, 0.0]);
        let y = DVector::from_vec(vec![0.3; 6]);
        let r = lemma_rip_inequalities(&phi, &[0, 1], &[3], &x, &y, 0.0, 2, 1).unwrap();
        assert!(r.all_hold(1e-12));
        assert_abs_diff_eq!(r.upper_isometry.lhs, x.norm_squared(), epsilon = 1e-12);
        assert_eq!(r.cross_gram.lhs, 0.0);
        assert_eq!(r.identity_defect.lhs, 0.0);
        assert!(lemma_rip_inequalities(&phi, &[0, 1, 2], &[3], &x, &y, 0.0, 2, 1).is_err());
        assert!(lemma_rip_inequalities(&phi, &[0], &[3], &x, &y, 0.0, 2, 1).is_err());
    }

    #[test]
    fn inactive_lemma_examples() {
        let r = lemma_inactive_check(&DVector::from_vec(vec![0.9, 0.5, 0.3]), 1.0, 1).unwrap();
        assert!(r.premise);
        assert!(r.active.is_empty());
        assert_eq!(r.conclusion, Some(true));
        let r = lemma_inactive_check(&DVector::from_vec(vec![2.0, 0.0, 0.0]), 1.0, 1).unwrap();
        assert!(!r.premise);
        assert_eq!(r.conclusion, None);
    }

    #[test]
    fn target_energy_lemma() {
        let tau = 2.0;
        let mu = 0.75;
        let c = DVector::from_vec(vec![tau * mu, 0.0]);
        let traj = vec![c.clone(); 50];
        match lemma_target_energy_check(&traj, tau, mu, 0.01, 1e-12).unwrap() {
            TargetEnergyOutcome::Holds { max_ratio } => assert_abs_diff_eq!(max_ratio, 1.0, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
        let a0 = DVector::from_vec(vec![1.0, -0.5, 2.0]);
        let dt = tau / 1000.0;
        let decay: Vec<_> = (0..3000).map(|j| &a0 * (-(j as f64) * dt / tau).exp()).collect();
        let mu = 2.0 * a0.norm() / tau;
        assert!(matches!(lemma_target_energy_check(&decay, tau, mu, dt, 1e-9).unwrap(), TargetEnergyOutcome::Holds { .. }));
        let fast: Vec<_> = (0..10).map(|j| &a0 * (j as f64)).collect();
        assert!(matches!(
            lemma_target_energy_check(&fast, tau, 0.1, 0.1, 1e-9).unwrap(),
            TargetEnergyOutcome::NotApplicable { .. }
        ));
    }
}
