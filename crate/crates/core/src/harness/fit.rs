//! Steady-state model `c^P / (1 - c^P) * mu * dl + V` fitted over `P`.

use crate::error::{invalid, Result};

pub const DEFAULT_GRID: usize = 10_000;
pub const GRID_LO: f64 = 1e-4;
pub const GRID_HI: f64 = 0.9999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateFit {
    pub c_hat: f64,
    pub v_hat: f64,
    pub sse: f64,
    /// `1 - sse / sst`; zero when the data has no spread.
    pub r2: f64,
}

impl SteadyStateFit {
    pub fn csv(&self) -> String {
        format!("c_hat,V_hat,sse,r2\n{},{},{},{}\n", self.c_hat, self.v_hat, self.sse, self.r2)
    }

    pub fn grid_step(points: usize) -> f64 {
        (GRID_HI - GRID_LO) / (points - 1) as f64
    }
}

pub fn model(c: f64, p: usize, mu: f64, dl: f64, v: f64) -> f64 {
    let cp = c.powi(p as i32);
    cp / (1.0 - cp) * mu * dl + v
}

pub fn fit_steady_state(p_values: &[usize], steady: &[f64], mu: f64, dl: f64) -> Result<SteadyStateFit> {
    fit_steady_state_grid(p_values, steady, mu, dl, DEFAULT_GRID)
}

/// Grid search over `c` in `[1e-4, 0.9999]`; for each `c` the best `V >= 0`
/// is the clamped mean residual.
pub fn fit_steady_state_grid(p_values: &[usize], steady: &[f64], mu: f64, dl: f64, points: usize) -> Result<SteadyStateFit> {
    if p_values.len() != steady.len() {
        return invalid("P values and steady states differ in length");
    }
    let mut distinct = p_values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return invalid("need at least three distinct P values");
    }
    if distinct[0] == 0 {
        return invalid("P values must be positive");
    }
    if steady.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return invalid("steady states must be positive and finite");
    }
    if points < 2 {
        return invalid("grid needs at least two points");
    }
    let n = steady.len() as f64;
    let mean_y = steady.iter().sum::<f64>() / n;
    let sst: f64 = steady.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let step = SteadyStateFit::grid_step(points);
    let mut best: Option<(f64, f64, f64)> = None;
    for j in 0..points {
        let c = GRID_LO + step * j as f64;
        let f: Vec<f64> = p_values.iter().map(|&p| model(c, p, mu, dl, 0.0)).collect();
        let v = (steady.iter().zip(&f).map(|(y, f)| y - f).sum::<f64>() / n).max(0.0);
        let sse: f64 = steady.iter().zip(&f).map(|(y, f)| (y - f - v).powi(2)).sum();
        if best.is_none_or(|b| sse < b.2) {
            best = Some((c, v, sse));
        }
    }
    let (c_hat, v_hat, sse) = best.expect("grid is nonempty");
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
    Ok(SteadyStateFit { c_hat, v_hat, sse, r2 })
}
