//! Randomized and exhaustive checks of the supporting lemmas.

use nalgebra::DVector;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::measurement::{gen_gaussian_matrix, rip_exact, DEFAULT_RIP_BUDGET};
use crate::rng::{derive_seed, rng};
use crate::theory::{lemma_inactive_check, lemma_rip_inequalities};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteResult {
    pub cases: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen over all inequalities.
    pub max_excess: f64,
}

/// RIP consequences on random `(gamma1, gamma2, x, y)` draws for `matrices`
/// Gaussian `m x n` dictionaries, with the exact constant at level `s + q`.
pub fn rip_lemma_suite(matrices: usize, m: usize, n: usize, q: usize, s: usize, draws: usize, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut out = SuiteResult { cases: 0, violations: 0, max_excess: f64::NEG_INFINITY };
    for j in 0..matrices {
        let mseed = derive_seed(seed, j as u64);
        let phi = gen_gaussian_matrix(m, n, mseed)?;
        let delta = rip_exact(&phi, s + q, DEFAULT_RIP_BUDGET)?.delta;
        let mut r = rng(mseed, 7);
        for _ in 0..draws {
            let k1 = r.random_range(0..=q);
            let k2 = r.random_range(0..=s);
            let g1 = index::sample(&mut r, n, k1).into_vec();
            let g2 = index::sample(&mut r, n, k2).into_vec();
            let mut x = DVector::zeros(n);
            for &i in g1.iter().chain(&g2) {
                x[i] = r.sample::<f64, _>(StandardNormal);
            }
            let y = DVector::from_fn(m, |_, _| r.sample::<f64, _>(StandardNormal));
            let rep = lemma_rip_inequalities(&phi, &g1, &g2, &x, &y, delta, q, s)?;
            out.cases += 1;
            for c in rep.checks() {
                out.max_excess = out.max_excess.max(c.lhs - c.rhs);
            }
            if !rep.all_hold(tol) {
                out.violations += 1;
            }
        }
    }
    Ok(out)
}

/// Every point of a `points^3` grid on `[-half_width, half_width]^3`, for
/// each threshold and `q`: the premise `||u_Delta|| <= lambda sqrt(q)` must
/// force `Gamma ⊆ Delta` and `|Gamma| <= q`. `cases` counts premise hits.
pub fn inactive_lemma_grid(points: usize, half_width: f64, lambdas: &[f64], qs: &[usize]) -> Result<SuiteResult> {
    let mut out = SuiteResult { cases: 0, violations: 0, max_excess: f64::NEG_INFINITY };
    let coord = |i: usize| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64;
    for &lambda in lambdas {
        for &q in qs {
            for i in 0..points {
                for j in 0..points {
                    for k in 0..points {
                        let u = DVector::from_vec(vec![coord(i), coord(j), coord(k)]);
                        let c = lemma_inactive_check(&u, lambda, q)?;
                        if let Some(ok) = c.conclusion {
                            out.cases += 1;
                            out.max_excess = out.max_excess.max(c.active.len() as f64 - q as f64);
                            if !ok {
                                out.violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
