//! Time-varying sparse targets.
//!
//! A target is built from `S` amplitude sequences following a norm-preserving
//! AR(1) recursion. `S - n_pairs` of them sit on fixed indices; each of the
//! remaining `n_pairs` alternates between two indices under a sinusoidal
//! envelope, so the support drifts smoothly while its size stays `S`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DVector;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng::{rng, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Signal dimension.
    pub n: usize,
    /// Nonzeros per sample.
    pub s: usize,
    /// Amplitude sequences that switch between two indices.
    pub n_pairs: usize,
    /// Number of time samples.
    pub len: usize,
    pub beta: f64,
    pub mu: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { n: 128, s: 8, n_pairs: 2, len: 40, beta: 1.0, mu: 0.8, seed: 0 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 || self.len == 0 {
            return invalid("n, s and len must be positive");
        }
        if self.n_pairs > self.s {
            return invalid("n_pairs cannot exceed s");
        }
        if self.n < self.s + self.n_pairs {
            return invalid(format!("need n >= s + n_pairs ({} < {})", self.n, self.s + self.n_pairs));
        }
        check_energy(self.beta, self.mu)
    }
}

fn check_energy(beta: f64, mu: f64) -> Result<()> {
    if !(mu >= 0.0) || !mu.is_finite() || !beta.is_finite() {
        return invalid("mu must be finite and non-negative");
    }
    if !(mu < beta) {
        return invalid(format!("mu must be smaller than beta (mu={mu}, beta={beta})"));
    }
    Ok(())
}

/// One amplitude sequence spread over two indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedIndex {
    pub first: usize,
    pub second: usize,
    /// Envelope phase in `[0, period)`.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSchedule {
    /// Index of amplitude sequence `j` for `j < s - n_pairs`.
    pub fixed: Vec<usize>,
    /// Pair for amplitude sequence `s - n_pairs + p`.
    pub pairs: Vec<PairedIndex>,
    pub period: f64,
}

impl SupportSchedule {
    pub fn envelope(&self, pair: usize, l: usize) -> f64 {
        (2.0 * PI * (l as f64 + self.pairs[pair].phase) / self.period).sin()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicTarget {
    pub samples: Vec<DVector<f64>>,
    /// Sorted support of each sample.
    pub support: Vec<Vec<usize>>,
    pub s: usize,
    pub beta: f64,
    pub mu: f64,
}

impl DynamicTarget {
    /// Wraps arbitrary samples; supports are read off the nonzero entries.
    pub fn from_samples(samples: Vec<DVector<f64>>, beta: f64, mu: f64) -> Self {
        let support: Vec<Vec<usize>> = samples.iter().map(nonzero_indices).collect();
        let s = support.iter().map(Vec::len).max().unwrap_or(0);
        Self { samples, support, s, beta, mu }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |v| v.len())
    }

    /// One row per sample, `dim` columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.samples {
            let row: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// One row per sample listing its support indices.
    pub fn write_support_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.support {
            let row: Vec<String> = s.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn nonzero_indices(v: &DVector<f64>) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, _)| i).collect()
}

/// `len` amplitude vectors in R^s: the first has norm `beta`, then
/// `alpha[l+1] = sqrt((beta^2 - mu^2)/beta^2) alpha[l] + mu/sqrt(s) v[l]`.
pub fn gen_amplitudes(s: usize, len: usize, beta: f64, mu: f64, seed: u64) -> Result<Vec<DVector<f64>>> {
    check_energy(beta, mu)?;
    if s == 0 || len == 0 {
        return invalid("s and len must be positive");
    }
    let mut r = rng(seed, stream::AMPLITUDES);
    let mut first = DVector::from_fn(s, |_, _| r.sample::<f64, _>(StandardNormal));
    first *= beta / first.norm();
    let keep = ((beta * beta - mu * mu) / (beta * beta)).sqrt();
    let innov = mu / (s as f64).sqrt();
    let mut out = Vec::with_capacity(len);
    out.push(first);
    for l in 1..len {
        let v = DVector::from_fn(s, |_, _| r.sample::<f64, _>(StandardNormal));
        let next = if mu == 0.0 { out[l - 1].clone() } else { &out[l - 1] * keep + v * innov };
        out.push(next);
    }
    Ok(out)
}

pub fn gen_support_schedule(config: &GenConfig) -> Result<SupportSchedule> {
    config.validate()?;
    let mut r = rng(config.seed, stream::SUPPORT);
    let picked = index::sample(&mut r, config.n, config.s + config.n_pairs).into_vec();
    let n_fixed = config.s - config.n_pairs;
    let fixed = picked[..n_fixed].to_vec();
    let period = config.len as f64;
    let pairs = picked[n_fixed..]
        .chunks_exact(2)
        .map(|c| PairedIndex { first: c[0], second: c[1], phase: r.random_range(0.0..period) })
        .collect();
    Ok(SupportSchedule { fixed, pairs, period })
}

pub fn assemble_target(config: &GenConfig) -> Result<DynamicTarget> {
    config.validate()?;
    let amps = gen_amplitudes(config.s, config.len, config.beta, config.mu, config.seed)?;
    let sched = gen_support_schedule(config)?;
    let n_fixed = config.s - config.n_pairs;
    let mut samples = Vec::with_capacity(config.len);
    for (l, alpha) in amps.iter().enumerate() {
        let mut x = DVector::zeros(config.n);
        for (j, &idx) in sched.fixed.iter().enumerate() {
            x[idx] = alpha[j];
        }
        for (p, pair) in sched.pairs.iter().enumerate() {
            let amp = alpha[n_fixed + p];
            let e = sched.envelope(p, l);
            if e > 0.0 {
                x[pair.first] = e * amp;
            } else if e < 0.0 {
                x[pair.second] = e * amp;
            } else {
                // exact zero crossing: keep the pair represented
                x[pair.first] = f64::MIN_POSITIVE * amp;
            }
        }
        samples.push(x);
    }
    let support = samples.iter().map(nonzero_indices).collect();
    Ok(DynamicTarget { samples, support, s: config.s, beta: config.beta, mu: config.mu })
}

/// Repeats every sample `p` times.
pub fn zero_hold(target: &DynamicTarget, p: usize) -> Result<DynamicTarget> {
    if p == 0 {
        return invalid("P must be at least 1");
    }
    let samples = target.samples.iter().flat_map(|v| std::iter::repeat_n(v.clone(), p)).collect();
    let support = target.support.iter().flat_map(|s| std::iter::repeat_n(s.clone(), p)).collect();
    Ok(DynamicTarget { samples, support, s: target.s, beta: target.beta, mu: target.mu })
}

/// Largest step `||a[l] - a[l-1]||`, the tightest `mu * dl` for this realization.
pub fn estimate_mu_dl(target: &DynamicTarget) -> Result<f64> {
    if target.len() < 2 {
        return invalid("need at least two samples");
    }
    Ok(target.samples.windows(2).map(|w| (&w[1] - &w[0]).norm()).fold(0.0, f64::max))
}

/// Largest sample norm.
pub fn estimate_beta(target: &DynamicTarget) -> f64 {
    target.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
