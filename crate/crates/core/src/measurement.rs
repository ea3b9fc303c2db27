//! Measurement operators, noise, and restricted isometry constants.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::{rng, stream};

/// Default cap on the number of supports `rip_exact` will enumerate.
pub const DEFAULT_RIP_BUDGET: u128 = 1_000_000;

/// A dense dictionary with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    entries: DMatrix<f64>,
    seed: u64,
    rip: Option<RipEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipMethod {
    Exact,
    MonteCarlo,
}

/// Restricted isometry constant at a fixed sparsity level.
///
/// For `RipMethod::Exact` this is the true constant; a Monte-Carlo estimate is
/// a lower bound on it. `worst_support` is the support that attained `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RipEstimate {
    pub sparsity: usize,
    pub delta: f64,
    pub method: RipMethod,
    pub samples: u64,
    pub worst_support: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// i.i.d. Gaussian with standard deviation `sigma` per entry.
    GaussianScaled,
    /// Gaussian draw rescaled so that `||e|| <= sigma / sqrt(1 + delta)`.
    Capped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportSampler {
    Random,
    /// Walks supports in lexicographic order, wrapping around.
    Exhaustive,
}

impl MeasurementMatrix {
    /// Wraps `entries`, rescaling every column to unit norm.
    pub fn from_columns_normalized(mut entries: DMatrix<f64>, seed: u64) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return invalid("matrix dimensions must be positive");
        }
        for mut col in entries.column_iter_mut() {
            let norm = col.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return invalid("matrix has a zero or non-finite column");
            }
            col /= norm;
        }
        Ok(Self { entries, seed, rip: None })
    }

    /// Wraps `entries` as is; every column must already have unit norm within 1e-12.
    pub fn from_entries(entries: DMatrix<f64>, seed: u64) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return invalid("matrix dimensions must be positive");
        }
        for (j, col) in entries.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > 1e-12 {
                return invalid(format!("column {j} does not have unit norm"));
            }
        }
        Ok(Self { entries, seed, rip: None })
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rip(&self) -> Option<&RipEstimate> {
        self.rip.as_ref()
    }

    pub fn with_rip(mut self, rip: RipEstimate) -> Self {
        self.rip = Some(rip);
        self
    }

    /// Same columns in a different order.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        let n = self.cols();
        let mut seen = vec![false; n];
        for &j in order {
            if j >= n || seen[j] {
                return invalid("order is not a permutation of the columns");
            }
            seen[j] = true;
        }
        if order.len() != n {
            return invalid("order is not a permutation of the columns");
        }
        let entries = DMatrix::from_fn(self.rows(), n, |i, j| self.entries[(i, order[j])]);
        Ok(Self { entries, seed: self.seed, rip: None })
    }

    /// `m,n,seed` on the first line, then one comma-separated line per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{},{},{}", self.rows(), self.cols(), self.seed)?;
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|j| format!("{}", self.entries[(i, j)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::InvalidArgument("empty matrix file".into()))??;
        let head: Vec<&str> = header.trim().split(',').collect();
        if head.len() != 3 {
            return invalid("matrix header must be m,n,seed");
        }
        let parse_u = |s: &str| s.trim().parse::<u64>().map_err(|e| Error::InvalidArgument(format!("bad header field {s:?}: {e}")));
        let m = parse_u(head[0])? as usize;
        let n = parse_u(head[1])? as usize;
        let seed = parse_u(head[2])?;
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::InvalidArgument(format!("missing matrix row {i}")))??;
            let row: Vec<f64> = line
                .trim()
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad entry {s:?}: {e}"))))
                .collect::<Result<_>>()?;
            if row.len() != n {
                return invalid(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            data.extend(row);
        }
        MeasurementMatrix::from_entries(DMatrix::from_row_slice(m, n, &data), seed)
    }
}

/// i.i.d. standard normal entries, then unit-norm columns.
pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix> {
    if m == 0 || n == 0 {
        return invalid("matrix dimensions must be positive");
    }
    let mut r = rng(seed, stream::MATRIX);
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        data.push(r.sample::<f64, _>(StandardNormal));
    }
    MeasurementMatrix::from_columns_normalized(DMatrix::from_row_slice(m, n, &data), seed)
}

pub fn gen_identity(n: usize) -> Result<MeasurementMatrix> {
    if n == 0 {
        return invalid("identity dimension must be positive");
    }
    MeasurementMatrix::from_entries(DMatrix::identity(n, n), 0)
}

/// `phi * target + noise`.
pub fn measure(phi: &MeasurementMatrix, target: &DVector<f64>, noise: &DVector<f64>) -> Result<DVector<f64>> {
    if target.len() != phi.cols() {
        return invalid(format!("target has length {}, matrix has {} columns", target.len(), phi.cols()));
    }
    if noise.len() != phi.rows() {
        return invalid(format!("noise has length {}, matrix has {} rows", noise.len(), phi.rows()));
    }
    Ok(phi.entries() * target + noise)
}

pub fn gen_noise(m: usize, sigma: f64, delta: f64, mode: NoiseMode, seed: u64) -> Result<DVector<f64>> {
    gen_noise_stream(m, sigma, delta, mode, seed, stream::NOISE_BASE)
}

/// Like [`gen_noise`] but drawing from an explicit RNG stream of `seed`.
pub fn gen_noise_stream(m: usize, sigma: f64, delta: f64, mode: NoiseMode, seed: u64, stream_id: u64) -> Result<DVector<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid("sigma must be a finite non-negative number");
    }
    if !(0.0..1.0).contains(&delta) {
        return invalid("delta must lie in [0, 1)");
    }
    if sigma == 0.0 {
        return Ok(DVector::zeros(m));
    }
    let mut r = rng(seed, stream_id);
    let mut e = DVector::from_fn(m, |_, _| sigma * r.sample::<f64, _>(StandardNormal));
    if mode == NoiseMode::Capped {
        let cap = sigma / (1.0 + delta).sqrt();
        let norm = e.norm();
        if norm > cap {
            e *= cap / norm;
            // rounding can leave the norm a few ulps above the cap
            while e.norm() > cap {
                e *= 1.0 - f64::EPSILON;
            }
        }
    }
    Ok(e)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Advances `idx` to the next size-`idx.len()` subset of `0..n` in
/// lexicographic order. Returns false after the last subset.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let s = idx.len();
    let mut i = s;
    while i > 0 {
        i -= 1;
        if idx[i] < n - s + i {
            idx[i] += 1;
            for j in i + 1..s {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gram matrix of the columns indexed by `support`.
pub fn restricted_gram(phi: &MeasurementMatrix, support: &[usize]) -> DMatrix<f64> {
    let sub = phi.entries().select_columns(support);
    sub.transpose() * sub
}

/// Extreme eigenvalues `(min, max)` of the restricted Gram matrix.
pub fn restricted_eigen_extremes(phi: &MeasurementMatrix, support: &[usize]) -> (f64, f64) {
    let eig = SymmetricEigen::new(restricted_gram(phi, support));
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn support_deviation(phi: &MeasurementMatrix, support: &[usize]) -> f64 {
    let (lo, hi) = restricted_eigen_extremes(phi, support);
    (1.0 - lo).max(hi - 1.0).max(0.0)
}

/// Unit N-vector supported on `support` along which `||phi x||^2` deviates
/// most from `||x||^2`: the eigenvector of the extreme eigenvalue.
pub fn worst_case_vector(phi: &MeasurementMatrix, support: &[usize]) -> DVector<f64> {
    let eig = SymmetricEigen::new(restricted_gram(phi, support));
    let (mut best, mut best_dev) = (0, f64::NEG_INFINITY);
    for (j, &ev) in eig.eigenvalues.iter().enumerate() {
        let dev = (ev - 1.0).abs();
        if dev > best_dev {
            best = j;
            best_dev = dev;
        }
    }
    let v = eig.eigenvectors.column(best);
    let mut x = DVector::zeros(phi.cols());
    for (t, &j) in support.iter().enumerate() {
        x[j] = v[t];
    }
    x
}

// larger delta wins, ties go to the lexicographically smaller support
fn better(a: (f64, Vec<usize>), b: (f64, Vec<usize>)) -> (f64, Vec<usize>) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Exact RIP constant at level `s` by enumerating every support.
pub fn rip_exact(phi: &MeasurementMatrix, s: usize, budget: u128) -> Result<RipEstimate> {
    let n = phi.cols();
    if s == 0 || s > n {
        return invalid(format!("sparsity level {s} outside 1..={n}"));
    }
    let needed = binomial(n, s);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    // partition on the first index of the support
    let (delta, worst_support) = (0..=n - s)
        .into_par_iter()
        .map(|first| {
            let mut idx: Vec<usize> = (first..first + s).collect();
            let mut best = (f64::NEG_INFINITY, Vec::new());
            loop {
                let dev = support_deviation(phi, &idx);
                best = better(best, (dev, idx.clone()));
                if !next_combination(&mut idx[1..], n) {
                    break;
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, Vec::new()), better);
    Ok(RipEstimate { sparsity: s, delta, method: RipMethod::Exact, samples: 0, worst_support })
}

pub fn rip_monte_carlo(phi: &MeasurementMatrix, s: usize, trials: u64, seed: u64) -> Result<RipEstimate> {
    rip_monte_carlo_with(phi, s, trials, seed, SupportSampler::Random)
}

/// Max deviation over `trials` sampled supports; a lower bound on the exact constant.
pub fn rip_monte_carlo_with(
    phi: &MeasurementMatrix,
    s: usize,
    trials: u64,
    seed: u64,
    sampler: SupportSampler,
) -> Result<RipEstimate> {
    let n = phi.cols();
    if s == 0 || s > n {
        return invalid(format!("sparsity level {s} outside 1..={n}"));
    }
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    match sampler {
        SupportSampler::Random => {
            let mut r = rng(seed, stream::SUPPORT_SAMPLER);
            for _ in 0..trials {
                let mut support = index::sample(&mut r, n, s).into_vec();
                support.sort_unstable();
                let dev = support_deviation(phi, &support);
                best = better(best, (dev, support));
            }
        }
        SupportSampler::Exhaustive => {
            let mut idx: Vec<usize> = (0..s).collect();
            for _ in 0..trials {
                let dev = support_deviation(phi, &idx);
                best = better(best, (dev, idx.clone()));
                if !next_combination(&mut idx, n) {
                    idx = (0..s).collect();
                }
            }
        }
    }
    Ok(RipEstimate {
        sparsity: s,
        delta: best.0,
        method: RipMethod::MonteCarlo,
        samples: trials,
        worst_support: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_columns_are_unit_norm_and_deterministic() {
        let a = gen_gaussian_matrix(32, 64, 7).unwrap();
        for col in a.entries().column_iter() {
            assert_abs_diff_eq!(col.norm(), 1.0, epsilon = 1e-12);
        }
        let b = gen_gaussian_matrix(32, 64, 7).unwrap();
        assert_eq!(a.entries().as_slice(), b.entries().as_slice());
        assert!(gen_gaussian_matrix(0, 4, 1).is_err());
        assert!(gen_gaussian_matrix(4, 0, 1).is_err());
    }

    #[test]
    fn identity_has_zero_rip() {
        let id = gen_identity(4).unwrap();
        assert_eq!(rip_exact(&id, 2, DEFAULT_RIP_BUDGET).unwrap().delta, 0.0);
        let one = gen_identity(1).unwrap();
        assert_eq!(one.entries()[(0, 0)], 1.0);
        let x = DVector::from_vec(vec![1.0, 0.0, 2.0, 0.0]);
        assert_eq!(measure(&id, &x, &DVector::zeros(4)).unwrap(), x);
    }

    #[test]
    fn measure_is_linear() {
        let phi = gen_gaussian_matrix(3, 4, 11).unwrap();
        let mut e2 = DVector::zeros(4);
        e2[1] = 1.0;
        let y = measure(&phi, &e2, &DVector::zeros(3)).unwrap();
        assert_eq!(y, phi.entries().column(1).into_owned());
        let eps = DVector::from_vec(vec![0.1, -0.2, 0.3]);
        assert_eq!(measure(&phi, &DVector::zeros(4), &eps).unwrap(), eps);
        assert!(measure(&phi, &DVector::zeros(3), &eps).is_err());
        assert!(measure(&phi, &e2, &DVector::zeros(4)).is_err());
    }

    #[test]
    fn two_column_rip_is_coherence() {
        let rho: f64 = 0.5;
        let m = DMatrix::from_row_slice(2, 2, &[1.0, rho, 0.0, (1.0 - rho * rho).sqrt()]);
        let phi = MeasurementMatrix::from_entries(m, 0).unwrap();
        assert_abs_diff_eq!(rip_exact(&phi, 2, 10).unwrap().delta, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let phi = gen_gaussian_matrix(6, 12, 3).unwrap();
        match rip_exact(&phi, 3, 100) {
            Err(Error::BudgetExceeded { needed, budget }) => {
                assert_eq!(needed, 220);
                assert_eq!(budget, 100);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(rip_exact(&phi, 0, 100).is_err());
        assert!(rip_exact(&phi, 13, 100).is_err());
    }

    #[test]
    fn noise_modes() {
        assert_eq!(gen_noise(5, 0.0, 0.0, NoiseMode::GaussianScaled, 1).unwrap(), DVector::zeros(5));
        for seed in 0..50 {
            let e = gen_noise(16, 1.0, 0.0, NoiseMode::Capped, seed).unwrap();
            assert!(e.norm() <= 1.0);
            let e = gen_noise(16, 1.0, 0.44, NoiseMode::Capped, seed).unwrap();
            assert!(e.norm() <= 1.0 / 1.44f64.sqrt());
        }
        assert!(gen_noise(4, -1.0, 0.0, NoiseMode::Capped, 0).is_err());
        assert!(gen_noise(4, 1.0, 1.0, NoiseMode::Capped, 0).is_err());
    }

    #[test]
    fn combinations_enumerate_binomial() {
        let mut idx = vec![0, 1, 2];
        let mut count = 1;
        while next_combination(&mut idx, 7) {
            count += 1;
        }
        assert_eq!(count, binomial(7, 3));
        assert_eq!(binomial(512, 6), 24_295_061_050_624);
    }

    #[test]
    fn csv_round_trip() {
        let phi = gen_gaussian_matrix(3, 5, 9).unwrap();
        let mut buf = Vec::new();
        phi.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("3,5,9\n"));
        let back = MeasurementMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(back, phi);
    }
}
