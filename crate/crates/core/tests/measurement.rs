use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use streamista::measurement::*;
use streamista::rng::derive_seed;

/// Cyclic Jacobi eigenvalues of a small symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn supports(n: usize, s: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == s {
        out.push(cur.clone());
        return;
    }
    for j in start..n {
        cur.push(j);
        supports(n, s, j + 1, cur, out);
        cur.pop();
    }
}

fn oracle_delta(phi: &MeasurementMatrix, s: usize) -> f64 {
    let e = phi.entries();
    let mut all = Vec::new();
    supports(phi.cols(), s, 0, &mut Vec::new(), &mut all);
    all.iter()
        .map(|sup| {
            let g: Vec<Vec<f64>> = sup.iter().map(|&i| sup.iter().map(|&j| e.column(i).dot(&e.column(j))).collect()).collect();
            jacobi_eigenvalues(g).into_iter().map(|ev| (ev - 1.0).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[test]
fn rip_exact_matches_independent_enumeration() {
    let phi = gen_gaussian_matrix(6, 12, 3).unwrap();
    for s in 1..=4 {
        let got = rip_exact(&phi, s, DEFAULT_RIP_BUDGET).unwrap();
        let want = oracle_delta(&phi, s);
        assert!((got.delta - want).abs() < 1e-10, "s={s}: {} vs {want}", got.delta);
        assert_eq!(got.worst_support.len(), s);
    }
}

#[test]
fn level_two_constant_is_the_coherence() {
    let phi = gen_gaussian_matrix(10, 14, 21).unwrap();
    let e = phi.entries();
    let mut coherence: f64 = 0.0;
    for i in 0..14 {
        for j in i + 1..14 {
            coherence = coherence.max(e.column(i).dot(&e.column(j)).abs());
        }
    }
    assert!((rip_exact(&phi, 2, DEFAULT_RIP_BUDGET).unwrap().delta - coherence).abs() < 1e-12);
}

#[test]
fn exhaustive_sampler_coincides_with_enumeration() {
    let phi = gen_gaussian_matrix(6, 12, 3).unwrap();
    let exact = rip_exact(&phi, 2, DEFAULT_RIP_BUDGET).unwrap();
    let mc = rip_monte_carlo_with(&phi, 2, 66, 0, SupportSampler::Exhaustive).unwrap();
    assert_eq!(mc.delta, exact.delta);
    assert_eq!(mc.worst_support, exact.worst_support);
    assert_eq!(mc.method, RipMethod::MonteCarlo);
}

#[test]
fn monte_carlo_never_exceeds_exact() {
    for seed in 0..10 {
        let phi = gen_gaussian_matrix(8, 14, seed).unwrap();
        for s in [2, 3, 4] {
            let exact = rip_exact(&phi, s, DEFAULT_RIP_BUDGET).unwrap().delta;
            let mc = rip_monte_carlo(&phi, s, 200, seed).unwrap();
            assert!(mc.delta <= exact, "seed {seed} s {s}");
            assert_eq!(mc, rip_monte_carlo(&phi, s, 200, seed).unwrap());
        }
    }
}

#[test]
fn exact_constant_is_permutation_invariant() {
    let phi = gen_gaussian_matrix(7, 11, 5).unwrap();
    let order = [10, 3, 7, 0, 1, 9, 4, 8, 2, 6, 5];
    let shuffled = phi.permute_columns(&order).unwrap();
    for s in [2, 3] {
        let a = rip_exact(&phi, s, DEFAULT_RIP_BUDGET).unwrap().delta;
        let b = rip_exact(&shuffled, s, DEFAULT_RIP_BUDGET).unwrap().delta;
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn identity_has_zero_constant() {
    let phi = gen_identity(9).unwrap();
    assert!(rip_exact(&phi, 4, DEFAULT_RIP_BUDGET).unwrap().delta < 1e-15);
    assert!(rip_monte_carlo(&phi, 4, 50, 1).unwrap().delta < 1e-15);
}

#[test]
fn budget_is_enforced() {
    let phi = gen_gaussian_matrix(8, 40, 1).unwrap();
    assert!(matches!(rip_exact(&phi, 10, 1000), Err(streamista::Error::BudgetExceeded { .. })));
}

#[test]
fn large_matrices_are_incoherent() {
    for seed in 0..100 {
        let phi = gen_gaussian_matrix(256, 512, derive_seed(17, seed)).unwrap();
        let e = phi.entries();
        let g = e.tr_mul(e);
        let worst = (0..512).flat_map(|i| (0..512).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| g[(i, j)].abs()).fold(0.0, f64::max);
        assert!(worst < 0.5, "seed {seed}: coherence {worst}");
    }
}

#[test]
fn columns_are_unit_norm_and_seeded() {
    let a = gen_gaussian_matrix(20, 30, 4).unwrap();
    for c in a.entries().column_iter() {
        assert!((c.norm() - 1.0).abs() < 1e-12);
    }
    assert_eq!(a, gen_gaussian_matrix(20, 30, 4).unwrap());
    assert_ne!(a.entries(), gen_gaussian_matrix(20, 30, 5).unwrap().entries());
}

#[test]
fn gaussian_noise_matches_requested_std() {
    let phi = gen_gaussian_matrix(256, 512, 2).unwrap();
    let mut a0 = DVector::zeros(512);
    for i in 0..40 {
        a0[i * 12] = 1.0 / 40f64.sqrt();
    }
    let std = 0.3 * (phi.entries() * &a0).norm() / 16.0;
    let (mut sum, mut sq, mut count) = (0.0, 0.0, 0.0);
    for k in 0..10_000 {
        let e = gen_noise_stream(256, std, 0.0, NoiseMode::GaussianScaled, 8, k).unwrap();
        sum += e.sum();
        sq += e.norm_squared();
        count += 256.0;
    }
    let mean = sum / count;
    let emp = (sq / count - mean * mean).sqrt();
    assert!((emp / std - 1.0).abs() < 0.05, "{emp} vs {std}");
}

#[test]
fn capped_noise_respects_the_cap() {
    for k in 0..200 {
        let e = gen_noise_stream(32, 0.7, 0.4, NoiseMode::Capped, 3, k).unwrap();
        assert!(e.norm() <= 0.7 / 1.4f64.sqrt());
    }
    assert!(gen_noise(8, -1.0, 0.1, NoiseMode::Capped, 0).is_err());
    assert!(gen_noise(8, 1.0, 1.0, NoiseMode::Capped, 0).is_err());
}

#[test]
fn measure_is_linear_plus_noise() {
    let phi = gen_gaussian_matrix(5, 7, 1).unwrap();
    let x = DVector::from_fn(7, |i, _| i as f64 - 3.0);
    let e = DVector::from_element(5, 0.25);
    let y = measure(&phi, &x, &e).unwrap();
    assert!((y - (phi.entries() * &x + &e)).norm() < 1e-14);
    assert!(measure(&phi, &DVector::zeros(6), &e).is_err());
}

#[test]
fn csv_round_trip() {
    let phi = gen_gaussian_matrix(4, 6, 77).unwrap();
    let mut buf = Vec::new();
    phi.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("4,6,77\n"));
    let back = MeasurementMatrix::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.entries(), phi.entries());
    assert_eq!(back.seed(), 77);
}

#[test]
fn non_unit_columns_are_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    assert!(MeasurementMatrix::from_entries(m, 0).is_err());
}

#[test]
fn worst_case_vector_attains_the_constant() {
    let phi = gen_gaussian_matrix(8, 12, 9).unwrap();
    let rip = rip_exact(&phi, 3, DEFAULT_RIP_BUDGET).unwrap();
    let x = worst_case_vector(&phi, &rip.worst_support);
    assert!((x.norm() - 1.0).abs() < 1e-12);
    let dev = ((phi.entries() * &x).norm_squared() - 1.0).abs();
    assert!((dev - rip.delta).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sparse_vectors_obey_the_isometry(seed in 0u64..1000, coeffs in prop::collection::vec(-5.0f64..5.0, 3)) {
        let phi = gen_gaussian_matrix(9, 12, seed).unwrap();
        let delta = rip_exact(&phi, 3, DEFAULT_RIP_BUDGET).unwrap().delta;
        let mut x = DVector::zeros(12);
        for (t, c) in coeffs.iter().enumerate() {
            x[(seed as usize + 5 * t) % 12] += c;
        }
        let e = (phi.entries() * &x).norm_squared();
        let n = x.norm_squared();
        prop_assert!(e <= (1.0 + delta) * n + 1e-10);
        prop_assert!(e >= (1.0 - delta) * n - 1e-10);
    }
}
