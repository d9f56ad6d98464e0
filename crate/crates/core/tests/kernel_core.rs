mod common;

use common::*;
use pkawv_core::kernel::effective_dimension_from_spectrum;
use pkawv_core::{effective_dimension, spectral_regret_bound, GramMatrix, KernelSpec};
use proptest::prelude::*;

fn points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=3usize).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec(-2.0..2.0f64, d), 1..=max_n)
    })
}

/// `tr(K (K + lambda I)^{-1}) = n - lambda tr((K + lambda I)^{-1})`.
fn d_eff_oracle(k: &GramMatrix, lambda: f64) -> f64 {
    let n = k.order();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| k.matrix()[(i, j)] + if i == j { lambda } else { 0.0 }).collect())
        .collect();
    let inv = inverse(&a);
    n as f64 - lambda * (0..n).map(|i| inv[i][i]).sum::<f64>()
}

proptest! {
    #[test]
    fn gram_is_symmetric_psd_with_unit_diagonal(xs in points(12), sigma in 0.3..3.0f64) {
        let k = KernelSpec::gaussian(sigma).unwrap();
        let g = k.gram(&xs).unwrap();
        let m = g.matrix();
        for i in 0..xs.len() {
            prop_assert_eq!(m[(i, i)], 1.0);
            for j in 0..xs.len() {
                prop_assert_eq!(m[(i, j)], m[(j, i)]);
                prop_assert!((m[(i, j)] - gauss(&xs[i], &xs[j], sigma)).abs() < 1e-14);
            }
        }
        let eig = g.eigenvalues().unwrap();
        prop_assert!(eig.iter().all(|&l| l >= 0.0));
        prop_assert!(eig.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn effective_dimension_bounded_and_monotone(
        xs in points(12),
        sigma in 0.3..3.0f64,
        l1 in 1e-3..10.0f64,
        factor in 1.0..100.0f64,
    ) {
        let g = KernelSpec::gaussian(sigma).unwrap().gram(&xs).unwrap();
        let d1 = effective_dimension(&g, l1).unwrap();
        let d2 = effective_dimension(&g, l1 * factor).unwrap();
        prop_assert!(d1 <= (xs.len() as f64).min(g.trace() / l1) + 1e-9);
        prop_assert!(d2 <= d1 + 1e-12);
        prop_assert!((d1 - d_eff_oracle(&g, l1)).abs() < 1e-8);
    }

    #[test]
    fn kernel_symmetric(x in prop::collection::vec(-3.0..3.0f64, 2), y in prop::collection::vec(-3.0..3.0f64, 2)) {
        let k = KernelSpec::gaussian(0.7).unwrap();
        prop_assert_eq!(k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
        prop_assert_eq!(k.eval(&x, &x).unwrap(), 1.0);
    }
}

#[test]
fn spectral_sum_below_relaxation_on_random_grams() {
    let mut g = rng(21);
    for trial in 0..100 {
        let n = 2 + trial % 19;
        let d = 1 + trial % 3;
        let xs = uniform_points(&mut g, n, d);
        let sigma = 0.2 + (trial as f64) / 40.0;
        let lambda = 10f64.powf(-2.0 + 3.0 * (trial % 7) as f64 / 6.0);
        let gram = KernelSpec::gaussian(sigma).unwrap().gram(&xs).unwrap();
        let eig = gram.eigenvalues().unwrap();
        let log_sum: f64 = eig.iter().map(|l| (1.0 + l / lambda).ln()).sum();
        let d_eff = effective_dimension_from_spectrum(&eig, lambda);
        let e = std::f64::consts::E;
        let relaxed = (e + e * n as f64 / lambda).ln() * d_eff;
        assert!(log_sum <= relaxed + 1e-12, "trial {trial}: {log_sum} > {relaxed}");
        let b = spectral_regret_bound(&gram, lambda, 1.0, 0.0, 1.0).unwrap();
        assert!((b.spectral - log_sum).abs() < 1e-9);
        assert!((b.relaxed - relaxed).abs() < 1e-9);
    }
}

#[test]
fn empty_gram_bound_is_the_norm_term() {
    let g = KernelSpec::gaussian(1.0).unwrap().gram(&[]).unwrap();
    let b = spectral_regret_bound(&g, 2.0, 1.0, 0.75, 1.0).unwrap();
    assert_eq!(b.spectral, 1.5);
    assert_eq!(b.effective_dimension, 0.0);
}

#[test]
fn non_psd_matrix_rejected() {
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    let g = GramMatrix::from_matrix(m).unwrap();
    assert!(g.eigenvalues().is_err());
}
