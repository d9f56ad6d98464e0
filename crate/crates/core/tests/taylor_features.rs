mod common;

use common::*;
use pkawv_core::taylor::{
    binomial, enumerate_indices, truncation_bound, TaylorBasis, TaylorForecaster,
};
use pkawv_core::Forecaster;
use proptest::prelude::*;
use rand::Rng;

/// Every tuple with entries summing to at most `m`, by brute force.
fn all_tuples(m: u32, d: usize) -> Vec<Vec<u32>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for head in 0..=m {
        for mut tail in all_tuples(m - head, d - 1) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn factorial(t: u32) -> f64 {
    (1..=t).map(|j| j as f64).product()
}

/// `prod_i x_i^{k_i} / (sigma^{k_i} sqrt(k_i!)) exp(-x_i^2 / 2 sigma^2)` evaluated directly.
fn g_direct(k: &[u32], x: &[f64], sigma: f64) -> f64 {
    k.iter()
        .zip(x)
        .map(|(&t, &z)| {
            z.powi(t as i32) / (sigma.powi(t as i32) * factorial(t).sqrt())
                * (-z * z / (2.0 * sigma * sigma)).exp()
        })
        .product()
}

#[test]
fn index_set_matches_brute_force() {
    for m in 0..=10 {
        for d in 1..=5 {
            let got: Vec<Vec<u32>> = enumerate_indices(m, d)
                .unwrap()
                .iter()
                .map(|k| k.as_slice().to_vec())
                .collect();
            assert_eq!(got.len() as u64, binomial((m as u64) + d as u64, d as u64).unwrap());
            let mut want = all_tuples(m, d);
            want.sort_by(|a, b| {
                let da: u32 = a.iter().sum();
                let db: u32 = b.iter().sum();
                da.cmp(&db).then_with(|| b.cmp(a))
            });
            assert_eq!(got, want, "M={m} d={d}");
        }
    }
}

#[test]
fn embedding_matches_direct_formula() {
    let mut g = rng(31);
    for &(m, d, sigma) in &[(6u32, 2usize, 1.0), (4, 3, 0.7), (12, 1, 2.0)] {
        let basis = TaylorBasis::new(m, d, sigma).unwrap();
        for x in uniform_points(&mut g, 20, d) {
            let x: Vec<f64> = x.iter().map(|v| 1.5 * v).collect();
            let e = basis.embed(&x).unwrap();
            for (k, v) in basis.indices().iter().zip(&e) {
                let want = g_direct(k.as_slice(), &x, sigma);
                assert!((v - want).abs() <= 1e-13 * want.abs().max(1e-300) + 1e-300);
            }
        }
    }
}

#[test]
fn taylor_awv_equals_projected_ridge() {
    // yhat_t = g_t^T (lambda I + sum_{s<=t} g_s g_s^T)^{-1} sum_{s<t} y_s g_s
    let mut g = rng(32);
    let (m, d, lambda) = (4u32, 2usize, 0.5);
    let basis = TaylorBasis::new(m, d, 1.0).unwrap();
    let r = basis.len();
    let mut f = TaylorForecaster::new(basis.clone(), lambda).unwrap();
    let xs = uniform_points(&mut g, 60, d);
    let ys: Vec<f64> = (0..60).map(|_| g.random_range(-1.0..=1.0)).collect();
    let mut a: Vec<Vec<f64>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { lambda } else { 0.0 }).collect())
        .collect();
    let mut b = vec![0.0; r];
    for (x, &y) in xs.iter().zip(&ys) {
        let v = basis.embed(x).unwrap();
        for i in 0..r {
            for j in 0..r {
                a[i][j] += v[i] * v[j];
            }
        }
        let theta = solve(a.clone(), b.clone());
        let want: f64 = theta.iter().zip(&v).map(|(t, v)| t * v).sum();
        let got = f.predict(x).unwrap();
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        f.update(y).unwrap();
        for i in 0..r {
            b[i] += y * v[i];
        }
    }
}

#[test]
fn squared_norm_approaches_one() {
    let x = [0.6, -0.4];
    let mut prev = 0.0;
    for m in 0..=30 {
        let e = TaylorBasis::new(m, 2, 1.0).unwrap().embed(&x).unwrap();
        let s: f64 = e.iter().map(|v| v * v).sum();
        assert!(s <= 1.0 + 1e-12 && s >= prev - 1e-15);
        prev = s;
    }
    assert!(prev > 1.0 - 1e-12);
}

proptest! {
    #[test]
    fn squared_norm_at_most_one(
        x in prop::collection::vec(-3.0..3.0f64, 1..=3),
        m in 0u32..12,
        sigma in 0.3..3.0f64,
    ) {
        let e = TaylorBasis::new(m, x.len(), sigma).unwrap().embed(&x).unwrap();
        let s: f64 = e.iter().map(|v| v * v).sum();
        prop_assert!(s <= 1.0 + 1e-12);
    }

    #[test]
    fn reconstruction_within_truncation_bound(
        x in prop::collection::vec(-1.0..1.0f64, 2),
        y in prop::collection::vec(-1.0..1.0f64, 2),
        m in 1u32..14,
        sigma in 0.5..2.0f64,
    ) {
        let radius = (2.0f64).sqrt();
        let basis = TaylorBasis::new(m, 2, sigma).unwrap();
        let err = basis.reconstruction_error(&x, &y).unwrap();
        prop_assert!(err <= truncation_bound(m, radius, sigma) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn embedding_is_continuous(
        x in prop::collection::vec(-1.7..1.7f64, 3),
        dir in prop::collection::vec(-1.0..1.0f64, 3),
        m in 0u32..10,
    ) {
        let basis = TaylorBasis::new(m, 3, 1.0).unwrap();
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + 1e-9 * b).collect();
        let ex = basis.embed(&x).unwrap();
        let ey = basis.embed(&y).unwrap();
        let sup = ex.iter().zip(&ey).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(sup <= 1e-6);
    }
}
