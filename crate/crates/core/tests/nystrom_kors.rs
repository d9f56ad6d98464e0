mod common;

use common::*;
use pkawv_core::nystrom::{sample_dictionary, KorsConfig, NystromForecaster};
use pkawv_core::{Forecaster, KernelSpec};
use rand::Rng;

/// `a_t^T (K_{t,I}^T K_{t,I} + lambda K_II)^{-1} K_{t,I}^T (y_1, .., y_{t-1}, 0)`.
fn projected_prediction(xs: &[Vec<f64>], ys: &[f64], dict: &[Vec<f64>], lambda: f64) -> f64 {
    let m = dict.len();
    if m == 0 {
        return 0.0;
    }
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| dict.iter().map(|p| gauss(x, p, 1.0)).collect())
        .collect();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    rows.iter().map(|r| r[i] * r[j]).sum::<f64>()
                        + lambda * gauss(&dict[i], &dict[j], 1.0)
                })
                .collect()
        })
        .collect();
    let c: Vec<f64> = (0..m)
        .map(|i| rows.iter().zip(ys).map(|(r, y)| r[i] * y).sum())
        .collect();
    let alpha = solve(a, c);
    rows.last().unwrap().iter().zip(&alpha).map(|(a, b)| a * b).sum()
}

fn data(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut g = rng(seed);
    let xs = uniform_points(&mut g, n, d);
    let ys = smooth_labels(&mut g, &xs);
    (xs, ys)
}

#[test]
fn streaming_matches_dense_projected_solve() {
    let (xs, ys) = data(51, 150, 2);
    let kors = KorsConfig::new(0.05, 1.0, 0.5, 0.1, 3).unwrap();
    let mut f = NystromForecaster::new(KernelSpec::gaussian(1.0).unwrap(), 1.0, kors).unwrap();
    let mut sizes = Vec::new();
    for t in 0..xs.len() {
        let got = f.predict(&xs[t]).unwrap();
        let mut labels = ys[..t].to_vec();
        labels.push(0.0);
        let want = projected_prediction(&xs[..=t], &labels, f.dictionary().points(), 1.0);
        assert!((got - want).abs() < 1e-7, "t={t}: {got} vs {want}");
        assert_eq!(f.labels().len(), t);
        f.update(ys[t]).unwrap();
        sizes.push(f.dict_size());
    }
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    assert!(*sizes.last().unwrap() <= xs.len());
    assert!(*sizes.last().unwrap() > 3);
}

#[test]
fn beforehand_matches_dense_projected_solve() {
    let (xs, ys) = data(52, 120, 2);
    let kernel = KernelSpec::gaussian(1.0).unwrap();
    let kors = KorsConfig::new(0.1, 1.0, 0.5, 0.1, 4).unwrap();
    let dict = sample_dictionary(kernel, &kors, &xs).unwrap();
    let mut f = NystromForecaster::beforehand(kernel, 1.0, kors, &xs).unwrap();
    assert_eq!(f.dictionary().points(), dict.points());
    for t in 0..xs.len() {
        let got = f.predict(&xs[t]).unwrap();
        let mut labels = ys[..t].to_vec();
        labels.push(0.0);
        let want = projected_prediction(&xs[..=t], &labels, dict.points(), 1.0);
        assert!((got - want).abs() < 1e-7, "t={t}: {got} vs {want}");
        f.update(ys[t]).unwrap();
    }
}

#[test]
fn full_dictionary_equals_exact() {
    for seed in 0..5 {
        let (xs, ys) = data(60 + seed, 50, 1 + seed as usize % 3);
        let kors = KorsConfig::with_default_beta(1e-8, 50, 0.1, seed).unwrap();
        let mut f = NystromForecaster::new(KernelSpec::gaussian(1.0).unwrap(), 1.0, kors).unwrap();
        let want = kawv_predictions(&xs, &ys, 1.0, 1.0);
        for (t, x) in xs.iter().enumerate() {
            let got = f.predict(x).unwrap();
            assert!((got - want[t]).abs() < 1e-6, "seed {seed} t={t}: {got} vs {}", want[t]);
            f.update(ys[t]).unwrap();
        }
    }
}

#[test]
fn smaller_mu_is_no_worse_up_to_approximation_term() {
    let n = 200;
    let (b, lambda, mu_small) = (1.0, 1.0, 1e-6);
    for seed in 0..5 {
        let (xs, ys) = data(70 + seed, n, 2);
        let loss = |mu: f64| {
            let kors = KorsConfig::new(mu, 1.0, 0.5, 0.1, seed).unwrap();
            let mut f = NystromForecaster::new(KernelSpec::gaussian(1.0).unwrap(), lambda, kors).unwrap();
            let mut total = 0.0;
            for (x, &y) in xs.iter().zip(&ys) {
                let p = f.predict(x).unwrap();
                total += (p - y) * (p - y);
                f.update(y).unwrap();
            }
            (total, f.dict_size())
        };
        let (fine, m) = loss(mu_small);
        let (coarse, _) = loss(1.0);
        let slack = mu_small * n as f64 * b * b / lambda * (m as f64 + 1.0) * 2.0;
        assert!(fine <= coarse + slack, "seed {seed}: {fine} > {coarse} + {slack}");
    }
}

#[test]
fn deterministic_under_seed() {
    let (xs, ys) = data(80, 100, 2);
    let kors = KorsConfig::new(0.01, 2.0, 0.5, 0.1, 9).unwrap();
    let run = || {
        let mut f = NystromForecaster::new(KernelSpec::gaussian(1.0).unwrap(), 1.0, kors).unwrap();
        let mut out = Vec::new();
        for (x, &y) in xs.iter().zip(&ys) {
            out.push(f.predict(x).unwrap());
            f.update(y).unwrap();
        }
        (out, f.dictionary().step_indices().to_vec())
    };
    assert_eq!(run(), run());
}

#[test]
fn leverage_scores_stay_in_unit_interval() {
    let mut g = rng(81);
    let kors = KorsConfig::new(0.01, 1.0, 0.5, 0.1, 1).unwrap();
    let mut f = NystromForecaster::new(KernelSpec::gaussian(1.0).unwrap(), 1.0, kors).unwrap();
    for x in uniform_points(&mut g, 80, 2) {
        let tau = f.leverage_estimate(&x).unwrap();
        assert!((0.0..=1.0).contains(&tau));
        f.predict(&x).unwrap();
        f.update(g.random_range(-1.0..=1.0)).unwrap();
    }
}

#[test]
fn stored_floats_track_dictionary_and_stream() {
    let (xs, ys) = data(57, 120, 2);
    let kors = KorsConfig::new(0.05, 1.0, 0.5, 0.1, 5).unwrap();
    let mut f = NystromForecaster::new(KernelSpec::gaussian(1.0).unwrap(), 1.0, kors).unwrap();
    let mut last = 0;
    for (x, &y) in xs.iter().zip(&ys) {
        f.predict(x).unwrap();
        f.update(y).unwrap();
        let now = f.stored_floats();
        assert!(now > last);
        last = now;
    }
    let (n, m) = (xs.len(), f.dict_size());
    // inputs, labels, cached columns and the m x m factor at least
    assert!(last >= n * 3 + n * m + m * m, "{last} n={n} m={m}");
}
