#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(x: &[f64], y: &[f64], sigma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

/// `sin(3 x_1) + 0.1 N`-ish noise, clipped to [-1, 1].
pub fn smooth_labels(rng: &mut ChaCha8Rng, xs: &[Vec<f64>]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let s: f64 = x.iter().sum();
            let noise: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
            ((3.0 * s).sin() + 0.1 * noise).clamp(-1.0, 1.0)
        })
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            solve(a.to_vec(), e)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Kernel-AWV predictions from a lower factor of `K + lambda I` grown one row at a time.
pub fn kawv_predictions(xs: &[Vec<f64>], ys: &[f64], sigma: f64, lambda: f64) -> Vec<f64> {
    let n = xs.len();
    let mut l: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let k: Vec<f64> = (0..=t).map(|s| gauss(&xs[s], &xs[t], sigma)).collect();
        let mut row = vec![0.0; t + 1];
        for j in 0..t {
            let s: f64 = (0..j).map(|i| row[i] * l[j][i]).sum();
            row[j] = (k[j] - s) / l[j][j];
        }
        let s: f64 = row[..t].iter().map(|v| v * v).sum();
        row[t] = (k[t] + lambda - s).sqrt();
        l.push(row);
        // solve (K + lambda I) alpha = (y_1, .., y_{t-1}, 0)
        let mut z = vec![0.0; t + 1];
        for i in 0..=t {
            let rhs = if i < t { ys[i] } else { 0.0 };
            let s: f64 = (0..i).map(|j| l[i][j] * z[j]).sum();
            z[i] = (rhs - s) / l[i][i];
        }
        let mut alpha = vec![0.0; t + 1];
        for i in (0..=t).rev() {
            let s: f64 = (i + 1..=t).map(|j| l[j][i] * alpha[j]).sum();
            alpha[i] = (z[i] - s) / l[i][i];
        }
        out.push(alpha.iter().zip(&k).map(|(a, k)| a * k).sum());
    }
    out
}

/// Eigenvalues of the Gaussian Gram via pivoted Cholesky stopped at trace residual `tol`.
pub fn low_rank_spectrum(xs: &[Vec<f64>], sigma: f64, tol: f64) -> Vec<f64> {
    let n = xs.len();
    let mut diag = vec![1.0; n];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while diag.iter().sum::<f64>() > tol && cols.len() < n {
        let p = (0..n).max_by(|&i, &j| diag[i].total_cmp(&diag[j])).unwrap();
        let piv = diag[p].sqrt();
        let col: Vec<f64> = (0..n)
            .map(|i| {
                let s: f64 = cols.iter().map(|c| c[i] * c[p]).sum();
                (gauss(&xs[i], &xs[p], sigma) - s) / piv
            })
            .collect();
        for i in 0..n {
            diag[i] = (diag[i] - col[i] * col[i]).max(0.0);
        }
        cols.push(col);
    }
    let r = cols.len();
    let g: nalgebra::DMatrix<f64> = nalgebra::DMatrix::from_fn(r, r, |a, b| cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum());
    let mut ev: Vec<f64> = g.symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum();
    let se = (sse / (n - 2.0) / sxx).sqrt();
    (slope, se)
}
