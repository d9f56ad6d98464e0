//! Greedy grid adversary.
//!
//! At every round the adversary evaluates each `(x, y)` on a finite grid of
//! `[-1, 1]^d x y_grid` and plays the pair maximizing
//! `(yhat_t(x) - y)^2 - (f_t(x) - y)^2`, where `yhat_t` is the forecaster's
//! prediction given the history and `f_t` is batch kernel ridge fitted on the
//! same history. Ties go to the lexicographically smallest pair.

use crate::error::{Error, Result};
use crate::forecaster::Forecaster;
use crate::harness::dataset::Dataset;
use crate::harness::regret::KernelRidge;
use crate::kernel::KernelSpec;

/// Cap on `grid_points_per_dim^d * |y_grid|`.
pub const MAX_EVALUATIONS_PER_STEP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryOutcome {
    pub data: Dataset,
    pub predictions: Vec<f64>,
    pub evaluations_per_step: usize,
}

/// `points` evenly spaced values covering `[-1, 1]` (just `0` for a single point).
pub fn axis_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        p => (0..p)
            .map(|i| -1.0 + 2.0 * i as f64 / (p - 1) as f64)
            .collect(),
    }
}

fn grid_inputs(axis: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn adversary_generate(
    mut forecaster: Box<dyn Forecaster>,
    kernel: KernelSpec,
    lambda: f64,
    n: usize,
    dim: usize,
    grid_points_per_dim: usize,
    y_grid: &[f64],
) -> Result<AdversaryOutcome> {
    if dim == 0 || grid_points_per_dim == 0 || y_grid.is_empty() {
        return Err(Error::input("adversary grid must be non-empty"));
    }
    if y_grid.iter().any(|y| !y.is_finite()) {
        return Err(Error::input("label grid must be finite"));
    }
    let evaluations = u32::try_from(dim)
        .ok()
        .and_then(|d| grid_points_per_dim.checked_pow(d))
        .and_then(|g| g.checked_mul(y_grid.len()))
        .filter(|&e| e <= MAX_EVALUATIONS_PER_STEP)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "{grid_points_per_dim}^{dim} x {} grid exceeds {MAX_EVALUATIONS_PER_STEP} evaluations",
                y_grid.len()
            ))
        })?;
    let mut ys = y_grid.to_vec();
    ys.sort_by(f64::total_cmp);
    let candidates = grid_inputs(&axis_grid(grid_points_per_dim), dim);

    let mut data = Dataset::default();
    let mut predictions = Vec::with_capacity(n);
    for _ in 0..n {
        let ridge = KernelRidge::fit(kernel, &data.inputs, &data.labels, lambda)?;
        let mut best: Option<(f64, usize, f64)> = None;
        for (xi, x) in candidates.iter().enumerate() {
            let yhat = forecaster.peek(x)?;
            let fx = ridge.predict(x);
            for &y in &ys {
                let gap = (yhat - y) * (yhat - y) - (fx - y) * (fx - y);
                if best.is_none_or(|(b, _, _)| gap > b) {
                    best = Some((gap, xi, y));
                }
            }
        }
        let (_, xi, y) = best.expect("grid is non-empty");
        let x = candidates[xi].clone();
        predictions.push(forecaster.predict(&x)?);
        forecaster.update(y)?;
        data.inputs.push(x);
        data.labels.push(y);
    }
    Ok(AdversaryOutcome {
        data,
        predictions,
        evaluations_per_step: evaluations,
    })
}
