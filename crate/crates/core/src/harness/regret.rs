//! Regret against the batch kernel ridge comparator.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::harness::dataset::Dataset;
use crate::harness::run::RunRecord;
use crate::kernel::{spectral_bound_from_spectrum, GramMatrix, KernelSpec};

/// Largest stream for which the dense comparator is computed.
pub const MAX_COMPARATOR_N: usize = 3000;

/// Batch kernel ridge regression `alpha = (K + lambda I)^{-1} Y`.
#[derive(Debug, Clone)]
pub struct KernelRidge {
    kernel: KernelSpec,
    points: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    gram: GramMatrix,
}

impl KernelRidge {
    pub fn fit(kernel: KernelSpec, points: &[Vec<f64>], labels: &[f64], lambda: f64) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::input("inputs and labels differ in length"));
        }
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::input("lambda must be positive"));
        }
        let gram = kernel.gram(points)?;
        let n = points.len();
        let alpha = if n == 0 {
            DVector::zeros(0)
        } else {
            let mut a = gram.matrix().clone();
            for i in 0..n {
                a[(i, i)] += lambda;
            }
            let chol = a
                .cholesky()
                .ok_or_else(|| Error::numeric("K + lambda I is not positive definite"))?;
            chol.solve(&DVector::from_column_slice(labels))
        };
        Ok(Self {
            kernel,
            points: points.to_vec(),
            alpha,
            gram,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(self.alpha.iter())
            .map(|(p, a)| a * self.kernel.eval_unchecked(p, x))
            .sum()
    }

    /// Fitted values at the training points, `K alpha`.
    pub fn fitted(&self) -> DVector<f64> {
        self.gram.matrix() * &self.alpha
    }

    /// `alpha^T K alpha`.
    pub fn norm_sq(&self) -> f64 {
        self.alpha.dot(&self.fitted())
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretLedger {
    pub learner_loss: f64,
    pub comparator_loss: f64,
    pub comparator_norm_sq: f64,
    pub regret: f64,
    pub bound_prop21: f64,
    pub bound_satisfied: bool,
}

/// Compares a run against kernel ridge fitted on the same examples.
///
/// The bound is `lambda |f*|^2 + B^2 sum_j log(1 + lambda_j / lambda)`.
pub fn regret_report(
    records: &[RunRecord],
    data: &Dataset,
    kernel: KernelSpec,
    lambda: f64,
    bound: f64,
) -> Result<RegretLedger> {
    let n = records.len();
    if n > data.len() {
        return Err(Error::input(format!(
            "{n} records but the dataset has only {} examples",
            data.len()
        )));
    }
    if n > MAX_COMPARATOR_N {
        return Err(Error::Capacity(format!(
            "comparator needs a dense {n}x{n} solve; limit is {MAX_COMPARATOR_N}"
        )));
    }
    for (r, &y) in records.iter().zip(&data.labels) {
        if r.y != y {
            return Err(Error::input(format!(
                "record {} has label {} but the dataset has {y}",
                r.t, r.y
            )));
        }
    }
    let learner_loss: f64 = records.iter().map(|r| (r.y - r.yhat) * (r.y - r.yhat)).sum();
    let krr = KernelRidge::fit(kernel, &data.inputs[..n], &data.labels[..n], lambda)?;
    let fitted = krr.fitted();
    let comparator_loss: f64 = fitted
        .iter()
        .zip(&data.labels[..n])
        .map(|(f, y)| (y - f) * (y - f))
        .sum();
    let norm_sq = krr.norm_sq();
    let eig = krr.gram().eigenvalues()?;
    let b = spectral_bound_from_spectrum(&eig, lambda, bound, norm_sq, kernel.kappa())?;
    let regret = learner_loss - comparator_loss;
    Ok(RegretLedger {
        learner_loss,
        comparator_loss,
        comparator_norm_sq: norm_sq,
        regret,
        bound_prop21: b.spectral,
        bound_satisfied: regret <= b.spectral + 1e-6,
    })
}
