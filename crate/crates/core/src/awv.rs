//! Finite-dimensional Azoury-Warmuth-Vovk recursion on fixed features.
//!
//! The state keeps `A_t^{-1}` with `A_t = lambda I + sum_{s<=t} v_s v_s^T`
//! and `b = sum_{s<t} y_s v_s`. A round first folds `v_t` into the inverse
//! (Sherman-Morrison) and only then predicts `v_t^T A_t^{-1} b`: the current
//! point enters the regularizer before its label is known.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_finite, Error, Result};
use crate::forecaster::{check_label, Pending};

const SYMMETRIZE_EVERY: usize = 1000;

#[derive(Debug, Clone)]
pub struct AwvState {
    lambda: f64,
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
    pending: Pending<DVector<f64>>,
    work: DVector<f64>,
    steps: usize,
}

impl AwvState {
    pub fn new(r: usize, lambda: f64) -> Result<Self> {
        if r == 0 {
            return Err(Error::input("feature dimension must be >= 1"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::input(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self {
            lambda,
            a_inv: DMatrix::identity(r, r) / lambda,
            b: DVector::zeros(r),
            pending: Pending::default(),
            work: DVector::zeros(r),
            steps: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a_inv(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn rounds(&self) -> usize {
        self.pending.rounds()
    }

    pub(crate) fn ensure_idle(&self) -> Result<()> {
        self.pending.ensure_idle()
    }

    /// Rank-one update with `v`, then the prediction `v^T A_t^{-1} b_{t-1}`.
    pub fn step(&mut self, v: &[f64]) -> Result<f64> {
        self.pending.ensure_idle()?;
        if v.len() != self.dim() {
            return Err(Error::input(format!(
                "feature vector has length {} but the state has dimension {}",
                v.len(),
                self.dim()
            )));
        }
        check_finite(v, "feature vector")?;
        let v = DVector::from_column_slice(v);
        // w = A_{t-1}^{-1} v
        self.work.gemv(1.0, &self.a_inv, &v, 0.0);
        let denom = 1.0 + v.dot(&self.work);
        self.a_inv.ger(-1.0 / denom, &self.work, &self.work, 1.0);
        self.steps += 1;
        if self.steps.is_multiple_of(SYMMETRIZE_EVERY) {
            self.symmetrize();
        }
        // A_t^{-1} v = w / denom
        let yhat = self.work.dot(&self.b) / denom;
        self.pending.set(v);
        Ok(yhat)
    }

    pub fn supply_label(&mut self, y: f64) -> Result<()> {
        check_label(y)?;
        let v = self.pending.take()?;
        self.b.axpy(y, &v, 1.0);
        Ok(())
    }

    fn symmetrize(&mut self) {
        let r = self.dim();
        for i in 0..r {
            for j in 0..i {
                let m = 0.5 * (self.a_inv[(i, j)] + self.a_inv[(j, i)]);
                self.a_inv[(i, j)] = m;
                self.a_inv[(j, i)] = m;
            }
        }
    }
}
