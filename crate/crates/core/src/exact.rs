//! Exact Kernel-AWV in dual form.
//!
//! Each round solves `(K_tt + lambda I) alpha = (y_1, .., y_{t-1}, 0)` from
//! scratch and predicts `k_t^T alpha`. The trailing zero target is the
//! `f(x_t)^2` penalty that distinguishes AWV from plain kernel ridge.
//! Cost is O(t^3) per round; this forecaster is the reference the
//! projected variants are checked against.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forecaster::{check_input, check_label, Forecaster, Pending};
use crate::kernel::KernelSpec;

#[derive(Debug, Clone)]
pub struct ExactKawv {
    kernel: KernelSpec,
    lambda: f64,
    dim: Option<usize>,
    inputs: Vec<Vec<f64>>,
    labels: Vec<f64>,
    // Row i holds k(x_i, x_j) for j <= i.
    gram_rows: Vec<Vec<f64>>,
    pending: Pending<()>,
}

impl ExactKawv {
    pub fn new(kernel: KernelSpec, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::input(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self {
            kernel,
            lambda,
            dim: None,
            inputs: Vec::new(),
            labels: Vec::new(),
            gram_rows: Vec::new(),
            pending: Pending::default(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    fn solve_round(&self) -> Result<f64> {
        let t = self.gram_rows.len();
        let mut a = DMatrix::<f64>::zeros(t, t);
        for (i, row) in self.gram_rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            a[(i, i)] += self.lambda;
        }
        let mut rhs = DVector::<f64>::zeros(t);
        rhs.as_mut_slice()[..t - 1].copy_from_slice(&self.labels);
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::numeric("K + lambda I is not positive definite"))?;
        let alpha = chol.solve(&rhs);
        let last = &self.gram_rows[t - 1];
        Ok(last.iter().zip(alpha.iter()).map(|(k, a)| k * a).sum())
    }
}

impl Forecaster for ExactKawv {
    fn predict(&mut self, x: &[f64]) -> Result<f64> {
        self.pending.ensure_idle()?;
        check_input(&mut self.dim, x)?;
        let mut row: Vec<f64> = self
            .inputs
            .iter()
            .map(|p| self.kernel.eval_unchecked(p, x))
            .collect();
        row.push(self.kernel.diag(x));
        self.gram_rows.push(row);
        self.inputs.push(x.to_vec());
        let yhat = match self.solve_round() {
            Ok(v) => v,
            Err(e) => {
                self.gram_rows.pop();
                self.inputs.pop();
                return Err(e);
            }
        };
        self.pending.set(());
        Ok(yhat)
    }

    fn update(&mut self, y: f64) -> Result<()> {
        check_label(y)?;
        self.pending.take()?;
        self.labels.push(y);
        Ok(())
    }

    fn rounds(&self) -> usize {
        self.pending.rounds()
    }

    fn name(&self) -> &'static str {
        "exact"
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}
