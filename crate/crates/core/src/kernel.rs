//! Kernel evaluation, Gram matrices and the spectral quantities built on them.
//!
//! Everything here is pure; the effective dimension and the spectral regret
//! bound are used as numeric oracles by the forecasters and the harness.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
}

/// A bounded positive definite kernel, `sup_x k(x, x) <= kappa^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    sigma: f64,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::input(format!("bandwidth must be positive, got {sigma}")));
        }
        Ok(Self {
            family: KernelFamily::Gaussian,
            sigma,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kappa(&self) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 1.0,
        }
    }

    /// `k(x, x')`, checking dimensions.
    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        if x.len() != x2.len() {
            return Err(Error::input(format!(
                "kernel arguments differ in dimension ({} vs {})",
                x.len(),
                x2.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::input("kernel arguments must have dimension >= 1"));
        }
        Ok(self.eval_unchecked(x, x2))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], x2: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => {
                let sq: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * self.sigma * self.sigma)).exp()
            }
        }
    }

    /// `k(x, x)`.
    #[inline]
    pub fn diag(&self, _x: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => 1.0,
        }
    }

    /// Gram matrix over the rows of `points`.
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<GramMatrix> {
        let n = points.len();
        if let Some(first) = points.first() {
            let d = first.len();
            if let Some(bad) = points.iter().position(|p| p.len() != d) {
                return Err(Error::input(format!(
                    "point {bad} has dimension {} but expected {d}",
                    points[bad].len()
                )));
            }
        }
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.eval_unchecked(&points[i], &points[i]);
            for j in 0..i {
                let v = self.eval_unchecked(&points[i], &points[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(GramMatrix(k))
    }

    /// `(k(x, p))_p` for every `p` in `points`.
    pub fn column(&self, points: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        points.iter().map(|p| self.eval_unchecked(p, x)).collect()
    }
}

/// Dense symmetric kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

impl GramMatrix {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::input("Gram matrix must be square"));
        }
        Ok(Self(m))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Eigenvalues with rounding-level negatives clamped to zero.
    ///
    /// Fails when an eigenvalue is more negative than `1e-10 * n * max|K|`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.order();
        if n == 0 {
            return Ok(Vec::new());
        }
        let max_abs = self.0.amax();
        let tol = 1e-10 * n as f64 * max_abs.max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(self.0.clone()).eigenvalues;
        let mut out = Vec::with_capacity(n);
        for &v in eig.iter() {
            if !v.is_finite() {
                return Err(Error::numeric("non-finite eigenvalue"));
            }
            if v < -tol {
                return Err(Error::numeric(format!(
                    "matrix is not positive semidefinite (eigenvalue {v:e}, tolerance {tol:e})"
                )));
            }
            out.push(v.max(0.0));
        }
        out.sort_by(|a, b| b.total_cmp(a));
        Ok(out)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && !lambda.is_nan() {
        Ok(())
    } else {
        Err(Error::input(format!("regularization must be positive, got {lambda}")))
    }
}

/// `d_eff(lambda) = tr(K (K + lambda I)^{-1})`.
pub fn effective_dimension(k: &GramMatrix, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(effective_dimension_from_spectrum(&k.eigenvalues()?, lambda))
}

pub fn effective_dimension_from_spectrum(eigenvalues: &[f64], lambda: f64) -> f64 {
    eigenvalues.iter().map(|&l| l / (l + lambda)).sum()
}

/// The two spectral regret bounds of Kernel-AWV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBound {
    /// `lambda * |f|^2 + B^2 * sum_k log(1 + lambda_k / lambda)`.
    pub spectral: f64,
    /// `lambda * |f|^2 + B^2 * log(e + e n kappa^2 / lambda) * d_eff(lambda)`.
    pub relaxed: f64,
    pub effective_dimension: f64,
}

pub fn spectral_regret_bound(
    k: &GramMatrix,
    lambda: f64,
    b: f64,
    f_norm_sq: f64,
    kappa: f64,
) -> Result<SpectralBound> {
    check_lambda(lambda)?;
    if f_norm_sq < 0.0 {
        return Err(Error::input("squared norm must be nonnegative"));
    }
    let eig = k.eigenvalues()?;
    spectral_bound_from_spectrum(&eig, lambda, b, f_norm_sq, kappa)
}

pub(crate) fn spectral_bound_from_spectrum(
    eig: &[f64],
    lambda: f64,
    b: f64,
    f_norm_sq: f64,
    kappa: f64,
) -> Result<SpectralBound> {
    let n = eig.len() as f64;
    let log_sum: f64 = eig.iter().map(|&l| (l / lambda).ln_1p()).sum();
    let d_eff = effective_dimension_from_spectrum(eig, lambda);
    let e = std::f64::consts::E;
    let spectral = lambda * f_norm_sq + b * b * log_sum;
    let relaxed = lambda * f_norm_sq + b * b * (e + e * n * kappa * kappa / lambda).ln() * d_eff;
    if spectral > relaxed * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::numeric(format!(
            "spectral bound {spectral} exceeds its effective-dimension relaxation {relaxed}"
        )));
    }
    Ok(SpectralBound {
        spectral,
        relaxed,
        effective_dimension: d_eff,
    })
}
