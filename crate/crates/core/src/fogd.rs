//! Fourier online gradient descent: random Fourier features for the
//! Gaussian kernel and plain gradient steps on the square loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::forecaster::{check_input, check_label, Forecaster, Pending};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FogdConfig {
    pub features: usize,
    pub eta: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl FogdConfig {
    /// 1000 features and learning rate `1/sqrt(n)`.
    pub fn with_defaults(n: usize, sigma: f64, seed: u64) -> Self {
        Self {
            features: 1000,
            eta: 1.0 / (n.max(1) as f64).sqrt(),
            sigma,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FogdForecaster {
    config: FogdConfig,
    dim: usize,
    // row-major D x d
    frequencies: Vec<f64>,
    phases: Vec<f64>,
    weights: Vec<f64>,
    input_dim: Option<usize>,
    pending: Pending<(Vec<f64>, f64)>,
}

impl FogdForecaster {
    pub fn new(config: FogdConfig, dim: usize) -> Result<Self> {
        if config.features == 0 {
            return Err(Error::input("number of random features must be >= 1"));
        }
        if !(config.eta >= 0.0 && config.eta.is_finite()) {
            return Err(Error::input(format!("learning rate must be nonnegative, got {}", config.eta)));
        }
        if !(config.sigma > 0.0 && config.sigma.is_finite()) {
            return Err(Error::input(format!("bandwidth must be positive, got {}", config.sigma)));
        }
        if dim == 0 {
            return Err(Error::input("input dimension must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, 1.0 / config.sigma)
            .map_err(|e| Error::input(format!("spectral sampler: {e}")))?;
        let frequencies: Vec<f64> = (0..config.features * dim)
            .map(|_| normal.sample(&mut rng))
            .collect();
        let phases: Vec<f64> = (0..config.features)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        Ok(Self {
            config,
            dim,
            frequencies,
            phases,
            weights: vec![0.0; config.features],
            input_dim: Some(dim),
            pending: Pending::default(),
        })
    }

    pub fn config(&self) -> &FogdConfig {
        &self.config
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `z_i(x) = sqrt(2/D) cos(w_i^T x + b_i)`.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "input has dimension {} but features were drawn for {}",
                x.len(),
                self.dim
            )));
        }
        let scale = (2.0 / self.config.features as f64).sqrt();
        Ok(self
            .frequencies
            .chunks_exact(self.dim)
            .zip(&self.phases)
            .map(|(w, b)| {
                let proj: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum();
                scale * (proj + b).cos()
            })
            .collect())
    }

    /// `theta <- theta - eta * 2 (yhat - y) z`.
    fn gradient_step(&mut self, z: &[f64], yhat: f64, y: f64) {
        let g = self.config.eta * 2.0 * (yhat - y);
        for (w, zi) in self.weights.iter_mut().zip(z) {
            *w -= g * zi;
        }
    }
}

impl Forecaster for FogdForecaster {
    fn predict(&mut self, x: &[f64]) -> Result<f64> {
        self.pending.ensure_idle()?;
        check_input(&mut self.input_dim, x)?;
        let z = self.embed(x)?;
        let yhat: f64 = self.weights.iter().zip(&z).map(|(w, zi)| w * zi).sum();
        self.pending.set((z, yhat));
        Ok(yhat)
    }

    fn update(&mut self, y: f64) -> Result<()> {
        check_label(y)?;
        let (z, yhat) = self.pending.take()?;
        self.gradient_step(&z, yhat, y);
        Ok(())
    }

    fn rounds(&self) -> usize {
        self.pending.rounds()
    }

    fn name(&self) -> &'static str {
        "fogd"
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}
