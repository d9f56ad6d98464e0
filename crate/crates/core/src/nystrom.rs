//! PKAWV on Nyström subspaces spanned by a dictionary of past inputs.
//!
//! The dictionary is grown online by ridge-leverage-score sampling: a new
//! input is scored against the current dictionary and admitted with
//! probability `min(1, beta * score)`. Points are never removed.
//!
//! The forecaster keeps an upper-triangular `R` with
//! `R^T R = K_{t,I}^T K_{t,I} + lambda K_{I,I}`, where the rows of `K_{t,I}`
//! run over every input seen so far including the current, still unlabeled
//! one. Each round adds that row with a rank-one update. Admitting a point
//! borders `R` with a new row and column through one update and one
//! downdate; if the downdate breaks down the factor is rebuilt densely.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forecaster::{check_input, check_label, Forecaster, Pending};
use crate::kernel::KernelSpec;
use crate::linalg::{
    chol_rank_one, grow_square, solve_normal_upper, upper_cholesky_with_jitter, RankOne,
};

/// Parameters of the leverage-score sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KorsConfig {
    /// Approximation level.
    pub mu: f64,
    /// Oversampling factor.
    pub beta: f64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
}

impl KorsConfig {
    pub fn new(mu: f64, beta: f64, eps: f64, delta: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            mu,
            beta,
            eps,
            delta,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `beta = 12 ln(n / delta)` and `eps = 1/2`.
    pub fn with_default_beta(mu: f64, n: usize, delta: f64, seed: u64) -> Result<Self> {
        let beta = 12.0 * (n.max(1) as f64 / delta).ln();
        Self::new(mu, beta, 0.5, delta, seed)
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.mu) || !positive(self.beta) {
            return Err(Error::input("mu and beta must be positive"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::input(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }
}

/// Dictionary points together with `K_II` and a lower factor of `K_II + mu I`.
///
/// Both triangles are stored packed by rows so that admitting a point only
/// appends one row.
#[derive(Debug, Clone)]
pub struct Dictionary {
    mu: f64,
    points: Vec<Vec<f64>>,
    step_indices: Vec<usize>,
    k_rows: Vec<f64>,
    reg_rows: Vec<f64>,
}

fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl Dictionary {
    fn new(mu: f64) -> Self {
        Self {
            mu,
            points: Vec::new(),
            step_indices: Vec::new(),
            k_rows: Vec::new(),
            reg_rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// 1-based arrival times of the dictionary points.
    pub fn step_indices(&self) -> &[usize] {
        &self.step_indices
    }

    /// Dense copy of `K_II`.
    pub fn k_ii(&self) -> DMatrix<f64> {
        let m = self.len();
        DMatrix::from_fn(m, m, |i, j| {
            let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
            self.k_rows[row_start(hi) + lo]
        })
    }

    /// `L^{-1} b` for the lower factor `L L^T = K_II + mu I`.
    fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(b.len());
        for (i, &bi) in b.iter().enumerate() {
            let row = &self.reg_rows[row_start(i)..row_start(i + 1)];
            let s: f64 = row[..i].iter().zip(&w).map(|(l, w)| l * w).sum();
            w.push((bi - s) / row[i]);
        }
        w
    }

    /// `min(1, (1 + eps)/mu * (k_tt - b^T (K_II + mu I)^{-1} b))`, floored at 0.
    fn leverage(&self, b: &[f64], k_tt: f64, eps: f64) -> f64 {
        let w = self.forward(b);
        let residual = k_tt - w.iter().map(|v| v * v).sum::<f64>();
        ((1.0 + eps) / self.mu * residual).clamp(0.0, 1.0)
    }

    fn insert(&mut self, x: &[f64], step: usize, b: &[f64], k_tt: f64) {
        let w = self.forward(b);
        let schur = (k_tt + self.mu - w.iter().map(|v| v * v).sum::<f64>()).max(self.mu * 1e-12);
        self.reg_rows.extend_from_slice(&w);
        self.reg_rows.push(schur.sqrt());
        self.k_rows.extend_from_slice(b);
        self.k_rows.push(k_tt);
        self.points.push(x.to_vec());
        self.step_indices.push(step);
    }
}

/// One pass of the leverage-score sampler over `inputs`, seeded from `kors.seed`.
pub fn sample_dictionary(
    kernel: KernelSpec,
    kors: &KorsConfig,
    inputs: &[Vec<f64>],
) -> Result<Dictionary> {
    kors.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(kors.seed);
    let mut dict = Dictionary::new(kors.mu);
    let mut dim = None;
    for (t, x) in inputs.iter().enumerate() {
        check_input(&mut dim, x)?;
        let b = kernel.column(&dict.points, x);
        let k_tt = kernel.diag(x);
        let p = (kors.beta * dict.leverage(&b, k_tt, kors.eps)).min(1.0);
        if rng.random::<f64>() < p {
            dict.insert(x, t + 1, &b, k_tt);
        }
    }
    Ok(dict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NystromMode {
    /// Dictionary grows while streaming.
    Streaming,
    /// Dictionary computed from the whole input sequence before streaming.
    Beforehand,
}

#[derive(Debug, Clone)]
pub struct NystromForecaster {
    kernel: KernelSpec,
    lambda: f64,
    kors: KorsConfig,
    mode: NystromMode,
    rng: ChaCha8Rng,
    dict: Dictionary,
    // columns[j][s] = k(x_s, dictionary point j); streaming mode only
    columns: Vec<Vec<f64>>,
    r: DMatrix<f64>,
    c: DVector<f64>,
    inputs: Vec<Vec<f64>>,
    labels: Vec<f64>,
    dim: Option<usize>,
    pending: Pending<Vec<f64>>,
    fallbacks: usize,
    last_leverage: Option<f64>,
}

impl NystromForecaster {
    pub fn new(kernel: KernelSpec, lambda: f64, kors: KorsConfig) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::input(format!("lambda must be positive, got {lambda}")));
        }
        kors.validate()?;
        Ok(Self {
            kernel,
            lambda,
            kors,
            mode: NystromMode::Streaming,
            rng: ChaCha8Rng::seed_from_u64(kors.seed),
            dict: Dictionary::new(kors.mu),
            columns: Vec::new(),
            r: DMatrix::zeros(0, 0),
            c: DVector::zeros(0),
            inputs: Vec::new(),
            labels: Vec::new(),
            dim: None,
            pending: Pending::default(),
            fallbacks: 0,
            last_leverage: None,
        })
    }

    /// Runs the sampler over `inputs` first, then streams with that fixed dictionary.
    pub fn beforehand(
        kernel: KernelSpec,
        lambda: f64,
        kors: KorsConfig,
        inputs: &[Vec<f64>],
    ) -> Result<Self> {
        let mut f = Self::new(kernel, lambda, kors)?;
        let mut dim = None;
        for x in inputs {
            check_input(&mut dim, x)?;
        }
        f.dict = sample_dictionary(kernel, &kors, inputs)?;
        f.mode = NystromMode::Beforehand;
        f.dim = dim;
        let m = f.dict.len();
        let a = f.dict.k_ii() * lambda;
        let (r, jittered) = upper_cholesky_with_jitter(&a)
            .ok_or_else(|| Error::numeric("lambda K_II could not be factorized"))?;
        if jittered {
            f.fallbacks += 1;
        }
        f.r = r;
        f.c = DVector::zeros(m);
        Ok(f)
    }

    pub fn mode(&self) -> NystromMode {
        self.mode
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kors(&self) -> &KorsConfig {
        &self.kors
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.c
    }

    /// Inputs seen so far, including a pending one.
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Leverage estimate used for the most recent admission decision.
    pub fn last_leverage(&self) -> Option<f64> {
        self.last_leverage
    }

    /// Approximate ridge leverage score of `x` against the current dictionary.
    pub fn leverage_estimate(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim {
            if d != x.len() {
                return Err(Error::input("input dimension does not match the stream"));
            }
        }
        let b = self.kernel.column(&self.dict.points, x);
        Ok(self.dict.leverage(&b, self.kernel.diag(x), self.kors.eps))
    }

    /// `min(1, beta * tau)`.
    pub fn admission_probability(&self, tau: f64) -> f64 {
        (self.kors.beta * tau).min(1.0)
    }

    fn draw_admission(&mut self, tau: f64) -> bool {
        let p = self.admission_probability(tau);
        let u: f64 = self.rng.random();
        u < p
    }

    /// `K_{t,I}^T K_{t,I} + lambda K_II` rebuilt from the cached kernel columns.
    fn rebuild_system(&self) -> DMatrix<f64> {
        let m = self.columns.len();
        let mut a = self.dict.k_ii() * self.lambda;
        for i in 0..m {
            for j in 0..=i {
                let dot: f64 = self.columns[i]
                    .iter()
                    .zip(&self.columns[j])
                    .map(|(u, v)| u * v)
                    .sum();
                a[(i, j)] += dot;
                if i != j {
                    a[(j, i)] += dot;
                }
            }
        }
        a
    }

    fn refactorize(&mut self) -> Result<()> {
        let a = self.rebuild_system();
        let (r, _) = upper_cholesky_with_jitter(&a)
            .ok_or_else(|| Error::numeric("Nyström system could not be refactorized"))?;
        self.r = r;
        self.fallbacks += 1;
        Ok(())
    }

    /// Admits the current input `x_t` (already pushed to `inputs`).
    fn grow(&mut self, x: &[f64], a_old: &[f64], k_tt: f64) -> Result<()> {
        let t = self.inputs.len();
        let m = self.dict.len();
        let kappa: Vec<f64> = self.kernel.column(&self.inputs, x);
        let cross: Vec<f64> = (0..m)
            .map(|j| {
                let dot: f64 = self.columns[j].iter().zip(&kappa).map(|(u, v)| u * v).sum();
                dot + self.lambda * a_old[j]
            })
            .collect();
        let corner = kappa.iter().map(|v| v * v).sum::<f64>() + self.lambda * k_tt;
        let rhs_new: f64 = kappa[..t - 1].iter().zip(&self.labels).map(|(k, y)| k * y).sum();

        grow_square(&mut self.r);
        let g = (1.0 + corner).sqrt();
        let mut u: Vec<f64> = cross.iter().map(|c| c / (1.0 + g)).collect();
        let mut v = u.clone();
        u.push(g);
        v.push(-1.0);

        self.dict.insert(x, t, a_old, k_tt);
        self.columns.push(kappa);
        let c_old = std::mem::replace(&mut self.c, DVector::zeros(0));
        self.c = c_old.resize_vertically(m + 1, rhs_new);

        let ok = chol_rank_one(&mut self.r, &mut u, RankOne::Update).is_ok()
            && chol_rank_one(&mut self.r, &mut v, RankOne::Downdate).is_ok();
        if !ok {
            self.refactorize()?;
        }
        Ok(())
    }
}

impl Forecaster for NystromForecaster {
    fn predict(&mut self, x: &[f64]) -> Result<f64> {
        self.pending.ensure_idle()?;
        check_input(&mut self.dim, x)?;
        let k_tt = self.kernel.diag(x);
        let mut a = self.kernel.column(&self.dict.points, x);

        let admit = match self.mode {
            NystromMode::Streaming => {
                let tau = self.dict.leverage(&a, k_tt, self.kors.eps);
                self.last_leverage = Some(tau);
                self.draw_admission(tau)
            }
            NystromMode::Beforehand => false,
        };

        self.inputs.push(x.to_vec());
        if self.mode == NystromMode::Streaming {
            for (col, &v) in self.columns.iter_mut().zip(&a) {
                col.push(v);
            }
        }
        if !a.is_empty() {
            let mut w = a.clone();
            if chol_rank_one(&mut self.r, &mut w, RankOne::Update).is_err() {
                self.refactorize()?;
            }
        }
        if admit {
            self.grow(x, &a, k_tt)?;
            a.push(k_tt);
        }

        let yhat = if a.is_empty() {
            0.0
        } else {
            let alpha = solve_normal_upper(&self.r, &self.c)
                .ok_or_else(|| Error::numeric("singular Nyström factor"))?;
            a.iter().zip(alpha.iter()).map(|(k, al)| k * al).sum()
        };
        if !yhat.is_finite() {
            return Err(Error::numeric("non-finite Nyström prediction"));
        }
        self.pending.set(a);
        Ok(yhat)
    }

    fn update(&mut self, y: f64) -> Result<()> {
        check_label(y)?;
        let a = self.pending.take()?;
        for (ci, ai) in self.c.iter_mut().zip(&a) {
            *ci += y * ai;
        }
        self.labels.push(y);
        Ok(())
    }

    fn rounds(&self) -> usize {
        self.pending.rounds()
    }

    fn dict_size(&self) -> usize {
        self.dict.len()
    }

    fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    fn stored_floats(&self) -> usize {
        let d = self.dim.unwrap_or(0);
        let dict = self.dict.points.len() * d + self.dict.k_rows.len() + self.dict.reg_rows.len();
        let cols: usize = self.columns.iter().map(Vec::len).sum();
        dict + cols + self.r.len() + self.c.len() + self.inputs.len() * d + self.labels.len()
    }

    fn name(&self) -> &'static str {
        match self.mode {
            NystromMode::Streaming => "nystrom",
            NystromMode::Beforehand => "nystrom-beforehand",
        }
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}
