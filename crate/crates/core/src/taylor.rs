//! Deterministic Taylor feature basis for the Gaussian kernel.
//!
//! For a multi-index `k` the basis function is
//! `g_k(x) = prod_i psi_{k_i}(x_i)` with
//! `psi_t(z) = z^t / (sigma^t sqrt(t!)) * exp(-z^2 / (2 sigma^2))`.
//! The `g_k` are orthonormal in the Gaussian RKHS, so the embedding needs no
//! whitening and the basis with `|k| <= M` spans a subspace whose kernel
//! approximation error decays like `(R/sigma)^{2M+2} / (M+1)!`.

use crate::error::{check_finite, Error, Result};
use crate::forecaster::{check_input, Forecaster};
use crate::awv::AwvState;
use crate::kernel::KernelSpec;

/// A multi-index `k` in `N_0^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(k: Vec<u32>) -> Self {
        Self(k)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `C(n, k)` with overflow detection.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n.checked_sub(k)?);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// All multi-indices of dimension `d` with degree at most `max_degree`,
/// ordered by degree and then lexicographically with larger leading
/// components first: `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
pub fn enumerate_indices(max_degree: u32, d: usize) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::input("dimension must be >= 1"));
    }
    let count = binomial(max_degree as u64 + d as u64, d as u64)
        .and_then(|c| usize::try_from(c).ok())
        .filter(|&c| c.checked_mul(d).is_some())
        .ok_or_else(|| {
            Error::Capacity(format!(
                "basis with degree {max_degree} in dimension {d} is too large"
            ))
        })?;
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0u32; d];
    for degree in 0..=max_degree {
        fill_degree(&mut buf, 0, degree, &mut out);
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

fn fill_degree(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for head in (0..=remaining).rev() {
        buf[pos] = head;
        fill_degree(buf, pos + 1, remaining - head, out);
    }
    buf[pos] = 0;
}

/// Degree cap `ceil(max(8 R^2 / sigma^2, 2 ln(n / min(lambda, 1))))`.
pub fn choose_m(radius: f64, sigma: f64, n: usize, lambda: f64) -> u32 {
    let n = n.max(1) as f64;
    let a = 8.0 * radius * radius / (sigma * sigma);
    let b = 2.0 * (n / lambda.min(1.0)).ln();
    a.max(b).ceil().max(0.0) as u32
}

/// `(R/sigma)^{2M+2} / (M+1)!`, evaluated in log space.
pub fn truncation_bound(max_degree: u32, radius: f64, sigma: f64) -> f64 {
    if radius == 0.0 {
        return 0.0;
    }
    let m1 = max_degree as f64 + 1.0;
    let log_fact: f64 = (2..=max_degree as u64 + 1).map(|j| (j as f64).ln()).sum();
    (2.0 * m1 * (radius.ln() - sigma.ln()) - log_fact).exp()
}

/// The feature map `x -> (g_k(x))_{|k| <= M}`.
#[derive(Debug, Clone)]
pub struct TaylorBasis {
    max_degree: u32,
    dim: usize,
    sigma: f64,
    indices: Vec<MultiIndex>,
    // 0.5 * ln(t!) for t = 0..=M
    half_log_fact: Vec<f64>,
}

impl TaylorBasis {
    pub fn new(max_degree: u32, dim: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::input(format!("bandwidth must be positive, got {sigma}")));
        }
        let indices = enumerate_indices(max_degree, dim)?;
        let mut half_log_fact = Vec::with_capacity(max_degree as usize + 1);
        let mut acc = 0.0;
        half_log_fact.push(0.0);
        for t in 1..=max_degree {
            acc += (t as f64).ln();
            half_log_fact.push(0.5 * acc);
        }
        Ok(Self {
            max_degree,
            dim,
            sigma,
            indices,
            half_log_fact,
        })
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of features, `C(M + d, d)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.embed_into(x, &mut out)?;
        Ok(out)
    }

    /// Writes `g_k(x)` for every index into `out`.
    ///
    /// Each factor `psi_t(z)` is accumulated as a log-magnitude and a sign so
    /// that large `t!` and tiny `z^t` never overflow or underflow early.
    pub fn embed_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "input has dimension {} but the basis expects {}",
                x.len(),
                self.dim
            )));
        }
        check_finite(x, "input")?;
        if out.len() != self.len() {
            return Err(Error::input("output buffer has the wrong length"));
        }
        let m = self.max_degree as usize + 1;
        let log_sigma = self.sigma.ln();
        let two_s2 = 2.0 * self.sigma * self.sigma;
        // per coordinate: (log|psi_t|, sign) for t in 0..=M; None marks an exact zero
        let mut table: Vec<Option<(f64, bool)>> = Vec::with_capacity(self.dim * m);
        for &z in x {
            let gauss = -z * z / two_s2;
            let log_abs = z.abs().ln();
            for t in 0..m {
                if t == 0 {
                    table.push(Some((gauss, false)));
                } else if z == 0.0 {
                    table.push(None);
                } else {
                    let tf = t as f64;
                    let lg = tf * (log_abs - log_sigma) - self.half_log_fact[t] + gauss;
                    table.push(Some((lg, z < 0.0 && t % 2 == 1)));
                }
            }
        }
        for (slot, k) in out.iter_mut().zip(&self.indices) {
            let mut log_mag = 0.0;
            let mut negative = false;
            let mut zero = false;
            for (i, &ki) in k.0.iter().enumerate() {
                match table[i * m + ki as usize] {
                    Some((lg, neg)) => {
                        log_mag += lg;
                        negative ^= neg;
                    }
                    None => {
                        zero = true;
                        break;
                    }
                }
            }
            *slot = if zero {
                0.0
            } else if negative {
                -log_mag.exp()
            } else {
                log_mag.exp()
            };
        }
        Ok(())
    }

    /// `|k(x, x') - sum_k g_k(x) g_k(x')|` for the Gaussian kernel of this bandwidth.
    pub fn reconstruction_error(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        let kernel = KernelSpec::gaussian(self.sigma)?;
        let exact = kernel.eval(x, x2)?;
        let a = self.embed(x)?;
        let b = self.embed(x2)?;
        let approx: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
        Ok((exact - approx).abs())
    }
}

/// PKAWV over the fixed subspace spanned by a Taylor basis.
#[derive(Debug, Clone)]
pub struct TaylorForecaster {
    basis: TaylorBasis,
    awv: AwvState,
    dim: Option<usize>,
    features: Vec<f64>,
}

impl TaylorForecaster {
    pub fn new(basis: TaylorBasis, lambda: f64) -> Result<Self> {
        let awv = AwvState::new(basis.len(), lambda)?;
        let features = vec![0.0; basis.len()];
        Ok(Self {
            dim: Some(basis.dim()),
            basis,
            awv,
            features,
        })
    }

    pub fn basis(&self) -> &TaylorBasis {
        &self.basis
    }

    pub fn state(&self) -> &AwvState {
        &self.awv
    }
}

impl Forecaster for TaylorForecaster {
    fn predict(&mut self, x: &[f64]) -> Result<f64> {
        self.awv.ensure_idle()?;
        check_input(&mut self.dim, x)?;
        self.basis.embed_into(x, &mut self.features)?;
        self.awv.step(&self.features)
    }

    fn update(&mut self, y: f64) -> Result<()> {
        self.awv.supply_label(y)
    }

    fn rounds(&self) -> usize {
        self.awv.rounds()
    }

    fn name(&self) -> &'static str {
        "taylor"
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}
