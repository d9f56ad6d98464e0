//! Regret exponents under the capacity condition `d_eff(l) <= (n/l)^gamma`.
//!
//! With a dictionary of size `m = n^a`, each algorithm's regret scales as
//! `n^b`. The two PKAWV variants have closed forms. The two KONS baselines
//! are obtained by minimizing their regret bounds numerically over a
//! logarithmic grid of `lambda = n^l` (and `mu = n^u`) and reading off the
//! growth rate between two large values of `n`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateQuery {
    pub gamma: f64,
    pub a_grid: Vec<f64>,
}

impl RateQuery {
    pub fn new(gamma: f64, a_grid: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::input(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if a_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::input("dictionary exponents must lie in [0, 1]"));
        }
        Ok(Self { gamma, a_grid })
    }

    /// `steps + 1` evenly spaced exponents in `[0, 1]`.
    pub fn uniform(gamma: f64, steps: usize) -> Result<Self> {
        let steps = steps.max(1);
        Self::new(gamma, (0..=steps).map(|i| i as f64 / steps as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateAlgorithm {
    Pkawv,
    PkawvBeforehand,
    SketchedKons,
    ProsNKons,
}

impl RateAlgorithm {
    pub const ALL: [RateAlgorithm; 4] = [
        RateAlgorithm::Pkawv,
        RateAlgorithm::PkawvBeforehand,
        RateAlgorithm::SketchedKons,
        RateAlgorithm::ProsNKons,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RateAlgorithm::Pkawv => "pkawv",
            RateAlgorithm::PkawvBeforehand => "pkawv-beforehand",
            RateAlgorithm::SketchedKons => "sketched-kons",
            RateAlgorithm::ProsNKons => "pros-n-kons",
        }
    }
}

impl fmt::Display for RateAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub algorithm: RateAlgorithm,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
}

/// Best achievable exponent `gamma / (1 + gamma)`.
pub fn optimal_exponent(gamma: f64) -> f64 {
    gamma / (1.0 + gamma)
}

/// Smallest dictionary exponent at which PKAWV reaches the optimal rate.
pub fn pkawv_threshold(gamma: f64) -> f64 {
    2.0 * gamma / (1.0 - gamma * gamma)
}

/// Same threshold when the inputs are known in advance.
pub fn beforehand_threshold(gamma: f64) -> f64 {
    2.0 * gamma / (1.0 + gamma)
}

pub fn pkawv_exponent(gamma: f64, a: f64) -> f64 {
    if a >= pkawv_threshold(gamma) {
        optimal_exponent(gamma)
    } else {
        1.0 + a * (gamma - 1.0) / (2.0 * gamma)
    }
}

pub fn beforehand_exponent(gamma: f64, a: f64) -> f64 {
    if a >= beforehand_threshold(gamma) {
        optimal_exponent(gamma)
    } else {
        1.0 - a / (2.0 * gamma)
    }
}

const GRID_STEP: f64 = 1e-3;
const LOG_N_SMALL: f64 = 200.0;
const LOG_N_LARGE: f64 = 400.0;

fn logsumexp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> + Clone {
    let steps = ((hi - lo) / GRID_STEP).round() as usize;
    (0..=steps).map(move |i| lo + i as f64 * GRID_STEP)
}

/// `log min_lambda [lambda + (n/m) d_eff(lambda)]`.
fn sketched_kons_log_bound(gamma: f64, a: f64, log_n: f64) -> f64 {
    grid(-1.0, 2.0)
        .map(|l| {
            let d_eff = gamma * (1.0 - l);
            logsumexp(&[l * log_n, (1.0 - a + d_eff) * log_n])
        })
        .fold(f64::INFINITY, f64::min)
}

/// `log min_{lambda, mu} [m_mu (lambda + d_eff(lambda)) + n mu / lambda]`
/// where `m_mu = d_eff(mu) = (n/mu)^gamma` is the dictionary the sampler
/// builds at level `mu`, constrained to `m_mu <= n^a`.
///
/// The objective is convex in `log lambda`, so the inner minimization is a
/// ternary search; `mu` runs over the grid.
fn pros_n_kons_log_bound(gamma: f64, a: f64, log_n: f64) -> f64 {
    let u_min = 1.0 - a / gamma;
    grid(u_min.max(-2.0), 2.0)
        .filter(|&u| gamma * (1.0 - u) <= a + 1e-12)
        .map(|u| {
            let m_exp = gamma * (1.0 - u);
            let obj = |l: f64| {
                logsumexp(&[
                    (m_exp + l) * log_n,
                    (m_exp + gamma * (1.0 - l)) * log_n,
                    (1.0 + u - l) * log_n,
                ])
            };
            ternary_min(obj, -1.0, 3.0)
        })
        .fold(f64::INFINITY, f64::min)
}

fn ternary_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

fn fitted_exponent(bound: impl Fn(f64) -> f64) -> f64 {
    (bound(LOG_N_LARGE) - bound(LOG_N_SMALL)) / (LOG_N_LARGE - LOG_N_SMALL)
}

pub fn exponent(algorithm: RateAlgorithm, gamma: f64, a: f64) -> f64 {
    match algorithm {
        RateAlgorithm::Pkawv => pkawv_exponent(gamma, a),
        RateAlgorithm::PkawvBeforehand => beforehand_exponent(gamma, a),
        RateAlgorithm::SketchedKons => fitted_exponent(|ln| sketched_kons_log_bound(gamma, a, ln)),
        RateAlgorithm::ProsNKons => fitted_exponent(|ln| pros_n_kons_log_bound(gamma, a, ln)),
    }
}

pub fn emit_rates(query: &RateQuery) -> Vec<RateRow> {
    RateAlgorithm::ALL
        .iter()
        .flat_map(|&algorithm| {
            query.a_grid.iter().map(move |&a| RateRow {
                algorithm,
                gamma: query.gamma,
                a,
                b: exponent(algorithm, query.gamma, a),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_capacity() {
        let g = 0.25;
        assert!((optimal_exponent(g) - 0.2).abs() < 1e-15);
        assert!((pkawv_threshold(g) - 0.5 / 0.9375).abs() < 1e-15);
        let a = pkawv_threshold(g);
        let below = 1.0 + a * (g - 1.0) / (2.0 * g);
        assert!((below - 0.2).abs() < 1e-12);
    }

    #[test]
    fn beforehand_half() {
        assert!((beforehand_threshold(0.5) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sketched_kons_matches_balance_point() {
        // lambda = (n/m) d_eff(lambda) gives b = 1 - a / (1 + gamma)
        for &(g, a) in &[(0.25, 0.3), (0.5, 0.8), (0.4, 0.0)] {
            let b = exponent(RateAlgorithm::SketchedKons, g, a);
            assert!((b - (1.0 - a / (1.0 + g))).abs() < 5e-3, "g={g} a={a} b={b}");
        }
    }

    #[test]
    fn query_validation() {
        assert!(RateQuery::new(0.0, vec![0.5]).is_err());
        assert!(RateQuery::new(0.5, vec![1.5]).is_err());
        assert_eq!(RateQuery::uniform(0.3, 4).unwrap().a_grid.len(), 5);
    }
}
