//! Small dense helpers for triangular factors.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOne {
    Update,
    Downdate,
}

/// Downdate would make the factored matrix indefinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPositiveDefinite;

/// In-place rank-one modification of an upper-triangular factor.
///
/// Given `R` with `A = R^T R`, overwrites `R` so that `R^T R = A +/- x x^T`.
/// `x` is used as scratch. The strict lower triangle of `R` is not touched.
/// A zero trailing diagonal entry is allowed for an update, which is what
/// bordering a factor with an empty row and column produces.
pub fn chol_rank_one(
    r: &mut DMatrix<f64>,
    x: &mut [f64],
    kind: RankOne,
) -> Result<(), NotPositiveDefinite> {
    let n = r.nrows();
    debug_assert_eq!(r.ncols(), n);
    debug_assert_eq!(x.len(), n);
    let sign = match kind {
        RankOne::Update => 1.0,
        RankOne::Downdate => -1.0,
    };
    for j in 0..n {
        let rjj = r[(j, j)];
        let xj = x[j];
        let arg = rjj * rjj + sign * xj * xj;
        if arg.is_nan() || arg <= 0.0 || !arg.is_finite() {
            if kind == RankOne::Update && arg == 0.0 {
                // rjj == xj == 0: column j carries nothing, leave it
                continue;
            }
            return Err(NotPositiveDefinite);
        }
        let rnew = arg.sqrt();
        if rjj == 0.0 {
            // only reachable for the trailing bordered column
            r[(j, j)] = rnew;
            for i in (j + 1)..n {
                let rji = xj * x[i] / rnew;
                r[(j, i)] = rji;
                x[i] = 0.0;
            }
            continue;
        }
        let c = rnew / rjj;
        let s = xj / rjj;
        r[(j, j)] = rnew;
        for i in (j + 1)..n {
            let rji = (r[(j, i)] + sign * s * x[i]) / c;
            r[(j, i)] = rji;
            x[i] = c * x[i] - s * rji;
        }
    }
    Ok(())
}

/// Grows a square matrix by one row and column of zeros.
pub fn grow_square(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let old = std::mem::replace(m, DMatrix::zeros(0, 0));
    *m = old.resize(n + 1, n + 1, 0.0);
}

/// Solves `R^T R x = b` for upper-triangular `R`.
pub fn solve_normal_upper(r: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let y = r.tr_solve_upper_triangular(b)?;
    r.solve_upper_triangular(&y)
}

/// Upper Cholesky factor `R` with `R^T R = a`, adding diagonal jitter if the
/// plain factorization fails. Returns the factor and whether jitter was used.
pub fn upper_cholesky_with_jitter(a: &DMatrix<f64>) -> Option<(DMatrix<f64>, bool)> {
    let n = a.nrows();
    if n == 0 {
        return Some((DMatrix::zeros(0, 0), false));
    }
    if let Some(ch) = a.clone().cholesky() {
        return Some((ch.l().transpose(), false));
    }
    let scale = (a.trace() / n as f64).abs().max(f64::MIN_POSITIVE);
    let mut jitter = 1e-14 * scale;
    while jitter < 1e-4 * scale {
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        if let Some(ch) = shifted.cholesky() {
            return Some((ch.l().transpose(), true));
        }
        jitter *= 10.0;
    }
    None
}
