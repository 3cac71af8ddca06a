//! Logistic regression by iteratively reweighted least squares.

use crate::error::{Error, Result};
use crate::special::expit;

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-10;

/// Fitted coefficients, intercept first.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub iterations: usize,
}

impl LogisticFit {
    /// Predicted probability for one covariate row (without the intercept column).
    pub fn predict(&self, row: &[f64]) -> f64 {
        let eta = self.coefficients[0]
            + self.coefficients[1..].iter().zip(row).map(|(b, x)| b * x).sum::<f64>();
        expit(eta)
    }
}

/// Fits `P(y = 1 | x) = expit(b0 + b·x)`. `rows[i]` holds the covariates of
/// observation `i`; an intercept is added.
#[allow(clippy::needless_range_loop)]
pub fn fit_logistic(rows: &[Vec<f64>], outcomes: &[bool]) -> Result<LogisticFit> {
    if rows.len() != outcomes.len() || rows.is_empty() {
        return Err(Error::Fit("covariates and outcomes must be non-empty and aligned".into()));
    }
    let p = rows[0].len() + 1;
    if rows.iter().any(|r| r.len() + 1 != p) {
        return Err(Error::Fit("ragged covariate rows".into()));
    }
    let mut beta = vec![0.0; p];
    for iteration in 1..=MAX_ITER {
        // normal equations X'WX δ = X'(y − μ)
        let mut info = vec![vec![0.0; p]; p];
        let mut score = vec![0.0; p];
        for (row, &y) in rows.iter().zip(outcomes) {
            let eta = beta[0] + beta[1..].iter().zip(row).map(|(b, x)| b * x).sum::<f64>();
            let mu = expit(eta);
            let weight = mu * (1.0 - mu);
            let resid = f64::from(u8::from(y)) - mu;
            for j in 0..p {
                let xj = if j == 0 { 1.0 } else { row[j - 1] };
                score[j] += xj * resid;
                for k in 0..=j {
                    let xk = if k == 0 { 1.0 } else { row[k - 1] };
                    info[j][k] += weight * xj * xk;
                }
            }
        }
        for j in 0..p {
            for k in j + 1..p {
                info[j][k] = info[k][j];
            }
        }
        let step = cholesky_solve(info, score)?;
        let mut change: f64 = 0.0;
        for (b, s) in beta.iter_mut().zip(&step) {
            *b += s;
            change = change.max(s.abs());
        }
        if beta.iter().any(|b| !b.is_finite() || b.abs() > 50.0) {
            return Err(Error::Fit("coefficients diverged (separated data?)".into()));
        }
        if change < TOL {
            return Ok(LogisticFit {
                coefficients: beta,
                iterations: iteration,
            });
        }
    }
    Err(Error::Fit(format!("no convergence in {MAX_ITER} iterations")))
}

fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let diag = a[j][j] - (0..j).map(|k| a[j][k] * a[j][k]).sum::<f64>();
        if !(diag > 1e-12) {
            return Err(Error::Fit("information matrix is singular".into()));
        }
        a[j][j] = diag.sqrt();
        for i in j + 1..n {
            let off = a[i][j] - (0..j).map(|k| a[i][k] * a[j][k]).sum::<f64>();
            a[i][j] = off / a[j][j];
        }
    }
    for i in 0..n {
        b[i] = (b[i] - (0..i).map(|k| a[i][k] * b[k]).sum::<f64>()) / a[i][i];
    }
    for i in (0..n).rev() {
        b[i] = (b[i] - (i + 1..n).map(|k| a[k][i] * b[k]).sum::<f64>()) / a[i][i];
    }
    Ok(b)
}
