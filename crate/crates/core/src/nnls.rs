//! Non-negative least squares (Lawson–Hanson active set).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Minimizes `‖Ax − b‖₂` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Argument(format!(
            "right-hand side has {} rows, matrix has {m}",
            b.len()
        )));
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = 10.0 * f64::EPSILON * scale * m.max(n) as f64 * b.norm().max(1.0);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let max_iter = 3 * n.max(1) + 30;

    for _ in 0..max_iter {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else {
            return Ok(x);
        };
        passive[j] = true;
        loop {
            let s = passive_solve(a, b, &passive)?;
            let blocking: Vec<usize> = (0..n).filter(|&i| passive[i] && s[i] <= 0.0).collect();
            if blocking.is_empty() {
                x = s;
                break;
            }
            let alpha = blocking
                .iter()
                .map(|&i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    Err(Error::Numerical(format!(
        "NNLS did not converge in {max_iter} iterations"
    )))
}

/// Unconstrained least squares restricted to the passive columns.
fn passive_solve(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> Result<DVector<f64>> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(&cols);
    let z = sub
        .svd(true, true)
        .solve(b, 1e-14)
        .map_err(|e| Error::Numerical(format!("least-squares step failed: {e}")))?;
    let mut s = DVector::zeros(passive.len());
    for (k, &j) in cols.iter().enumerate() {
        s[j] = z[k];
    }
    Ok(s)
}

/// Ratio of the largest to the smallest singular value.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
