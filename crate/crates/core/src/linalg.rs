//! Small dense solvers for the surrogate regressions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Solves `a · x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot whose magnitude is at most `rel_tol` times the largest diagonal
/// magnitude of `a` is reported as [`Error::SingularSystem`].
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, rel_tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let tol = rel_tol * if scale > 0.0 { scale } else { 1.0 };
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if !(a[pivot][col].abs() > tol) {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

fn check_inputs(x: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<usize> {
    if y.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if w.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: w.len(),
        });
    }
    let p = x.first().map_or(0, |r| r.len());
    if let Some(row) = x.iter().find(|r| r.len() != p) {
        return Err(Error::Dimension {
            expected: p,
            actual: row.len(),
        });
    }
    if w.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Config("sample weights must be finite and non-negative".into()));
    }
    if !w.iter().any(|&v| v > 0.0) {
        return Err(Error::Config("at least one sample weight must be positive".into()));
    }
    Ok(p)
}

/// Minimizes `Σ wᵢ (yᵢ − β₀ − xᵢ·β)² + λ‖β‖²` with an unpenalized intercept.
pub fn weighted_ridge_fit(x: &[Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> Result<RidgeFit> {
    let p = check_inputs(x, y, w)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    // design columns: [1, x_1 .. x_p]
    let d = p + 1;
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for ((row, &yi), &wi) in x.iter().zip(y).zip(w) {
        if wi == 0.0 {
            continue;
        }
        for r in 0..d {
            let zr = if r == 0 { 1.0 } else { row[r - 1] };
            b[r] += wi * zr * yi;
            for c in r..d {
                let zc = if c == 0 { 1.0 } else { row[c - 1] };
                a[r][c] += wi * zr * zc;
            }
        }
    }
    for r in 0..d {
        for c in 0..r {
            a[r][c] = a[c][r];
        }
    }
    for k in 1..d {
        a[k][k] += lambda;
    }
    let rel_tol = if lambda > 0.0 { 0.0 } else { 1e-12 };
    let beta = solve(a, b, rel_tol)?;
    Ok(RidgeFit {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
    })
}

/// Weighted least squares without intercept: minimizes `Σ wᵢ (yᵢ − xᵢ·β)²`.
pub fn weighted_least_squares(x: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let p = check_inputs(x, y, w)?;
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for ((row, &yi), &wi) in x.iter().zip(y).zip(w) {
        for r in 0..p {
            b[r] += wi * row[r] * yi;
            for c in 0..p {
                a[r][c] += wi * row[r] * row[c];
            }
        }
    }
    solve(a, b, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_recovery() {
        let x: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![t, (t * 0.7).sin(), t * t * 0.1]
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 + 3.0 * r[0] - 1.5 * r[1] + 0.25 * r[2]).collect();
        let w = vec![1.0; x.len()];
        let fit = weighted_ridge_fit(&x, &y, &w, 0.0).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-8);
        for (c, e) in fit.coefficients.iter().zip([3.0, -1.5, 0.25]) {
            assert!((c - e).abs() < 1e-8, "{c} vs {e}");
        }
    }

    #[test]
    fn huge_lambda_shrinks_to_weighted_mean() {
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 0.5]];
        let y = vec![1.0, 2.0, 3.0, 4.0];
        let w = vec![1.0, 2.0, 1.0, 4.0];
        let fit = weighted_ridge_fit(&x, &y, &w, 1e12).unwrap();
        let mean = (1.0 + 4.0 + 3.0 + 16.0) / 8.0;
        assert!((fit.intercept - mean).abs() < 1e-6);
        assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn collinear_without_penalty_is_singular() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let y = vec![1.0, 2.0, 3.0];
        let w = vec![1.0; 3];
        assert_eq!(weighted_ridge_fit(&x, &y, &w, 0.0), Err(Error::SingularSystem));
        assert!(weighted_ridge_fit(&x, &y, &w, 1.0).is_ok());
    }

    #[test]
    fn weight_validation() {
        let x = vec![vec![1.0], vec![2.0]];
        let y = vec![1.0, 2.0];
        assert!(matches!(
            weighted_ridge_fit(&x, &y, &[0.0, 0.0], 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            weighted_ridge_fit(&x, &y, &[1.0, -1.0], 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            weighted_ridge_fit(&x, &y, &[1.0], 1.0),
            Err(Error::Dimension { .. })
        ));
    }
}
