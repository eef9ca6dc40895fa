//! Nonnegative convex quadratic programs `min vᵀQv − bᵀv` subject to `v ≥ 0`.
//!
//! Active-set method in the style of Lawson and Hanson, run on the diagonally
//! rescaled problem.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Solution of a nonnegative quadratic program.
#[derive(Clone, Debug)]
pub struct QpSolution {
    pub v: Vec<f64>,
    /// Objective `vᵀQv − bᵀv` at the solution.
    pub objective: f64,
    pub iterations: usize,
}

fn solve_free(q: &DMatrix<f64>, b: &DVector<f64>, free: &[usize]) -> Option<Vec<f64>> {
    let k = free.len();
    let a = DMatrix::from_fn(k, k, |i, j| 2.0 * q[(free[i], free[j])]);
    let r = DVector::from_fn(k, |i, _| b[free[i]]);
    let z = match a.clone().cholesky() {
        Some(c) => c.solve(&r),
        None => a.lu().solve(&r)?,
    };
    if z.iter().all(|x| x.is_finite()) {
        Some(z.iter().copied().collect())
    } else {
        None
    }
}

/// Minimizes `vᵀQv − bᵀv` over `v ≥ 0` for a symmetric positive semidefinite `Q`.
pub fn nonneg_qp(q: &DMatrix<f64>, b: &[f64]) -> Result<QpSolution> {
    let n = b.len();
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::QuadraticProgram(format!("Q is {}×{}, b has {n} entries", q.nrows(), q.ncols())));
    }
    if q.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(Error::QuadraticProgram(String::from("non-finite input")));
    }
    // Rescale to unit diagonal: v = D u with D = diag(Q)^{-1/2}.
    let d: Vec<f64> = (0..n).map(|i| if q[(i, i)] > 0.0 { 1.0 / q[(i, i)].sqrt() } else { 1.0 }).collect();
    let qs = DMatrix::from_fn(n, n, |i, j| q[(i, j)] * d[i] * d[j]);
    let bs = DVector::from_fn(n, |i, _| b[i] * d[i]);
    let bscale = bs.amax().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * bscale * n as f64;

    let mut u = vec![0.0; n];
    let mut free = vec![false; n];
    let mut blocked = vec![false; n];
    let mut iterations = 0;
    let max_iter = 30 * n + 30;
    loop {
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::QuadraticProgram(format!("no convergence after {max_iter} iterations")));
        }
        // Dual w = b − 2Qu.
        let w = &bs - (&qs * DVector::from_column_slice(&u)) * 2.0;
        let cand = (0..n)
            .filter(|&i| !free[i] && !blocked[i] && w[i] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = cand else { break };
        free[j] = true;
        for _ in 0..=n {
            let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
            let Some(z) = solve_free(&qs, &bs, &idx) else {
                free[j] = false;
                break;
            };
            if z.iter().all(|&x| x > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    u[i] = z[k];
                }
                break;
            }
            let mut alpha = 1.0f64;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = u[i] - z[k];
                    alpha = alpha.min(if denom > 0.0 { u[i] / denom } else { 0.0 });
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                u[i] += alpha * (z[k] - u[i]);
                if u[i] <= 1e-15 * bscale || (z[k] <= 0.0 && alpha * (z[k] - u[i]) == 0.0 && u[i] == 0.0) {
                    u[i] = 0.0;
                    free[i] = false;
                }
            }
        }
        if free[j] {
            blocked.iter_mut().for_each(|b| *b = false);
        } else {
            blocked[j] = true;
        }
    }
    let v: Vec<f64> = u.iter().zip(&d).map(|(x, s)| x * s).collect();
    let vv = DVector::from_vec(v.clone());
    let objective = (vv.transpose() * q * &vv)[(0, 0)] - vv.dot(&DVector::from_vec(b.to_vec()));
    Ok(QpSolution { v, objective, iterations })
}
