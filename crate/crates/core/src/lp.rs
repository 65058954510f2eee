//! Dense tableau simplex for small linear programs of the form
//! `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The origin is always feasible under `b >= 0`, so no phase one is needed.
//! Bland's rule is used for both pivot choices, which rules out cycling on
//! the degenerate programs the capacity-region margins produce.

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::LinearProgram(format!("{m} constraint rows but {} bounds", b.len())));
    }
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(Error::LinearProgram(format!("row of width {} in a {n}-variable program", row.len())));
    }
    if b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::LinearProgram("right-hand sides must be finite and non-negative".into()));
    }

    let width = n + m + 1;
    let rhs = n + m;
    // rows 0..m are constraints, row m is the objective (reduced costs)
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[rhs] = b[i];
    }
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m).max(10);
    for _ in 0..max_iter {
        let Some(enter) = (0..n + m).find(|&j| t[m * width + j] < -EPS) else {
            let mut x = vec![0.0; n];
            for (i, &var) in basis.iter().enumerate() {
                if var < n {
                    x[var] = t[i * width + rhs];
                }
            }
            return Ok(LpSolution {
                objective: t[m * width + rhs],
                x,
            });
        };

        let ratio = |i: usize| {
            let coef = t[i * width + enter];
            (coef > EPS).then(|| t[i * width + rhs] / coef)
        };
        let min_ratio = (0..m).filter_map(ratio).fold(f64::INFINITY, f64::min);
        let leave = (0..m)
            .filter(|&i| ratio(i).is_some_and(|r| r <= min_ratio + EPS))
            .min_by_key(|&i| basis[i]);
        let Some(pivot_row) = leave else {
            return Err(Error::LinearProgram("objective is unbounded".into()));
        };

        let pivot = t[pivot_row * width + enter];
        for j in 0..width {
            t[pivot_row * width + j] /= pivot;
        }
        for i in 0..=m {
            if i == pivot_row {
                continue;
            }
            let factor = t[i * width + enter];
            if factor != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= factor * t[pivot_row * width + j];
                }
            }
        }
        basis[pivot_row] = enter;
    }
    Err(Error::LinearProgram("iteration limit reached".into()))
}
