//! Dense primal simplex for small problems of the form
//! `max c'x  s.t.  A x <= b, x >= 0` with `b >= 0`, so the slack basis is a
//! feasible start and no phase one is needed. Bland's rule (lowest index
//! enters, lowest basic index leaves among ratio ties) rules out cycling.

use crate::error::{Error, Result};

const PIVOT_TOLERANCE: f64 = 1e-12;
const MAX_PIVOTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::InvalidParameter(format!("{m} rows but {} right-hand sides", b.len())));
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::InvalidParameter(format!("row of length {} for {n} variables", row.len())));
    }
    if let Some(v) = b.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("right-hand side {v} must be finite and >= 0")));
    }
    if a.iter().flatten().chain(c).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite LP coefficient".into()));
    }

    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        t[i * width..i * width + n].copy_from_slice(&a[i]);
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = b[i];
    }
    // objective row holds -c; the optimum is reached once no entry is negative
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut pivots = 0;
    while let Some(enter) = (0..n + m).find(|&j| t[m * width + j] < -PIVOT_TOLERANCE) {
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = t[i * width + enter];
            if coef <= PIVOT_TOLERANCE {
                continue;
            }
            let ratio = t[i * width + n + m] / coef;
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => {
                    if ratio < best - PIVOT_TOLERANCE * best.abs().max(1.0)
                        || (ratio <= best + PIVOT_TOLERANCE * best.abs().max(1.0) && basis[i] < basis[k])
                    {
                        Some((i, ratio))
                    } else {
                        Some((k, best))
                    }
                }
            };
        }
        let Some((row, _)) = leave else {
            return Err(Error::InvalidParameter("linear program is unbounded".into()));
        };
        pivot(&mut t, width, m, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::InvalidParameter("simplex pivot limit reached".into()));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i * width + n + m].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, value, pivots })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for j in 0..width {
        t[row * width + j] /= p;
    }
    for i in 0..=m {
        if i == row {
            continue;
        }
        let factor = t[i * width + col];
        if factor == 0.0 {
            continue;
        }
        for j in 0..width {
            t[i * width + j] -= factor * t[row * width + j];
        }
        t[i * width + col] = 0.0;
    }
}
