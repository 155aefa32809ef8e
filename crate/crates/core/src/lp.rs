//! Dense tableau simplex for small linear programs of the form
//! `maximize c.x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The origin is feasible under `b >= 0`, so the slack basis is a valid
//! starting point and no phase one is needed. Bland's rule prevents cycling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
}

pub fn maximize(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if c.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    if b.iter().any(|&bi| bi < 0.0) {
        return Err(Error::Validation("simplex requires b >= 0".into()));
    }

    // tableau: m constraint rows + objective row; columns x | slack | rhs
    let cols = n + m + 1;
    let mut t = DMatrix::<f64>::zeros(m + 1, cols);
    for i in 0..m {
        for j in 0..n {
            t[(i, j)] = a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, cols - 1)] = b[i];
    }
    for j in 0..n {
        t[(m, j)] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m).max(10);
    for _ in 0..max_pivots {
        let Some(enter) = (0..n + m).find(|&j| t[(m, j)] < -PIVOT_TOL) else {
            let mut x = DVector::zeros(n);
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[(i, cols - 1)];
                }
            }
            return Ok(LpSolution { objective: t[(m, cols - 1)], x });
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[(i, enter)];
            if aij > PIVOT_TOL {
                let ratio = t[(i, cols - 1)] / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Validation("linear program is unbounded".into()));
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
    }
    Err(Error::NoConvergence { iterations: max_pivots, residual: f64::NAN })
}

fn pivot(t: &mut DMatrix<f64>, row: usize, col: usize) {
    let p = t[(row, col)];
    let cols = t.ncols();
    for j in 0..cols {
        t[(row, j)] /= p;
    }
    for i in 0..t.nrows() {
        if i == row {
            continue;
        }
        let f = t[(i, col)];
        if f != 0.0 {
            for j in 0..cols {
                t[(i, j)] -= f * t[(row, j)];
            }
        }
    }
}

/// Hemisphere witness: maximizes `m` subject to `<ray_i, u> >= m` and
/// `|u_j| <= 1`. Returns `(u, m)`; the rays lie in a common open hemisphere
/// iff `m > 0`.
pub fn hemisphere_margin(rays: &[DVector<f64>]) -> Result<(DVector<f64>, f64)> {
    let dim = rays[0].len();
    // substitute w = u + 1 in [0, 2] and t = m + s0 >= 0
    let s0 = (dim as f64).sqrt() + 1.0;
    let nv = dim + 1;
    let rows = rays.len() + dim + 1;
    let mut a = DMatrix::<f64>::zeros(rows, nv);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, r) in rays.iter().enumerate() {
        for j in 0..dim {
            a[(i, j)] = -r[j];
        }
        a[(i, dim)] = 1.0;
        b[i] = s0 - r.sum();
    }
    for j in 0..dim {
        a[(rays.len() + j, j)] = 1.0;
        b[rays.len() + j] = 2.0;
    }
    a[(rows - 1, dim)] = 1.0;
    b[rows - 1] = 3.0 * s0;
    let mut c = DVector::zeros(nv);
    c[dim] = 1.0;
    let sol = maximize(&c, &a, &b)?;
    let u = DVector::from_iterator(dim, (0..dim).map(|j| sol.x[j] - 1.0));
    // recompute the margin directly from u
    let margin = rays.iter().map(|r| r.dot(&u)).fold(f64::INFINITY, f64::min);
    Ok((u, margin))
}
