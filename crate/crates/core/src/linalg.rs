//! Small dense linear algebra: cyclic Jacobi for symmetric matrices and
//! Sturm-chain real-root counting for characteristic polynomials.
//!
//! Everything here is sized for matrices of order at most five.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const JACOBI_THRESHOLD: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues in descending order with the matching orthonormal
/// eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymmetricEigen {
    /// Rebuilds `V diag(values) V^T`.
    pub fn recompose(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenvectors are sign-normalized so that their first component with
/// magnitude above `1e-12` is positive.
pub fn symmetric_eigen(s: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.ncols() });
    }
    let norm = s.norm();
    let asym = (s - s.transpose()).norm();
    if asym > SYMMETRY_TOL * norm {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }

    let mut a = (s + s.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let cutoff = JACOBI_THRESHOLD * norm;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= cutoff {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= cutoff {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps coordinate order among exact ties
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut vec = v.column(i).clone_owned();
        if let Some(first) = vec.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                vec.neg_mut();
            }
        }
        vectors.set_column(col, &vec);
    }
    Ok(SymmetricEigen { values, vectors })
}

fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Characteristic polynomial `det(xI - A)` by Faddeev–LeVerrier.
/// Coefficients are ascending: `coeffs[k]` multiplies `x^k`.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let id = DMatrix::<f64>::identity(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[n + 1 - k];
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    coeffs
}

fn normalize_poly(p: &mut Vec<f64>, tol: f64) {
    let scale = p.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        p.clear();
        return;
    }
    for c in p.iter_mut() {
        *c /= scale;
        if c.abs() <= tol {
            *c = 0.0;
        }
    }
    while p.last() == Some(&0.0) {
        p.pop();
    }
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// Negated remainder of `a / b`; `b` must have a nonzero leading coefficient.
fn neg_remainder(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db];
    while r.len() > db {
        let dr = r.len() - 1;
        let f = r[dr] / lead;
        for (k, bk) in b.iter().enumerate() {
            r[dr - db + k] -= f * bk;
        }
        r.pop();
    }
    r.iter().map(|c| -c).collect()
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut count = 0;
    let mut prev = 0.0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            count += 1;
        }
        prev = v;
    }
    count
}

/// Sturm chain for `p` with coefficients below `tol` (relative to each
/// element's max-abs coefficient) treated as zero.
pub fn sturm_chain(p: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let mut p0 = p.to_vec();
    normalize_poly(&mut p0, tol);
    if p0.len() <= 1 {
        return vec![p0];
    }
    let mut p1 = derivative(&p0);
    normalize_poly(&mut p1, tol);
    let mut chain = vec![p0, p1];
    loop {
        let k = chain.len();
        if chain[k - 1].len() <= 1 {
            break;
        }
        let mut r = neg_remainder(&chain[k - 2], &chain[k - 1]);
        // remainders are measured against the dividend scale (max-abs 1)
        for c in r.iter_mut() {
            if c.abs() <= tol {
                *c = 0.0;
            }
        }
        while r.last() == Some(&0.0) {
            r.pop();
        }
        if r.is_empty() {
            break;
        }
        normalize_poly(&mut r, 0.0);
        chain.push(r);
    }
    chain
}

/// Monic `p` with the variable rescaled so the largest root bound is 1.
/// Root counts are unchanged and the coefficient tolerance becomes
/// independent of the overall scale of the roots.
fn root_scaled(p: &[f64]) -> Vec<f64> {
    let Some(d) = p.iter().rposition(|c| *c != 0.0) else {
        return Vec::new();
    };
    let lead = p[d];
    let s = (0..d).map(|k| (p[k] / lead).abs().powf(1.0 / (d - k) as f64)).fold(0.0, f64::max);
    if s == 0.0 {
        let mut q = vec![0.0; d + 1];
        q[d] = 1.0;
        return q;
    }
    (0..=d).map(|k| p[k] / lead * s.powi(k as i32 - d as i32)).collect()
}

/// Number of distinct real roots and number of distinct roots of `p`.
pub fn count_roots(p: &[f64], tol: f64) -> (usize, usize) {
    let chain = sturm_chain(&root_scaled(p), tol);
    let degree = chain[0].len().saturating_sub(1);
    if degree == 0 {
        return (0, 0);
    }
    let at_pos_inf = sign_changes(chain.iter().map(|q| *q.last().unwrap()));
    let at_neg_inf = sign_changes(chain.iter().map(|q| {
        let lead = *q.last().unwrap();
        if (q.len() - 1) % 2 == 0 {
            lead
        } else {
            -lead
        }
    }));
    let gcd_degree = chain.last().unwrap().len() - 1;
    (at_neg_inf - at_pos_inf, degree - gcd_degree)
}

/// Whether every root of `p` (with multiplicity) is real.
pub fn all_roots_real(p: &[f64], tol: f64) -> bool {
    let (real, distinct) = count_roots(p, tol);
    real == distinct
}

/// Normal of the hyperplane through `d` points in `R^d`, as the vector of
/// signed cofactors of the difference matrix. Not normalized.
pub fn hyperplane_normal(points: &[DVector<f64>]) -> DVector<f64> {
    let d = points[0].len();
    debug_assert_eq!(points.len(), d);
    if d == 1 {
        return DVector::from_element(1, 1.0);
    }
    let rows = d - 1;
    let mut diff = DMatrix::<f64>::zeros(rows, d);
    for r in 0..rows {
        let row = &points[r + 1] - &points[0];
        diff.set_row(r, &row.transpose());
    }
    let mut normal = DVector::zeros(d);
    for i in 0..d {
        let minor = diff.clone().remove_column(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        normal[i] = sign * minor.determinant();
    }
    normal
}

/// Block-diagonal embedding `diag(block, 1)`.
pub fn embed_with_one(block: &DMatrix<f64>) -> DMatrix<f64> {
    let n = block.nrows();
    let mut out = DMatrix::<f64>::identity(n + 1, n + 1);
    out.view_mut((0, 0), (n, n)).copy_from(block);
    out
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
