//! Hausdorff distance between spherical polytopes in the angular metric.
//!
//! The directed distance from a closed body `A` to a closed body `B` is
//! attained at a vertex of `A` (the angular distance to a spherical convex
//! set has convex sublevel sets below `pi/2`). The distance from a ray to
//! `B` comes from the Euclidean projection onto the cone over `B`, computed
//! by Lawson–Hanson non-negative least squares.

use nalgebra::{DMatrix, DVector};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::sphere::angle_between;

/// Lawson–Hanson NNLS: minimizes `|A x - b|` over `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a.ncols();
    let scale = a.norm().max(1.0) * b.norm().max(1.0);
    let tol = 1e-14 * scale;
    let mut x = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];

    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
        let mut sub = DMatrix::<f64>::zeros(a.nrows(), idx.len());
        for (c, &j) in idx.iter().enumerate() {
            sub.set_column(c, &a.column(j));
        }
        let sol = sub.svd(true, true).solve(b, 1e-13).expect("svd solve with computed factors");
        let mut full = DVector::zeros(m);
        for (c, &j) in idx.iter().enumerate() {
            full[j] = sol[c];
        }
        full
    };

    for _ in 0..(3 * m + 10) {
        let w = a.transpose() * (b - a * &x);
        let Some(enter) = (0..m)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap())
        else {
            break;
        };
        passive[enter] = true;
        loop {
            let s = solve_passive(&passive);
            if (0..m).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            for j in 0..m {
                if passive[j] && s[j] <= 0.0 {
                    let denom = x[j] - s[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            x += (&s - &x) * alpha;
            for j in 0..m {
                if passive[j] && x[j] <= tol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Angular distance from the direction `x` to the closed body.
pub fn point_body_distance(x: &DVector<f64>, body: &ConvexBody) -> f64 {
    if body.contains_closed(x, 1e-13) {
        return 0.0;
    }
    let rays = body.ray_coords();
    let mut a = DMatrix::<f64>::zeros(x.len(), rays.len());
    for (j, r) in rays.iter().enumerate() {
        a.set_column(j, r);
    }
    let xu = x / x.norm();
    let lambda = nnls(&a, &xu);
    let p = &a * lambda;
    if p.norm() <= 1e-14 {
        // x lies in the polar cone; the nearest point is a vertex
        return rays.iter().map(|r| angle_between(&xu, r)).fold(f64::INFINITY, f64::min);
    }
    angle_between(&xu, &p)
}

/// `sup_{x in b1} d(x, b2)`.
pub fn directed_distance(b1: &ConvexBody, b2: &ConvexBody) -> f64 {
    b1.rays().iter().map(|r| point_body_distance(r.coords(), b2)).fold(0.0, f64::max)
}

pub fn hausdorff_distance(b1: &ConvexBody, b2: &ConvexBody) -> Result<f64> {
    if b1.n() != b2.n() {
        return Err(Error::DimensionMismatch { expected: b1.n(), got: b2.n() });
    }
    Ok(directed_distance(b1, b2).max(directed_distance(b2, b1)))
}
