//! Minimum-volume enclosing ellipsoid by Khachiyan's barycentric ascent.
//! Diagnostic only; normalization does not go through it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

pub const MVEE_MAX_ITER: usize = 100_000;

/// `{ x : (x - center)^T shape (x - center) <= 1 }`.
#[derive(Debug, Clone)]
pub struct EllipsoidSpec {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
}

impl EllipsoidSpec {
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>) -> Result<Self> {
        if shape.nrows() != center.len() || shape.ncols() != center.len() {
            return Err(Error::DimensionMismatch { expected: center.len(), got: shape.nrows() });
        }
        let eig = symmetric_eigen(&shape)?;
        if eig.values.iter().any(|&l| l <= 0.0) {
            return Err(Error::Validation("ellipsoid shape must be positive definite".into()));
        }
        Ok(EllipsoidSpec { center, shape })
    }

    /// `(x - c)^T shape (x - c)`.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.center;
        d.dot(&(&self.shape * &d))
    }
}

pub fn mvee(points: &[DVector<f64>], tolerance: f64) -> Result<EllipsoidSpec> {
    if !(tolerance > 0.0) {
        return Err(Error::NonPositive(tolerance));
    }
    let Some(first) = points.first() else {
        return Err(Error::Degenerate("no points".into()));
    };
    let d = first.len();
    let m = points.len();
    let mut q = DMatrix::<f64>::zeros(d + 1, m);
    for (j, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        q.view_mut((0, j), (d, 1)).copy_from(p);
        q[(d, j)] = 1.0;
    }
    if q.rank(1e-10 * q.norm()) < d + 1 {
        return Err(Error::Degenerate("points do not affinely span".into()));
    }

    let mut u = DVector::from_element(m, 1.0 / m as f64);
    for _ in 0..MVEE_MAX_ITER {
        let e = assemble(points, &u)?;
        let worst = points.iter().map(|p| e.gauge(p)).fold(0.0, f64::max);
        if worst <= 1.0 + tolerance {
            return Ok(e);
        }
        let x = &q * DMatrix::from_diagonal(&u) * q.transpose();
        let xinv = x.try_inverse().ok_or_else(|| Error::Degenerate("singular moment matrix".into()))?;
        let (j, mj) = (0..m)
            .map(|j| {
                let c = q.column(j);
                (j, c.dot(&(&xinv * c)))
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let dd = (d + 1) as f64;
        let step = (mj - dd) / (dd * (mj - 1.0));
        u *= 1.0 - step;
        u[j] += step;
    }
    let e = assemble(points, &u)?;
    let worst = points.iter().map(|p| e.gauge(p)).fold(0.0, f64::max);
    Err(Error::NoConvergence { iterations: MVEE_MAX_ITER, residual: worst - 1.0 })
}

fn assemble(points: &[DVector<f64>], u: &DVector<f64>) -> Result<EllipsoidSpec> {
    let d = points[0].len();
    let c = points.iter().zip(u.iter()).fold(DVector::zeros(d), |acc, (p, w)| acc + p * *w);
    let mut s = DMatrix::<f64>::zeros(d, d);
    for (p, w) in points.iter().zip(u.iter()) {
        s += p * p.transpose() * *w;
    }
    s -= &c * c.transpose();
    let shape = s.try_inverse().ok_or_else(|| Error::Degenerate("singular scatter matrix".into()))? / d as f64;
    let shape = (&shape + shape.transpose()) * 0.5;
    Ok(EllipsoidSpec { center: c, shape })
}
