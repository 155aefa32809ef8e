//! Projective maps as scale-normalized invertible matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{all_roots_real, characteristic_polynomial, max_abs};
use crate::sphere::SpherePoint;

/// Matrices with a larger condition number are rejected as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Relative coefficient tolerance for the real-eigenvalue test.
pub const EIGEN_REALITY_TOL: f64 = 1e-10;

/// An invertible `(n+1) x (n+1)` matrix acting on `S^n`.
///
/// [`ProjectiveMap::new`] scales the stored representative by a positive
/// factor so that its largest absolute entry is 1;
/// [`ProjectiveMap::unscaled`] keeps the given matrix. Positive scaling does
/// not change the action on the sphere. [`ProjectiveMap::canonical`] fixes
/// both scale and sign for entrywise comparison in `PGL(n+1, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMap {
    matrix: DMatrix<f64>,
    condition: f64,
}

impl ProjectiveMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let scale = max_abs(&matrix);
        if scale == 0.0 || !scale.is_finite() {
            return Self::unscaled(matrix);
        }
        Self::unscaled(matrix / scale)
    }

    /// Validated map whose stored representative is exactly `matrix`.
    pub fn unscaled(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, got: c });
        }
        if r < 2 {
            return Err(Error::Validation("projective maps need order >= 2".into()));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        if max_abs(&matrix) == 0.0 {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
        let sv = matrix.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(Error::Singular { condition });
        }
        Ok(ProjectiveMap { matrix, condition })
    }

    /// Row-major construction of an order-`dim` matrix.
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(n: usize) -> Self {
        ProjectiveMap { matrix: DMatrix::identity(n + 1, n + 1), condition: 1.0 }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// Dimension `n` of the sphere acted on.
    pub fn n(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// 2-norm condition number of the stored matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Representative with max-abs entry 1 and first nonzero entry (row-major)
    /// positive. Two maps are equal in `PGL` iff their canonical matrices agree.
    pub fn canonical(&self) -> DMatrix<f64> {
        let first = self.matrix.transpose().iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
        let scale = max_abs(&self.matrix);
        &self.matrix / if first < 0.0 { -scale } else { scale }
    }

    pub fn apply(&self, x: &SpherePoint) -> SpherePoint {
        apply_map(self, x)
    }

    /// `self * other`.
    pub fn compose(&self, other: &ProjectiveMap) -> Result<ProjectiveMap> {
        ProjectiveMap::new(&self.matrix * &other.matrix)
    }

    pub fn inverse(&self) -> Result<ProjectiveMap> {
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or(Error::Singular { condition: self.condition })?;
        ProjectiveMap::new(inv)
    }

    /// `self * other * self^{-1}`.
    pub fn conjugate(&self, other: &ProjectiveMap) -> Result<ProjectiveMap> {
        self.compose(other)?.compose(&self.inverse()?)
    }

    /// `A^k` with rescaling after every product.
    pub fn power(&self, k: u32) -> Result<ProjectiveMap> {
        let mut result = DMatrix::<f64>::identity(self.n() + 1, self.n() + 1);
        let mut base = self.matrix.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
                result /= max_abs(&result);
            }
            base = &base * &base;
            base /= max_abs(&base);
            e >>= 1;
        }
        ProjectiveMap::new(result)
    }
}

/// `A x / |A x|` using the stored representative.
pub fn apply_map(a: &ProjectiveMap, x: &SpherePoint) -> SpherePoint {
    let y = a.matrix() * x.coords();
    SpherePoint::new(y).expect("invertible map sends unit vectors to nonzero vectors")
}

/// Whether every eigenvalue of `A^power` is real, counted with multiplicity.
pub fn all_eigenvalues_real(a: &ProjectiveMap, power: u32) -> Result<bool> {
    if power == 0 {
        return Err(Error::Validation("power must be >= 1".into()));
    }
    let p = a.power(power)?;
    let coeffs = characteristic_polynomial(p.matrix());
    Ok(all_roots_real(&coeffs, EIGEN_REALITY_TOL))
}
