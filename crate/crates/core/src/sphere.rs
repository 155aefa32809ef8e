//! Points of the sphere `S^n`, affine patches (open hemispheres) and radial
//! projection onto tangent spaces.

use nalgebra::{DMatrix, DVector};
use crate::error::{Error, Result};

/// Default margin below which a point is treated as lying on the equator of
/// a patch.
pub const PATCH_TOL: f64 = 1e-10;

/// A unit vector in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    /// Normalizes `v`. Fails on zero, non-finite, or length-one input.
    pub fn new(v: DVector<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::Validation(format!(
                "sphere points need at least 2 coordinates, got {}",
                v.len()
            )));
        }
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Degenerate("zero or non-finite vector".into()));
        }
        Ok(SpherePoint(v / norm))
    }

    pub fn from_slice(s: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(s))
    }

    /// The basis vector `e_i` of `R^{dim}`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        SpherePoint(v)
    }

    /// The pole `e_{n+1}` of the native affine patch.
    pub fn north(n: usize) -> Self {
        Self::basis(n + 1, n)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.0
    }

    /// Ambient dimension `n + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint(-&self.0)
    }
}

/// The open hemisphere `U_y = { x : <x, y> > 0 }` around a pole `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePatch {
    pole: SpherePoint,
    frame: DMatrix<f64>,
}

impl AffinePatch {
    pub fn new(pole: SpherePoint) -> Self {
        let frame = rotation_to_pole(&pole);
        AffinePatch { pole, frame }
    }

    /// Patch around `e_{n+1}`, where patch coordinates are `x_i / x_{n+1}`.
    pub fn native(n: usize) -> Self {
        Self::new(SpherePoint::north(n))
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    /// Orthogonal `R` with `R * pole = e_{n+1}`; its first `n` rows give the
    /// orthonormal basis of `pole^perp` used for patch coordinates.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn contains(&self, x: &SpherePoint) -> bool {
        x.dot(&self.pole) > 0.0
    }

    /// Patch coordinates (length `n`) of a point of the hemisphere.
    pub fn coordinates(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let rx = &self.frame * x;
        let n = rx.len() - 1;
        let h = rx[n];
        if h <= PATCH_TOL * x.norm() {
            return Err(Error::PatchViolation { dot: h / x.norm() });
        }
        Ok(rx.rows(0, n) / h)
    }

    /// Homogeneous lift `R^T (p, 1)` of patch coordinates `p`.
    pub fn lift(&self, p: &DVector<f64>) -> DVector<f64> {
        let n = p.len();
        let mut h = DVector::zeros(n + 1);
        h.rows_mut(0, n).copy_from(p);
        h[n] = 1.0;
        self.frame.transpose() * h
    }

    /// Tangent vector with the given patch coordinates.
    pub fn tangent_from_coordinates(&self, p: &DVector<f64>) -> TangentVector {
        let n = p.len();
        let mut h = DVector::zeros(n + 1);
        h.rows_mut(0, n).copy_from(p);
        TangentVector { pole: self.pole.clone(), components: self.frame.transpose() * h }
    }
}

/// A vector in `pole^perp`, the tangent space of the sphere at the pole.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pole: SpherePoint,
    components: DVector<f64>,
}

impl TangentVector {
    /// Fails unless `<components, pole>` vanishes to within `1e-12` (relative).
    pub fn new(pole: SpherePoint, components: DVector<f64>) -> Result<Self> {
        if components.len() != pole.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: pole.ambient_dim(), got: components.len() });
        }
        let d = components.dot(pole.coords());
        if d.abs() > 1e-12 * components.norm().max(1.0) {
            return Err(Error::Validation(format!("tangent vector not orthogonal to pole ({d:e})")));
        }
        Ok(TangentVector { pole, components })
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }
}

/// `pi_y(x) = (x - <x,y> y) / <x,y>`.
pub fn radial_project(x: &SpherePoint, patch: &AffinePatch) -> Result<TangentVector> {
    let y = patch.pole();
    let d = x.dot(y);
    if d <= PATCH_TOL {
        return Err(Error::PatchViolation { dot: d });
    }
    let components = (x.coords() - y.coords() * d) / d;
    Ok(TangentVector { pole: y.clone(), components })
}

/// Inverse of [`radial_project`]: `(y + v) / |y + v|`.
pub fn radial_unproject(v: &TangentVector) -> SpherePoint {
    let w = v.pole.coords() + &v.components;
    let norm = w.norm();
    SpherePoint(w / norm)
}

/// Spherical distance in `[0, pi]`.
///
/// Uses `2 atan2(|x - z|, |x + z|)`, which equals `acos(<x, z>)` but stays
/// accurate for nearly equal or nearly antipodal points.
pub fn angular_distance(x: &SpherePoint, z: &SpherePoint) -> f64 {
    angle_between(x.coords(), z.coords())
}

/// Angle between two nonzero vectors.
pub fn angle_between(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let a = a / a.norm();
    let b = b / b.norm();
    2.0 * (&a - &b).norm().atan2((&a + &b).norm())
}

/// Deterministic orthogonal `R` with `R y = e_{n+1}`.
///
/// For `y != -e_{n+1}` this is the minimal rotation in the plane of `y` and
/// `e_{n+1}`, i.e. the Householder reflection along `y - e_{n+1}` followed by
/// the reflection of the direction of `y` inside the patch. It is the
/// identity at `y = e_{n+1}` and varies continuously near it. At
/// `y = -e_{n+1}` the result is `diag(-1, 1, ..., 1, -1)`.
pub fn rotation_to_pole(y: &SpherePoint) -> DMatrix<f64> {
    let dim = y.ambient_dim();
    let yv = y.coords();
    let c = yv[dim - 1];
    let mut r = DMatrix::<f64>::identity(dim, dim);
    // exactly antipodal: the rotation plane is undetermined
    let tangential: f64 = yv.rows(0, dim - 1).norm();
    if tangential == 0.0 {
        if c < 0.0 {
            r[(0, 0)] = -1.0;
            r[(dim - 1, dim - 1)] = -1.0;
        }
        return r;
    }
    let mut s = yv.clone();
    s[dim - 1] += 1.0;
    let mut e = DVector::<f64>::zeros(dim);
    e[dim - 1] = 1.0;
    // R = I - (y+e)(y+e)^T / (1+c) + 2 e y^T
    let one_plus_c = 0.5 * s.norm_squared();
    r -= (&s * s.transpose()) / one_plus_c;
    r += (&e * yv.transpose()) * 2.0;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn sp(v: &[f64]) -> SpherePoint {
        SpherePoint::from_slice(v).unwrap()
    }

    #[test]
    fn constructor_normalizes() {
        let x = sp(&[3.0, 4.0]);
        assert!((x.coords().norm() - 1.0).abs() <= 1e-12);
        assert!(SpherePoint::from_slice(&[0.0, 0.0]).is_err());
        assert!(SpherePoint::from_slice(&[1.0]).is_err());
    }

    #[test]
    fn project_pole_is_zero() {
        let patch = AffinePatch::native(2);
        let v = radial_project(patch.pole(), &patch).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn project_at_45_degrees() {
        let patch = AffinePatch::native(2);
        let x = sp(&[FRAC_PI_4.sin(), 0.0, FRAC_PI_4.cos()]);
        let v = radial_project(&x, &patch).unwrap();
        assert_relative_eq!(v.components()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(v.components()[1], 0.0);
        assert_relative_eq!(v.components()[2], 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.norm(), FRAC_PI_4.tan(), epsilon = 1e-15);
    }

    #[test]
    fn equator_is_a_patch_violation() {
        let patch = AffinePatch::native(2);
        let e1 = SpherePoint::basis(3, 0);
        assert!(matches!(radial_project(&e1, &patch), Err(Error::PatchViolation { .. })));
    }

    #[test]
    fn unproject_origin_and_unit() {
        let patch = AffinePatch::native(2);
        let zero = TangentVector::new(patch.pole().clone(), DVector::zeros(3)).unwrap();
        assert_eq!(radial_unproject(&zero), *patch.pole());
        let unit = TangentVector::new(patch.pole().clone(), DVector::from_vec(vec![0.6, 0.8, 0.0])).unwrap();
        let x = radial_unproject(&unit);
        assert_relative_eq!(angular_distance(&x, patch.pole()), FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn tangent_vector_must_be_orthogonal() {
        let pole = SpherePoint::north(2);
        assert!(TangentVector::new(pole, DVector::from_vec(vec![0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn angular_distance_cases() {
        let e1 = SpherePoint::basis(3, 0);
        let e2 = SpherePoint::basis(3, 1);
        assert_relative_eq!(angular_distance(&e1, &e2), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(angular_distance(&e1, &e1), 0.0);
        assert_relative_eq!(angular_distance(&e1, &e1.antipode()), PI, epsilon = 1e-15);
    }

    #[test]
    fn rotation_to_pole_special_cases() {
        let north = SpherePoint::north(3);
        assert_eq!(rotation_to_pole(&north), DMatrix::identity(4, 4));
        let south = north.antipode();
        let r = rotation_to_pole(&south);
        let ry = &r * south.coords();
        assert!((ry - north.coords()).norm() <= 1e-12);
        assert!((r.transpose() * &r - DMatrix::identity(4, 4)).norm() <= 1e-12);
    }

    #[test]
    fn patch_coordinates_roundtrip() {
        let patch = AffinePatch::new(sp(&[0.2, -0.3, 0.9]));
        let p = DVector::from_vec(vec![0.7, -1.3]);
        let lifted = patch.lift(&p);
        let back = patch.coordinates(&lifted).unwrap();
        assert!((back - p).norm() <= 1e-14);
    }
}
