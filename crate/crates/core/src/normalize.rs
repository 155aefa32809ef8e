//! Isotropic normalization of convex bodies and the box-estimate entry
//! bounds for projective maps preserving them.
//!
//! The normal form of a body is reached in three stages: an orthogonal
//! `R1` moving a spherical center to `e_{n+1}`, an orthogonal `R2` fixing
//! `e_{n+1}` that diagonalizes the second moment, and a positive diagonal
//! `D = diag(d, 1)` that makes the second moment the identity.

use nalgebra::{DMatrix, DVector};

use crate::body::{transform_body, width_stats, ConvexBody};
use crate::center::{spherical_center, CenterOptions, CenterResult};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, symmetric_eigen};
use crate::map::ProjectiveMap;
use crate::moments::body_moments;
use crate::sphere::{rotation_to_pole, AffinePatch};

/// Relative eigenvalue gap below which eigenvectors are treated as one
/// eigenspace.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub centroid_norm: f64,
    pub moment_identity_error: f64,
    pub center_residual: f64,
}

#[derive(Debug, Clone)]
pub struct NormalizationResult {
    /// Orthogonal `R2 R1`.
    pub alpha: ProjectiveMap,
    /// `diag(d_1, ..., d_n, 1)`.
    pub scale: ProjectiveMap,
    pub normalized_body: ConvexBody,
    pub k_achieved: f64,
    pub residuals: Residuals,
    pub center: CenterResult,
}

impl NormalizationResult {
    /// `beta = scale * alpha` as a raw matrix product.
    pub fn beta(&self) -> Result<ProjectiveMap> {
        ProjectiveMap::unscaled(self.scale.matrix() * self.alpha.matrix())
    }
}

/// Diagonal entries `d` with `det(diag(d)) d_i^2 m_i = 1`, so that scaling
/// patch coordinates by `d` turns a second moment `diag(m)` into `I`.
pub fn isotropic_scale(m: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = m.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositive(bad));
    }
    let n = m.len() as f64;
    let log_p = -m.iter().map(|x| x.ln()).sum::<f64>() / (n + 2.0);
    Ok(m.iter().map(|x| (-0.5 * (log_p + x.ln())).exp()).collect())
}

/// Orders eigenvectors by descending eigenvalue. Inside each cluster of
/// nearly equal eigenvalues the basis is replaced by the orthonormalized
/// projections of the coordinate axes, taken in index order. Every vector
/// gets its first nonzero component positive.
fn canonical_eigenbasis(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(m)?;
    let n = m.nrows();
    let top = eig.values.amax().max(f64::MIN_POSITIVE);
    let mut basis = eig.vectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end - 1] - eig.values[end] <= EIGEN_CLUSTER_TOL * top {
            end += 1;
        }
        if end - start > 1 {
            let block = eig.vectors.columns(start, end - start).clone_owned();
            let proj = &block * block.transpose();
            let mut chosen: Vec<DVector<f64>> = Vec::new();
            while chosen.len() < end - start {
                let residuals: Vec<DVector<f64>> = (0..n)
                    .map(|i| {
                        let mut r = proj.column(i).clone_owned();
                        for c in &chosen {
                            r -= c * c.dot(&r);
                        }
                        r
                    })
                    .collect();
                let best = residuals.iter().map(|r| r.norm()).fold(0.0, f64::max);
                let pick = residuals.iter().position(|r| r.norm() >= 0.5 * best).expect("nonempty");
                chosen.push(residuals[pick].normalize());
            }
            for (k, c) in chosen.iter().enumerate() {
                basis.set_column(start + k, c);
            }
        }
        start = end;
    }
    for k in 0..n {
        let mut col = basis.column(k).clone_owned();
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                col = -col;
            }
        }
        basis.set_column(k, &col);
    }
    Ok(basis)
}

/// Moves `body` into isotropic position at the native patch.
pub fn normalize_body(body: &ConvexBody, opts: &CenterOptions) -> Result<NormalizationResult> {
    let n = body.n();
    let center = spherical_center(body, opts)?;
    if !center.converged {
        return Err(Error::NoConvergence { iterations: center.iterations, residual: center.residual });
    }
    let native = AffinePatch::native(n);
    let r1 = rotation_to_pole(&center.center);
    let centred = transform_body(&ProjectiveMap::unscaled(r1.clone())?, body)?;
    let m = body_moments(&centred, &native)?.second_moment;
    let v = canonical_eigenbasis(&m)?;
    let mut r2 = DMatrix::<f64>::identity(n + 1, n + 1);
    r2.view_mut((0, 0), (n, n)).copy_from(&v.transpose());
    let diag_m: Vec<f64> = (0..n).map(|k| v.column(k).dot(&(&m * v.column(k)))).collect();
    let d = isotropic_scale(&diag_m)?;

    let alpha = ProjectiveMap::unscaled(&r2 * &r1)?;
    let mut entries = d.clone();
    entries.push(1.0);
    let scale = ProjectiveMap::unscaled(DMatrix::from_diagonal(&DVector::from_vec(entries)))?;
    let beta = ProjectiveMap::unscaled(scale.matrix() * alpha.matrix())?;
    let normalized_body = transform_body(&beta, body)?;

    let moments = body_moments(&normalized_body, &native)?;
    let widths = width_stats(&normalized_body, &native)?;
    let k_achieved = if widths.inner > 0.0 { widths.outer.max(1.0 / widths.inner) } else { f64::INFINITY };
    let residuals = Residuals {
        centroid_norm: moments.centroid.norm(),
        moment_identity_error: (&moments.second_moment - DMatrix::identity(n, n)).norm(),
        center_residual: center.residual,
    };
    Ok(NormalizationResult { alpha, scale, normalized_body, k_achieved, residuals, center })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxCheck {
    pub premise_holds: bool,
    pub minimal_k: f64,
    pub bound_holds: bool,
    pub max_ratio: f64,
}

fn entry_ratio(a: &DMatrix<f64>) -> (f64, f64, f64) {
    let n = a.nrows() - 1;
    let scale = max_abs(a);
    let corner = a[(n, n)].abs();
    let ratio = if corner > 0.0 { scale / corner } else { f64::INFINITY };
    (scale, corner, ratio)
}

/// `(max |A_ij| <= 2K |A_{n+1,n+1}|, max |A_ij| / |A_{n+1,n+1}|)` with
/// relative slack `1e-12`.
pub fn box_entry_bound(a: &ProjectiveMap, k: f64) -> (bool, f64) {
    let (scale, corner, ratio) = entry_ratio(a.matrix());
    (scale <= 2.0 * k * corner + 1e-12 * scale, ratio)
}

/// Tests whether `[A]` maps the box `[-1, 1]^n` into `K [-1, 1]^n` using the
/// `2^n` vertex images, and checks `max |A_ij| <= 2K |A_{n+1,n+1}|`.
pub fn box_estimate_check(a: &ProjectiveMap, k: f64) -> Result<BoxCheck> {
    if !(k >= 1.0) {
        return Err(Error::Validation(format!("box constant must be >= 1, got {k}")));
    }
    let m = a.matrix();
    let n = a.n();
    let mut sign = 0.0;
    let mut minimal_k: f64 = 0.0;
    for mask in 0..(1usize << n) {
        let mut v = DVector::from_element(n + 1, 1.0);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                v[i] = -1.0;
            }
        }
        let w = m * v;
        let h = w[n];
        if h == 0.0 || (sign != 0.0 && h.signum() != sign) {
            return Err(Error::EquatorCrossing);
        }
        sign = h.signum();
        minimal_k = minimal_k.max(w.rows(0, n).amax() / h.abs());
    }
    let (bound_holds, max_ratio) = box_entry_bound(a, k);
    Ok(BoxCheck { premise_holds: minimal_k <= k, minimal_k, bound_holds, max_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryBound {
    pub bound_holds: bool,
    pub ratio: f64,
    /// Box check of `diag(K, ..., K, 1) A diag(K, ..., K, 1)^{-1}` at `K^2`,
    /// `None` if its vertex images cross the equator.
    pub conjugated: Option<BoxCheck>,
}

/// Checks `max |A_ij| <= 2 K^4 |A_{n+1,n+1}|` for a map preserving a body
/// with `K^{-1} B ⊂ body ⊂ K B`.
pub fn normalized_entry_bound(a: &ProjectiveMap, k: f64) -> EntryBound {
    let m = a.matrix();
    let n = a.n();
    let (scale, corner, ratio) = entry_ratio(m);
    let mut e = vec![k; n];
    e.push(1.0);
    let e = DVector::from_vec(e);
    let conj = DMatrix::from_fn(n + 1, n + 1, |i, j| e[i] * m[(i, j)] / e[j]);
    let conjugated = ProjectiveMap::unscaled(conj).ok().and_then(|c| box_estimate_check(&c, k * k).ok());
    EntryBound { bound_holds: scale <= 2.0 * k.powi(4) * corner + 1e-12 * scale, ratio, conjugated }
}
