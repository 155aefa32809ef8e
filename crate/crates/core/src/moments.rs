//! Volume, centroid, second moment and inertia tensor of convex polytopes.
//!
//! Exact values come from a fan triangulation and the closed-form simplex
//! integrals
//!
//! ```text
//! vol      = |det(v1 - v0, ..., vn - v0)| / n!
//! int x    = vol * mean(v)
//! int xx^T = vol / ((n+1)(n+2)) * (sum v v^T + (sum v)(sum v)^T)
//! ```
//!
//! The inertia tensor is `Q = tr(M) I - M`, which as a quadratic form is
//! `y -> int (|x|^2 |y|^2 - <x,y>^2)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::body::{patch_facets, project_body, ConvexBody};
use crate::error::{Error, Result};
use crate::hull::{convex_hull, Hull};
use crate::sphere::AffinePatch;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentData {
    pub volume: f64,
    pub centroid: DVector<f64>,
    /// `int x x^T`, about the centroid for bodies and about the origin for
    /// [`simplex_moments`].
    pub second_moment: DMatrix<f64>,
    pub inertia: DMatrix<f64>,
}

impl MomentData {
    /// Second moment about the patch origin, `M + vol c c^T`.
    pub fn second_moment_about_origin(&self) -> DMatrix<f64> {
        &self.second_moment + &self.centroid * self.centroid.transpose() * self.volume
    }
}

/// Unnormalized integrals about a fixed origin.
#[derive(Debug, Clone)]
pub struct RawMoments {
    pub volume: f64,
    pub first: DVector<f64>,
    pub second: DMatrix<f64>,
}

impl RawMoments {
    pub fn zero(n: usize) -> Self {
        RawMoments { volume: 0.0, first: DVector::zeros(n), second: DMatrix::zeros(n, n) }
    }

    fn add(&mut self, other: &RawMoments) {
        self.volume += other.volume;
        self.first += &other.first;
        self.second += &other.second;
    }

    /// Moment data with the second moment re-centred at the centroid. The
    /// integrals are taken about `origin`.
    fn finish(&self, origin: &DVector<f64>) -> Result<MomentData> {
        if !(self.volume > 0.0) {
            return Err(Error::Degenerate("zero volume".into()));
        }
        let local = &self.first / self.volume;
        let second = &self.second - &local * local.transpose() * self.volume;
        let second = (&second + second.transpose()) * 0.5;
        let inertia = inertia_form(&second)?;
        Ok(MomentData { volume: self.volume, centroid: origin + local, second_moment: second, inertia })
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn simplex_raw(verts: &[&DVector<f64>]) -> (RawMoments, f64) {
    let n = verts[0].len();
    let mut edges = DMatrix::<f64>::zeros(n, n);
    for (c, v) in verts[1..].iter().enumerate() {
        edges.set_column(c, &(*v - verts[0]));
    }
    let det = edges.determinant();
    let vol = det.abs() / factorial(n);
    let sum = verts.iter().fold(DVector::zeros(n), |acc, v| acc + *v);
    let mut outer = &sum * sum.transpose();
    for v in verts {
        outer += *v * v.transpose();
    }
    let raw = RawMoments {
        volume: vol,
        first: &sum * (vol / (n + 1) as f64),
        second: outer * (vol / ((n + 1) * (n + 2)) as f64),
    };
    (raw, det)
}

/// Moments of one simplex with `second_moment` taken about the origin.
pub fn simplex_moments(verts: &[DVector<f64>]) -> Result<MomentData> {
    let n = verts.first().map(|v| v.len()).unwrap_or(0);
    if n == 0 || verts.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: verts.len() });
    }
    let refs: Vec<&DVector<f64>> = verts.iter().collect();
    let (raw, det) = simplex_raw(&refs);
    let scale = verts.iter().flat_map(|v| verts.iter().map(move |w| (v - w).amax())).fold(0.0, f64::max);
    if det.abs() <= 1e-12 * scale.powi(n as i32) || scale == 0.0 {
        return Err(Error::DegenerateSimplex { det });
    }
    let second = raw.second.clone();
    Ok(MomentData {
        volume: raw.volume,
        centroid: &raw.first / raw.volume,
        inertia: inertia_form(&second)?,
        second_moment: second,
    })
}

/// `tr(M) I - M`.
pub fn inertia_form(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    let asym = (m - m.transpose()).norm();
    if asym > 1e-10 * m.norm() {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(DMatrix::identity(n, n) * m.trace() - m)
}

/// Splits a full-dimensional hull into simplices: the hull itself when it is
/// a simplex, otherwise a fan from the vertex average over the boundary
/// triangulation.
pub fn triangulate(hull: &Hull) -> Result<Vec<Vec<DVector<f64>>>> {
    let d = hull.dim;
    if hull.vertices.len() < d + 1 {
        return Err(Error::DegenerateHull { rank: hull.vertices.len().saturating_sub(1), dim: d });
    }
    if hull.vertices.len() == d + 1 {
        return Ok(vec![hull.vertex_points()]);
    }
    let apex = hull.vertices.iter().fold(DVector::zeros(d), |acc, &i| acc + &hull.points[i]) / hull.vertices.len() as f64;
    Ok(hull
        .boundary
        .iter()
        .map(|cell| {
            let mut s = vec![apex.clone()];
            s.extend(cell.iter().map(|&i| hull.points[i].clone()));
            s
        })
        .collect())
}

/// Moments of the convex hull of `points` (second moment about the centroid).
pub fn polytope_moments(points: &[DVector<f64>]) -> Result<MomentData> {
    let hull = convex_hull(points)?;
    let cells = triangulate(&hull)?;
    let d = hull.dim;
    let origin = cells[0][0].clone();
    let mut acc = RawMoments::zero(d);
    for cell in &cells {
        let shifted: Vec<DVector<f64>> = cell.iter().map(|v| v - &origin).collect();
        let refs: Vec<&DVector<f64>> = shifted.iter().collect();
        acc.add(&simplex_raw(&refs).0);
    }
    acc.finish(&origin)
}

/// Exact moments of the projection of `body` at `patch`, in the patch frame.
pub fn body_moments(body: &ConvexBody, patch: &AffinePatch) -> Result<MomentData> {
    let verts = project_body(body, patch)?;
    let apex = patch.coordinates(body.apex().coords())?;
    let n = body.n();
    let shifted: Vec<DVector<f64>> = verts.iter().map(|v| v - &apex).collect();
    let zero = DVector::zeros(n);
    let mut acc = RawMoments::zero(n);
    for cell in body.cells() {
        let mut refs: Vec<&DVector<f64>> = Vec::with_capacity(n + 1);
        refs.push(&zero);
        refs.extend(cell.iter().map(|&i| &shifted[i]));
        acc.add(&simplex_raw(&refs).0);
    }
    acc.finish(&apex)
}

/// Seeded Monte-Carlo estimate of the moments with standard errors.
#[derive(Debug, Clone)]
pub struct McMoments {
    /// Estimated moments; `second_moment` is about the estimated centroid.
    pub moments: MomentData,
    pub samples: usize,
    pub accepted: usize,
    pub volume_se: f64,
    pub centroid_se: DVector<f64>,
    /// Estimate of `int x x^T` about the patch origin and its standard error.
    pub second_about_origin: DMatrix<f64>,
    pub second_about_origin_se: DMatrix<f64>,
}

const MC_BATCH: usize = 1 << 15;

struct BatchSums {
    hits: usize,
    sx: DVector<f64>,
    sxx: DVector<f64>,
    sxy: DMatrix<f64>,
    sxy2: DMatrix<f64>,
}

/// Rejection sampling in the bounding box of the projection. Batch `b`
/// draws from the ChaCha8 stream `b` of `seed`, so results do not depend on
/// scheduling.
pub fn mc_moments(body: &ConvexBody, patch: &AffinePatch, samples: usize, seed: u64) -> Result<McMoments> {
    if samples < 1000 {
        return Err(Error::Validation(format!("need at least 1000 samples, got {samples}")));
    }
    let verts = project_body(body, patch)?;
    let n = body.n();
    let mut lo = verts[0].clone();
    let mut hi = verts[0].clone();
    for v in &verts {
        for k in 0..n {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let width = &hi - &lo;
    let box_volume: f64 = width.iter().product();
    let facets = patch_facets(body, patch);

    let batches = samples.div_ceil(MC_BATCH);
    let sums: Vec<BatchSums> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut s = BatchSums {
                hits: 0,
                sx: DVector::zeros(n),
                sxx: DVector::zeros(n),
                sxy: DMatrix::zeros(n, n),
                sxy2: DMatrix::zeros(n, n),
            };
            let mut x = DVector::<f64>::zeros(n);
            for _ in 0..count {
                for k in 0..n {
                    x[k] = lo[k] + width[k] * rng.random::<f64>();
                }
                if facets.iter().all(|(a, off)| a.dot(&x) <= *off) {
                    s.hits += 1;
                    for i in 0..n {
                        s.sx[i] += x[i];
                        s.sxx[i] += x[i] * x[i];
                        for j in 0..n {
                            let p = x[i] * x[j];
                            s.sxy[(i, j)] += p;
                            s.sxy2[(i, j)] += p * p;
                        }
                    }
                }
            }
            s
        })
        .collect();

    let mut hits = 0usize;
    let mut sx = DVector::<f64>::zeros(n);
    let mut sxx = DVector::<f64>::zeros(n);
    let mut sxy = DMatrix::<f64>::zeros(n, n);
    let mut sxy2 = DMatrix::<f64>::zeros(n, n);
    for s in &sums {
        hits += s.hits;
        sx += &s.sx;
        sxx += &s.sxx;
        sxy += &s.sxy;
        sxy2 += &s.sxy2;
    }
    if hits < 2 {
        return Err(Error::Degenerate("too few Monte-Carlo hits".into()));
    }
    let nf = samples as f64;
    let hf = hits as f64;
    let p = hf / nf;
    let volume = box_volume * p;
    let volume_se = box_volume * (p * (1.0 - p) / nf).sqrt();
    let centroid = &sx / hf;
    let centroid_se = DVector::from_iterator(
        n,
        (0..n).map(|i| ((sxx[i] / hf - centroid[i] * centroid[i]).max(0.0) / hf).sqrt()),
    );
    let second_about_origin = &sxy * (box_volume / nf);
    let second_about_origin_se = DMatrix::from_fn(n, n, |i, j| {
        let mean = sxy[(i, j)] / nf;
        let var = (sxy2[(i, j)] / nf - mean * mean).max(0.0);
        box_volume * (var / nf).sqrt()
    });
    let second = &second_about_origin - &centroid * centroid.transpose() * volume;
    let second = (&second + second.transpose()) * 0.5;
    let inertia = inertia_form(&second)?;
    Ok(McMoments {
        moments: MomentData { volume, centroid, second_moment: second, inertia },
        samples,
        accepted: hits,
        volume_se,
        centroid_se,
        second_about_origin,
        second_about_origin_se,
    })
}
