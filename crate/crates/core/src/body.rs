//! Properly convex spherical polytopes given by vertex rays.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hull::{convex_hull, MAX_HULL_DIM};
use crate::lp::hemisphere_margin;
use crate::map::ProjectiveMap;
use crate::sphere::{angle_between, AffinePatch, SpherePoint};

/// Minimal hemisphere margin for a ray set to count as properly convex.
pub const HEMISPHERE_MARGIN: f64 = 1e-9;
/// Strictness tolerance for open-body membership.
pub const CONTAIN_TOL: f64 = 1e-9;
/// Angular tolerance used when matching vertex sets.
pub const MATCH_TOL: f64 = 1e-8;

/// The open convex hull on `S^n` of finitely many vertex rays lying in a
/// common open hemisphere.
///
/// Facet functionals `f` are unit vectors with `<f, x> <= 0` on the closed
/// body and equality on the facet. `cells` triangulates the boundary by
/// `n`-tuples of ray indices; coning them from `apex` triangulates the body
/// in every affine patch that contains it.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    n: usize,
    rays: Vec<SpherePoint>,
    witness: SpherePoint,
    margin: f64,
    facets: Vec<DVector<f64>>,
    facet_rays: Vec<Vec<usize>>,
    cells: Vec<Vec<usize>>,
    apex: SpherePoint,
    dropped: Vec<usize>,
}

/// The box `K * [-1, 1]^n` of the native patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    k: f64,
}

impl BoxSpec {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(BoxSpec { k })
        } else {
            Err(Error::NonPositive(k))
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Box-based containment constants of a projected body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthStats {
    /// Largest `r` with `r * B` inside the projection (0 if the patch origin
    /// is not interior).
    pub inner: f64,
    /// Smallest `R` with the projection inside `R * B`.
    pub outer: f64,
}

pub fn make_body(n: usize, rays: &[DVector<f64>]) -> Result<ConvexBody> {
    if n == 0 || n > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    if let Some(r) = rays.iter().find(|r| r.len() != n + 1) {
        return Err(Error::DimensionMismatch { expected: n + 1, got: r.len() });
    }
    if rays.len() < n + 1 {
        return Err(Error::TooFewRays { needed: n + 1, got: rays.len() });
    }
    let points: Vec<SpherePoint> = rays.iter().map(|r| SpherePoint::new(r.clone())).collect::<Result<_>>()?;
    let coords: Vec<DVector<f64>> = points.iter().map(|p| p.coords().clone()).collect();

    let (u, margin) = hemisphere_margin(&coords)?;
    if !(margin > HEMISPHERE_MARGIN) {
        return Err(Error::NoHemisphere { margin });
    }
    let mut stacked = DMatrix::<f64>::zeros(n + 1, coords.len());
    for (j, c) in coords.iter().enumerate() {
        stacked.set_column(j, c);
    }
    if stacked.rank(1e-9) < n + 1 {
        return Err(Error::Degenerate("rays do not span R^{n+1}".into()));
    }

    let witness = SpherePoint::new(u)?;
    let patch = AffinePatch::new(witness.clone());
    let projected: Vec<DVector<f64>> = coords.iter().map(|c| patch.coordinates(c)).collect::<Result<_>>()?;
    let first = convex_hull(&projected).map_err(hull_to_degenerate)?;
    let keep = first.vertices.clone();
    let dropped: Vec<usize> = (0..points.len()).filter(|i| !keep.contains(i)).collect();

    let rays: Vec<SpherePoint> = keep.iter().map(|&i| points[i].clone()).collect();
    let kept_proj: Vec<DVector<f64>> = keep.iter().map(|&i| projected[i].clone()).collect();
    let hull = convex_hull(&kept_proj).map_err(hull_to_degenerate)?;

    let frame_t = patch.frame().transpose();
    let mut facets = Vec::with_capacity(hull.facets.len());
    let mut facet_rays = Vec::with_capacity(hull.facets.len());
    for f in &hull.facets {
        let mut h = DVector::zeros(n + 1);
        h.rows_mut(0, n).copy_from(&f.normal);
        h[n] = -f.offset;
        let g = &frame_t * h;
        facets.push(g.normalize());
        facet_rays.push(f.vertices.clone());
    }
    let sum = rays.iter().fold(DVector::zeros(n + 1), |acc, r| acc + r.coords());
    let apex = SpherePoint::new(sum)?;

    Ok(ConvexBody {
        n,
        rays,
        witness,
        margin,
        facets,
        facet_rays,
        cells: hull.boundary,
        apex,
        dropped,
    })
}

fn hull_to_degenerate(e: Error) -> Error {
    match e {
        Error::DegenerateHull { rank, dim } => {
            Error::Degenerate(format!("projected rays have affine dimension {rank} < {dim}"))
        }
        other => other,
    }
}

/// The box `K * [-1,1]^n` in the native patch, with vertex rays
/// `(+-K, ..., +-K, 1)` in binary order.
pub fn make_box(n: usize, k: f64) -> Result<ConvexBody> {
    let spec = BoxSpec::new(k)?;
    let rays: Vec<DVector<f64>> = (0..1usize << n)
        .map(|s| {
            let mut v = DVector::from_element(n + 1, 1.0);
            for i in 0..n {
                v[i] = if s >> i & 1 == 0 { spec.k() } else { -spec.k() };
            }
            v
        })
        .collect();
    make_body(n, &rays)
}

impl ConvexBody {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rays(&self) -> &[SpherePoint] {
        &self.rays
    }

    /// Unit hemisphere witness: `<ray, witness> >= margin / |u|` for all rays.
    pub fn witness(&self) -> &SpherePoint {
        &self.witness
    }

    /// Optimal margin of the hemisphere LP (with `|u|_inf <= 1`).
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn facets(&self) -> &[DVector<f64>] {
        &self.facets
    }

    pub fn facet_rays(&self) -> &[Vec<usize>] {
        &self.facet_rays
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn apex(&self) -> &SpherePoint {
        &self.apex
    }

    /// Indices of input rays dropped as non-vertices.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn ray_coords(&self) -> Vec<DVector<f64>> {
        self.rays.iter().map(|r| r.coords().clone()).collect()
    }

    /// Open-body membership: `<f, x> < -tol` for every facet.
    pub fn contains(&self, x: &SpherePoint) -> bool {
        self.facets.iter().all(|f| f.dot(x.coords()) < -CONTAIN_TOL)
    }

    /// Closed-body membership with slack `tol`.
    pub fn contains_closed(&self, x: &DVector<f64>, tol: f64) -> bool {
        let x = x / x.norm();
        self.facets.iter().all(|f| f.dot(&x) <= tol)
    }

    /// Minimum of `<ray, y>` over the vertex rays; positive iff `y` lies in
    /// the dual body.
    pub fn min_dot(&self, y: &SpherePoint) -> f64 {
        self.rays.iter().map(|r| r.dot(y)).fold(f64::INFINITY, f64::min)
    }
}

/// Patch coordinates of the vertex rays.
pub fn project_body(body: &ConvexBody, patch: &AffinePatch) -> Result<Vec<DVector<f64>>> {
    body.rays.iter().map(|r| patch.coordinates(r.coords())).collect()
}

/// The dual body, whose rays are the inward facet normals.
pub fn dual_body(body: &ConvexBody) -> Result<ConvexBody> {
    let rays: Vec<DVector<f64>> = body.facets.iter().map(|f| -f).collect();
    make_body(body.n, &rays)
}

/// Image of the body under the sphere action of `a`.
pub fn transform_body(a: &ProjectiveMap, body: &ConvexBody) -> Result<ConvexBody> {
    if a.n() != body.n {
        return Err(Error::DimensionMismatch { expected: body.n, got: a.n() });
    }
    let images: Vec<DVector<f64>> = body.rays.iter().map(|r| a.matrix() * r.coords()).collect();
    make_body(body.n, &images)
}

/// Largest angular mismatch of an optimal-greedy matching between two ray
/// sets, or `None` if sizes differ or some ray has no partner within `tol`.
fn match_rays(a: &[DVector<f64>], b: &[SpherePoint], tol: f64) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, r)| (j, angle_between(x, r.coords())))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())?;
        if best.1 > tol {
            return None;
        }
        used[best.0] = true;
        worst = worst.max(best.1);
    }
    Some(worst)
}

/// Largest vertex mismatch between two bodies, `None` if no matching exists
/// within `tol`.
pub fn vertex_set_distance(b1: &ConvexBody, b2: &ConvexBody, tol: f64) -> Option<f64> {
    match_rays(&b1.ray_coords(), &b2.rays, tol)
}

/// Whether `a` maps the body onto itself in projective space (vertex rays
/// permuted, up to a global sign), with angular tolerance [`MATCH_TOL`].
pub fn preserves(a: &ProjectiveMap, body: &ConvexBody) -> bool {
    preserve_mismatch(a, body).is_some_and(|m| m <= MATCH_TOL)
}

/// Largest vertex mismatch of `a(body)` against `body` up to a global sign,
/// or `None` if the vertex sets cannot be matched within `1e-3`.
pub fn preserve_mismatch(a: &ProjectiveMap, body: &ConvexBody) -> Option<f64> {
    if a.n() != body.n {
        return None;
    }
    let images: Vec<DVector<f64>> = body.rays.iter().map(|r| (a.matrix() * r.coords()).normalize()).collect();
    let negated: Vec<DVector<f64>> = images.iter().map(|x| -x).collect();
    let loose = 1e-3;
    match (match_rays(&images, &body.rays, loose), match_rays(&negated, &body.rays, loose)) {
        (Some(p), Some(q)) => Some(p.min(q)),
        (Some(p), None) => Some(p),
        (None, Some(q)) => Some(q),
        (None, None) => None,
    }
}

/// Facets of the projection at `patch` as `(a, b)` with `a . p <= b`.
pub fn patch_facets(body: &ConvexBody, patch: &AffinePatch) -> Vec<(DVector<f64>, f64)> {
    let n = body.n;
    body.facets
        .iter()
        .map(|f| {
            let g = patch.frame() * f;
            (g.rows(0, n).clone_owned(), -g[n])
        })
        .collect()
}

/// Box containment constants of the projection at `patch`.
pub fn width_stats(body: &ConvexBody, patch: &AffinePatch) -> Result<WidthStats> {
    let verts = project_body(body, patch)?;
    let outer = verts.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let inner = patch_facets(body, patch)
        .iter()
        .map(|(a, b)| b / a.lp_norm(1))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    Ok(WidthStats { inner, outer })
}

/// Euclidean-ball analogue of [`width_stats`]: inradius about the patch
/// origin and largest vertex norm. Both are invariant under rotations of
/// the patch frame.
pub fn ball_width_stats(body: &ConvexBody, patch: &AffinePatch) -> Result<WidthStats> {
    let verts = project_body(body, patch)?;
    let outer = verts.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let inner = patch_facets(body, patch)
        .iter()
        .map(|(a, b)| b / a.norm())
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    Ok(WidthStats { inner, outer })
}
