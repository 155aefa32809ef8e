//! Incremental beneath-beyond convex hull for dimensions 1 through 4.
//!
//! Inputs are shifted and uniformly scaled into `[-1, 1]^d` before any
//! predicate is evaluated; all predicates then use the absolute tolerance
//! [`HULL_TOL`]. The hull is built from simplicial facets, which are kept as
//! a boundary triangulation and also merged by supporting hyperplane into
//! the reported facet list.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::hyperplane_normal;

pub const HULL_TOL: f64 = 1e-9;
pub const MAX_HULL_DIM: usize = 4;

/// A facet `normal . x <= offset` with unit outward normal.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
    /// Indices (into the input) of the hull vertices on this facet.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Hull {
    pub dim: usize,
    pub points: Vec<DVector<f64>>,
    /// Sorted indices of input points that are vertices of the hull.
    pub vertices: Vec<usize>,
    pub facets: Vec<Facet>,
    /// Simplicial facets (each `dim` input indices) triangulating the boundary.
    pub boundary: Vec<Vec<usize>>,
}

impl Hull {
    /// Whether `p` satisfies every facet inequality with slack `tol`.
    pub fn contains(&self, p: &DVector<f64>, tol: f64) -> bool {
        self.facets.iter().all(|f| f.normal.dot(p) - f.offset <= tol)
    }

    pub fn vertex_points(&self) -> Vec<DVector<f64>> {
        self.vertices.iter().map(|&i| self.points[i].clone()).collect()
    }
}

struct WorkFacet {
    verts: Vec<usize>,
    normal: DVector<f64>,
    offset: f64,
    alive: bool,
}

pub fn convex_hull(points: &[DVector<f64>]) -> Result<Hull> {
    let Some(first) = points.first() else {
        return Err(Error::DegenerateHull { rank: 0, dim: 0 });
    };
    let d = first.len();
    if d == 0 || d > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(Error::Validation("non-finite hull input".into()));
    }

    // shift to the bounding-box midpoint and scale into [-1, 1]^d
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in points {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let center = (&lo + &hi) * 0.5;
    let half = (&hi - &lo).amax() * 0.5;
    if half == 0.0 {
        return Err(Error::DegenerateHull { rank: 0, dim: d });
    }
    let scaled: Vec<DVector<f64>> = points.iter().map(|p| (p - &center) / half).collect();

    let (facets, boundary) = if d == 1 { hull_1d(&scaled)? } else { hull_nd(&scaled, d)? };

    let mut used: Vec<usize> = boundary.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();

    // merge coplanar simplicial facets
    let mut merged: Vec<(DVector<f64>, f64)> = Vec::new();
    for (normal, offset) in facets {
        let dup = merged
            .iter()
            .any(|(n2, o2)| (n2 - &normal).amax() <= HULL_TOL && (o2 - offset).abs() <= HULL_TOL);
        if !dup {
            merged.push((normal, offset));
        }
    }

    // a point is a vertex iff the normals of its incident facets span R^d
    let incident = |i: usize| -> Vec<usize> {
        (0..merged.len())
            .filter(|&f| (merged[f].0.dot(&scaled[i]) - merged[f].1).abs() <= HULL_TOL)
            .collect()
    };
    let vertices: Vec<usize> = used
        .iter()
        .copied()
        .filter(|&i| {
            let inc = incident(i);
            if inc.len() < d {
                return false;
            }
            let mut m = DMatrix::<f64>::zeros(inc.len(), d);
            for (r, &f) in inc.iter().enumerate() {
                m.set_row(r, &merged[f].0.transpose());
            }
            m.rank(1e-7) == d
        })
        .collect();

    let facets = merged
        .iter()
        .map(|(normal, offset)| {
            let verts = vertices
                .iter()
                .copied()
                .filter(|&i| (normal.dot(&scaled[i]) - offset).abs() <= HULL_TOL)
                .collect();
            Facet { normal: normal.clone(), offset: offset * half + normal.dot(&center), vertices: verts }
        })
        .collect();

    Ok(Hull { dim: d, points: points.to_vec(), vertices, facets, boundary })
}

type HullParts = (Vec<(DVector<f64>, f64)>, Vec<Vec<usize>>);

fn hull_1d(pts: &[DVector<f64>]) -> Result<HullParts> {
    let mut imin = 0;
    let mut imax = 0;
    for (i, p) in pts.iter().enumerate() {
        if p[0] < pts[imin][0] {
            imin = i;
        }
        if p[0] > pts[imax][0] {
            imax = i;
        }
    }
    if pts[imax][0] - pts[imin][0] <= HULL_TOL {
        return Err(Error::DegenerateHull { rank: 0, dim: 1 });
    }
    let facets = vec![
        (DVector::from_element(1, -1.0), -pts[imin][0]),
        (DVector::from_element(1, 1.0), pts[imax][0]),
    ];
    Ok((facets, vec![vec![imin], vec![imax]]))
}

fn initial_simplex(pts: &[DVector<f64>], d: usize) -> Result<Vec<usize>> {
    let mut chosen = vec![0usize];
    for (i, p) in pts.iter().enumerate() {
        if p[0] < pts[chosen[0]][0] {
            chosen[0] = i;
        }
    }
    // orthonormal basis of the affine span so far
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while chosen.len() < d + 1 {
        let origin = &pts[chosen[0]];
        let mut best = (0.0, usize::MAX);
        for (i, p) in pts.iter().enumerate() {
            let mut r = p - origin;
            for b in &basis {
                let c = r.dot(b);
                r -= b * c;
            }
            let dist = r.norm();
            if dist > best.0 {
                best = (dist, i);
            }
        }
        if best.0 <= HULL_TOL {
            return Err(Error::DegenerateHull { rank: chosen.len() - 1, dim: d });
        }
        let mut r = &pts[best.1] - origin;
        for b in &basis {
            let c = r.dot(b);
            r -= b * c;
        }
        basis.push(r.normalize());
        chosen.push(best.1);
    }
    Ok(chosen)
}

fn oriented_facet(pts: &[DVector<f64>], verts: Vec<usize>, interior: &DVector<f64>) -> Option<WorkFacet> {
    let vp: Vec<DVector<f64>> = verts.iter().map(|&i| pts[i].clone()).collect();
    let raw = hyperplane_normal(&vp);
    let norm = raw.norm();
    if norm <= 1e-300 {
        return None;
    }
    let mut normal = raw / norm;
    let mut offset = normal.dot(&vp[0]);
    if normal.dot(interior) - offset > 0.0 {
        normal.neg_mut();
        offset = -offset;
    }
    Some(WorkFacet { verts, normal, offset, alive: true })
}

fn hull_nd(pts: &[DVector<f64>], d: usize) -> Result<HullParts> {
    let simplex = initial_simplex(pts, d)?;
    let interior = simplex.iter().fold(DVector::zeros(d), |acc, &i| acc + &pts[i]) / (d + 1) as f64;

    let mut facets: Vec<WorkFacet> = Vec::new();
    for skip in 0..=d {
        let verts: Vec<usize> = simplex.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &i)| i).collect();
        let f = oriented_facet(pts, verts, &interior).ok_or(Error::DegenerateHull { rank: d - 1, dim: d })?;
        facets.push(f);
    }

    // farthest points first so that interior points are rejected early
    let mut order: Vec<usize> = (0..pts.len()).filter(|i| !simplex.contains(i)).collect();
    order.sort_by(|&a, &b| {
        let da = (&pts[a] - &interior).norm();
        let db = (&pts[b] - &interior).norm();
        db.partial_cmp(&da).unwrap().then(a.cmp(&b))
    });

    for p in order {
        let visible: Vec<usize> = (0..facets.len())
            .filter(|&f| facets[f].alive && facets[f].normal.dot(&pts[p]) - facets[f].offset > HULL_TOL)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut ridge_order: Vec<Vec<usize>> = Vec::new();
        for &f in &visible {
            for skip in 0..d {
                let mut ridge: Vec<usize> =
                    facets[f].verts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &i)| i).collect();
                ridge.sort_unstable();
                let count = ridges.entry(ridge.clone()).or_insert(0);
                if *count == 0 {
                    ridge_order.push(ridge);
                }
                *count += 1;
            }
        }
        for &f in &visible {
            facets[f].alive = false;
        }
        for ridge in ridge_order {
            if ridges[&ridge] != 1 {
                continue;
            }
            let mut verts = ridge;
            verts.push(p);
            if let Some(f) = oriented_facet(pts, verts, &interior) {
                facets.push(f);
            }
        }
    }

    let alive: Vec<&WorkFacet> = facets.iter().filter(|f| f.alive).collect();
    let planes = alive.iter().map(|f| (f.normal.clone(), f.offset)).collect();
    let boundary = alive.iter().map(|f| f.verts.clone()).collect();
    Ok((planes, boundary))
}
