//! Spherical centers: poles `y` at which the projected body has its
//! centroid at the patch origin.
//!
//! The solver runs a damped fixed-point iteration of the center map
//! `m(y) = lift_y(centroid(pi_y body))`, refines with Newton steps on the
//! tangent-space residual and falls back to coordinate descent on the
//! residual norm.

use nalgebra::{DMatrix, DVector};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::moments::body_moments;
use crate::sphere::{angular_distance, AffinePatch, SpherePoint, PATCH_TOL};

#[derive(Debug, Clone)]
pub struct CenterOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial fixed-point step in `(0, 1]`.
    pub damping: f64,
    /// Starting pole; defaults to the body's hemisphere witness.
    pub initial: Option<SpherePoint>,
}

impl Default for CenterOptions {
    fn default() -> Self {
        CenterOptions { tol: 1e-10, max_iter: 10_000, damping: 1.0, initial: None }
    }
}

#[derive(Debug, Clone)]
pub struct CenterResult {
    pub center: SpherePoint,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_dual(body: &ConvexBody, y: &SpherePoint) -> Result<()> {
    if y.ambient_dim() != body.n() + 1 {
        return Err(Error::DimensionMismatch { expected: body.n() + 1, got: y.ambient_dim() });
    }
    let min_dot = body.min_dot(y);
    if !(min_dot > PATCH_TOL) {
        return Err(Error::NotInDual { min_dot });
    }
    Ok(())
}

/// Centroid of the projection at `y`, as a tangent vector at `y` in ambient
/// coordinates.
fn centroid_tangent(body: &ConvexBody, y: &SpherePoint) -> Result<DVector<f64>> {
    check_dual(body, y)?;
    let patch = AffinePatch::new(y.clone());
    let c = body_moments(body, &patch)?.centroid;
    Ok(patch.tangent_from_coordinates(&c).components().clone())
}

/// `m(y)`: the direction of the projected centroid at patch `y`.
pub fn center_map(body: &ConvexBody, y: &SpherePoint) -> Result<SpherePoint> {
    let g = centroid_tangent(body, y)?;
    SpherePoint::new(y.coords() + g)
}

/// Norm of the projected centroid at patch `y`.
pub fn center_residual(body: &ConvexBody, y: &SpherePoint) -> Result<f64> {
    Ok(centroid_tangent(body, y)?.norm())
}

fn slerp(a: &DVector<f64>, b: &DVector<f64>, t: f64) -> DVector<f64> {
    let theta = crate::sphere::angle_between(a, b);
    if theta < 1e-8 {
        return (a * (1.0 - t) + b * t).normalize();
    }
    let s = theta.sin();
    (a * (((1.0 - t) * theta).sin() / s) + b * ((t * theta).sin() / s)).normalize()
}

struct Search<'a> {
    body: &'a ConvexBody,
    best: DVector<f64>,
    residual: f64,
    iterations: usize,
    /// Angular radius of the body seen from the starting pole.
    size: f64,
}

impl Search<'_> {
    fn eval(&self, y: &DVector<f64>) -> Option<f64> {
        let p = SpherePoint::new(y.clone()).ok()?;
        center_residual(self.body, &p).ok()
    }

    fn offer(&mut self, y: DVector<f64>, r: f64) -> bool {
        if r < self.residual {
            self.best = y;
            self.residual = r;
            true
        } else {
            false
        }
    }

    fn fixed_point(&mut self, opts: &CenterOptions, budget: usize) {
        let mut lambda = opts.damping;
        let mut failures = 0;
        while self.iterations < budget && self.residual > opts.tol && failures < budget / 2 {
            self.iterations += 1;
            let y = SpherePoint::new(self.best.clone()).expect("unit iterate");
            let Ok(m) = center_map(self.body, &y) else { break };
            let cand = slerp(&self.best, m.coords(), lambda);
            match self.eval(&cand) {
                Some(r) if r < self.residual => {
                    self.offer(cand, r);
                    lambda = (lambda * 2.0).min(opts.damping);
                }
                _ => {
                    failures += 1;
                    lambda *= 0.5;
                    if lambda < 1e-12 {
                        break;
                    }
                }
            }
            if self.residual < 1e-6 * self.size {
                break;
            }
        }
    }

    /// Newton iteration on `H(v) = B^T g(normalize(y0 + B v))`, with `B` an
    /// orthonormal basis of the tangent space at the current iterate. Runs
    /// past `tol` while each step still halves the residual.
    fn newton(&mut self, opts: &CenterOptions, budget: usize) {
        let n = self.body.n();
        for _ in 0..50 {
            if self.residual == 0.0 || self.iterations >= budget {
                return;
            }
            let before = self.residual;
            self.iterations += 1;
            let y0 = self.best.clone();
            let patch = AffinePatch::new(SpherePoint::new(y0.clone()).expect("unit iterate"));
            let basis: DMatrix<f64> = patch.frame().rows(0, n).transpose();
            let h = |v: &DVector<f64>| -> Option<DVector<f64>> {
                let y = SpherePoint::new(&y0 + &basis * v).ok()?;
                Some(basis.transpose() * centroid_tangent(self.body, &y).ok()?)
            };
            let Some(h0) = h(&DVector::zeros(n)) else { return };
            let step = 1e-6 * self.size;
            let mut jac = DMatrix::<f64>::zeros(n, n);
            for k in 0..n {
                let mut e = DVector::zeros(n);
                e[k] = step;
                let (Some(hp), Some(hm)) = (h(&e), h(&-&e)) else { return };
                jac.set_column(k, &((hp - hm) / (2.0 * step)));
            }
            let Some(delta) = jac.lu().solve(&-&h0) else { return };
            let mut t = 1.0;
            let mut improved = false;
            while t > 1e-6 {
                let cand = (&y0 + &basis * (&delta * t)).normalize();
                if let Some(r) = self.eval(&cand) {
                    if self.offer(cand, r) {
                        improved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !improved || (before <= opts.tol && self.residual > 0.5 * before) {
                return;
            }
        }
    }

    fn coordinate_descent(&mut self, opts: &CenterOptions, budget: usize) {
        let n = self.body.n();
        let mut step = 1e-2 * self.size;
        while self.iterations < budget && self.residual > opts.tol && step > 1e-15 * self.size {
            self.iterations += 1;
            let patch = AffinePatch::new(SpherePoint::new(self.best.clone()).expect("unit iterate"));
            let mut moved = false;
            for k in 0..n {
                let dir = patch.frame().row(k).transpose();
                for sign in [1.0, -1.0] {
                    let cand = (&self.best + &dir * (sign * step)).normalize();
                    if let Some(r) = self.eval(&cand) {
                        if self.offer(cand, r) {
                            moved = true;
                            break;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
    }
}

/// Solves for a spherical center. A solver failure is reported through
/// `converged = false` together with the best iterate.
pub fn spherical_center(body: &ConvexBody, opts: &CenterOptions) -> Result<CenterResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::NonPositive(opts.tol));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Validation(format!("damping must lie in (0, 1], got {}", opts.damping)));
    }
    let start = opts.initial.clone().unwrap_or_else(|| body.witness().clone());
    let residual = center_residual(body, &start)?;
    let size = body.rays().iter().map(|r| angular_distance(r, &start)).fold(0.0, f64::max);
    let mut search = Search { body, best: start.into_coords(), residual, iterations: 0, size };

    let budget = opts.max_iter;
    search.fixed_point(opts, budget);
    search.newton(opts, budget);
    if search.residual > opts.tol {
        search.fixed_point(opts, budget);
        search.newton(opts, budget);
    }
    if search.residual > opts.tol {
        search.coordinate_descent(opts, budget);
        search.newton(opts, budget);
    }

    let center = SpherePoint::new(search.best)?;
    let converged = search.residual <= opts.tol && body.contains(&center) && body.min_dot(&center) > 0.0;
    Ok(CenterResult { center, residual: search.residual, iterations: search.iterations, converged })
}
