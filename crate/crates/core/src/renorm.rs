//! Renormalization of sequences of invariant pairs `(body, generators)`.
//!
//! Each item is moved into isotropic position by `beta = D alpha` and its
//! generators are conjugated by `beta`. The report records the containment
//! constant, the entry bounds of the conjugated generators, raw widths of
//! the unnormalized body and the Hausdorff distance of every normalized
//! body to the first one.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::body::{ball_width_stats, make_body, preserve_mismatch, preserves, transform_body, ConvexBody, WidthStats};
use crate::center::CenterOptions;
use crate::error::{Error, Result};
use crate::hausdorff::hausdorff_distance;
use crate::map::ProjectiveMap;
use crate::normalize::{box_entry_bound, box_estimate_check, normalize_body, normalized_entry_bound, EntryBound, NormalizationResult};
use crate::sphere::{rotation_to_pole, AffinePatch, SpherePoint};

/// Largest preservation mismatch tolerated for conjugated generators.
pub const REVERIFY_TOL: f64 = 1e-6;

/// Factor over the first item's entry ratio still reported as bounded.
pub const BOUNDED_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct LabeledMap {
    pub label: String,
    pub map: ProjectiveMap,
}

/// A body together with labelled generators that preserve it.
#[derive(Debug, Clone)]
pub struct MarkedPair {
    body: ConvexBody,
    generators: Vec<LabeledMap>,
}

impl MarkedPair {
    pub fn new(body: ConvexBody, generators: Vec<LabeledMap>) -> Result<Self> {
        for g in &generators {
            if g.map.n() != body.n() {
                return Err(Error::DimensionMismatch { expected: body.n(), got: g.map.n() });
            }
            if !preserves(&g.map, &body) {
                let mismatch = preserve_mismatch(&g.map, &body).unwrap_or(f64::INFINITY);
                return Err(Error::NotInvariant { label: g.label.clone(), mismatch });
            }
        }
        Ok(MarkedPair { body, generators })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn generators(&self) -> &[LabeledMap] {
        &self.generators
    }

    pub fn labels(&self) -> Vec<&str> {
        self.generators.iter().map(|g| g.label.as_str()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct PairDiagnostics {
    pub k_achieved: f64,
    pub max_ratios: Vec<f64>,
    pub entry_bounds: Vec<EntryBound>,
    /// Bottom-right entry of each canonical conjugated generator.
    pub bottom_right: Vec<f64>,
    /// `(D A D^{-1})_{n+1,n+1} == A_{n+1,n+1}` bitwise for every generator.
    pub bottom_right_exact: bool,
    pub mismatches: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RenormalizedPair {
    pub beta: ProjectiveMap,
    pub normalization: NormalizationResult,
    pub conjugated: Vec<LabeledMap>,
    pub diagnostics: PairDiagnostics,
}

pub fn renormalize_pair(pair: &MarkedPair, opts: &CenterOptions) -> Result<RenormalizedPair> {
    let norm = normalize_body(&pair.body, opts)?;
    let n = pair.body.n();
    let alpha = norm.alpha.matrix();
    let d = norm.scale.matrix();
    let d_inv = DMatrix::from_diagonal(&d.diagonal().map(|x| 1.0 / x));
    let mut conjugated = Vec::with_capacity(pair.generators.len());
    let mut diag = PairDiagnostics {
        k_achieved: norm.k_achieved,
        max_ratios: Vec::new(),
        entry_bounds: Vec::new(),
        bottom_right: Vec::new(),
        bottom_right_exact: true,
        mismatches: Vec::new(),
    };
    for g in &pair.generators {
        let rotated = alpha * g.map.matrix() * alpha.transpose();
        let raw = d * &rotated * &d_inv;
        diag.bottom_right_exact &= raw[(n, n)].to_bits() == rotated[(n, n)].to_bits();
        let b = ProjectiveMap::new(raw)?;
        let mismatch = preserve_mismatch(&b, &norm.normalized_body).unwrap_or(f64::INFINITY);
        if !(mismatch <= REVERIFY_TOL) {
            return Err(Error::NotInvariant { label: g.label.clone(), mismatch });
        }
        let bound = normalized_entry_bound(&b, norm.k_achieved);
        let canonical = b.canonical();
        diag.max_ratios.push(bound.ratio);
        diag.entry_bounds.push(bound);
        diag.bottom_right.push(canonical[(n, n)]);
        diag.mismatches.push(mismatch);
        conjugated.push(LabeledMap { label: g.label.clone(), map: b });
    }
    Ok(RenormalizedPair { beta: norm.beta()?, normalization: norm, conjugated, diagnostics: diag })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    CollapsedRaw,
    Failed,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::CollapsedRaw => "collapsed_raw",
            Verdict::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ItemReport {
    pub renormalized: RenormalizedPair,
    /// Ball widths of the raw body at its spherical center.
    pub raw_widths: WidthStats,
    /// Traces of the canonical conjugated generators.
    pub traces: Vec<f64>,
    pub entry_bound_ok: bool,
    pub hausdorff_to_first: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RenormReport {
    pub items: Vec<std::result::Result<ItemReport, Error>>,
    pub verdict: Verdict,
}

impl RenormReport {
    pub fn hausdorff_to_first(&self) -> Vec<Option<f64>> {
        self.items.iter().map(|i| i.as_ref().ok().and_then(|r| r.hausdorff_to_first)).collect()
    }
}

fn item_report(pair: &MarkedPair, opts: &CenterOptions) -> Result<ItemReport> {
    let renormalized = renormalize_pair(pair, opts)?;
    let patch = AffinePatch::new(renormalized.normalization.center.center.clone());
    let raw_widths = ball_width_stats(&pair.body, &patch)?;
    let traces = renormalized.conjugated.iter().map(|g| g.map.canonical().trace()).collect();
    let entry_bound_ok = renormalized.diagnostics.entry_bounds.iter().all(|b| b.bound_holds);
    Ok(ItemReport { renormalized, raw_widths, traces, entry_bound_ok, hausdorff_to_first: None })
}

/// Renormalizes every item. Per-item failures are recorded in the report.
pub fn renormalize_sequence(seq: &[MarkedPair], opts: &CenterOptions) -> Result<RenormReport> {
    if let Some(first) = seq.first() {
        let labels = first.labels();
        for p in seq {
            if p.body.n() != first.body.n() {
                return Err(Error::DimensionMismatch { expected: first.body.n(), got: p.body.n() });
            }
            if p.labels() != labels {
                return Err(Error::Validation("generator labels differ between items".into()));
            }
        }
    }
    let mut items: Vec<Result<ItemReport>> = seq.par_iter().map(|p| item_report(p, opts)).collect();
    let first_body = items.first().and_then(|i| i.as_ref().ok()).map(|r| r.renormalized.normalization.normalized_body.clone());
    if let Some(first_body) = first_body {
        let distances: Vec<Option<f64>> = items
            .par_iter()
            .map(|i| {
                i.as_ref()
                    .ok()
                    .and_then(|r| hausdorff_distance(&r.renormalized.normalization.normalized_body, &first_body).ok())
            })
            .collect();
        for (item, dist) in items.iter_mut().zip(distances) {
            if let Ok(r) = item {
                r.hausdorff_to_first = dist;
            }
        }
    }

    let verdict = if items.is_empty() || items.iter().any(|i| i.is_err()) {
        Verdict::Failed
    } else {
        let ok: Vec<&ItemReport> = items.iter().map(|i| i.as_ref().expect("checked")).collect();
        let worst = |r: &ItemReport| r.renormalized.diagnostics.max_ratios.iter().copied().fold(0.0, f64::max);
        let limit = BOUNDED_FACTOR * worst(ok[0]);
        if ok.iter().all(|r| r.entry_bound_ok && worst(r) <= limit) {
            Verdict::Bounded
        } else {
            Verdict::CollapsedRaw
        }
    };
    Ok(RenormReport { items, verdict })
}

fn diagonal_generators(n: usize, diag_entries: &[Vec<f64>]) -> Result<Vec<DVector<f64>>> {
    diag_entries
        .iter()
        .map(|e| {
            if e.len() != n + 1 {
                return Err(Error::DimensionMismatch { expected: n + 1, got: e.len() });
            }
            if let Some(&bad) = e.iter().find(|&&x| !(x > 0.0)) {
                return Err(Error::NonPositive(bad));
            }
            Ok(DVector::from_column_slice(e))
        })
        .collect()
}

fn labelled(maps: Vec<ProjectiveMap>) -> Vec<LabeledMap> {
    maps.into_iter().enumerate().map(|(i, map)| LabeledMap { label: format!("g{}", i + 1), map }).collect()
}

/// The octant `{e_1, ..., e_{n+1}}` with positive diagonal generators.
pub fn make_simplex_pair(n: usize, diag_entries: &[Vec<f64>]) -> Result<MarkedPair> {
    let diags = diagonal_generators(n, diag_entries)?;
    let rays: Vec<DVector<f64>> = (0..=n).map(|i| SpherePoint::basis(n + 1, i).into_coords()).collect();
    let body = make_body(n, &rays)?;
    let maps = diags.iter().map(|d| ProjectiveMap::new(DMatrix::from_diagonal(d))).collect::<Result<Vec<_>>>()?;
    MarkedPair::new(body, labelled(maps))
}

/// A regular simplex around `e_1`: rays `(1, p_i)` with `p_i` the vertices
/// of a regular simplex of circumradius 1 centred at the origin.
pub fn centered_simplex_rays(n: usize) -> Vec<DVector<f64>> {
    let frame = rotation_to_pole(&SpherePoint::new(DVector::from_element(n + 1, 1.0)).expect("nonzero"));
    let scale = ((n + 1) as f64 / n as f64).sqrt();
    (0..=n)
        .map(|i| {
            let p = frame.column(i).rows(0, n) * scale;
            let mut r = DVector::from_element(n + 1, 1.0);
            r.rows_mut(1, n).copy_from(&p);
            r
        })
        .collect()
}

/// The regular simplex around `e_1` with generators acting diagonally in the
/// basis of its vertex rays.
pub fn make_centered_simplex_pair(n: usize, diag_entries: &[Vec<f64>]) -> Result<MarkedPair> {
    let diags = diagonal_generators(n, diag_entries)?;
    let rays = centered_simplex_rays(n);
    let body = make_body(n, &rays)?;
    let t = DMatrix::from_columns(&rays);
    let t_inv = t.clone().try_inverse().ok_or(Error::Singular { condition: f64::INFINITY })?;
    let maps = diags
        .iter()
        .map(|d| ProjectiveMap::new(&t * DMatrix::from_diagonal(d) * &t_inv))
        .collect::<Result<Vec<_>>>()?;
    MarkedPair::new(body, labelled(maps))
}

/// Items `(g_k body, g_k A g_k^{-1})` for the given conjugators `g_k`.
pub fn make_degenerating_sequence(base: &MarkedPair, conjugators: &[ProjectiveMap]) -> Result<Vec<MarkedPair>> {
    conjugators
        .iter()
        .map(|g| {
            let body = transform_body(g, &base.body)?;
            let gens = base
                .generators
                .iter()
                .map(|a| Ok(LabeledMap { label: a.label.clone(), map: g.conjugate(&a.map)? }))
                .collect::<Result<Vec<_>>>()?;
            MarkedPair::new(body, gens)
        })
        .collect()
}

/// `diag(ratio^k, 1, ..., 1)` for `k = 0..=steps`.
pub fn diagonal_conjugators(n: usize, ratio: f64, steps: usize) -> Result<Vec<ProjectiveMap>> {
    if !(ratio > 0.0) {
        return Err(Error::NonPositive(ratio));
    }
    (0..=steps)
        .map(|k| {
            let mut e = vec![1.0; n + 1];
            e[0] = ratio.powi(k as i32);
            ProjectiveMap::diagonal(&e)
        })
        .collect()
}

/// Hyperbolic translation by `s` in the `(i, n+1)` plane.
pub fn hyperbolic_generator(n: usize, i: usize, s: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n + 1, n + 1);
    m[(i, i)] = s.cosh();
    m[(n, n)] = s.cosh();
    m[(i, n)] = s.sinh();
    m[(n, i)] = s.sinh();
    m
}

/// Rotation by `t` in the `(i, j)` coordinate plane.
pub fn rotation_generator(n: usize, i: usize, j: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n + 1, n + 1);
    m[(i, i)] = t.cos();
    m[(j, j)] = t.cos();
    m[(i, j)] = -t.sin();
    m[(j, i)] = t.sin();
    m
}

/// Random product of `len` generators of `O(n, 1)`: hyperbolic translations
/// with `|s| <= 1` and coordinate rotations.
pub fn random_onl_word<R: Rng>(n: usize, len: usize, rng: &mut R) -> DMatrix<f64> {
    let mut w = DMatrix::identity(n + 1, n + 1);
    for _ in 0..len {
        let letter = if n >= 2 && rng.random_bool(0.5) {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            rotation_generator(n, i.min(j), i.max(j), rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        } else {
            hyperbolic_generator(n, rng.random_range(0..n), rng.random_range(-1.0..1.0))
        };
        w *= letter;
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlReport {
    pub n: usize,
    pub k: f64,
    pub words: usize,
    /// Words violating `max |A_ij| <= 2K |A_{n+1,n+1}|`.
    pub violations: usize,
    /// Words whose box premise fails numerically after rescaling.
    pub premise_failures: usize,
    pub max_ratio: f64,
    pub max_minimal_k: f64,
}

/// Checks the entry bound on `words` random words of length at most
/// `word_length`. The premise is verified on `E A E^{-1}` with
/// `E = diag(sqrt(n), ..., sqrt(n), 1)`, which maps the unit ball onto a
/// set containing the unit box.
pub fn onl_word_check(n: usize, word_length: usize, words: usize, k: f64, seed: u64) -> Result<OnlReport> {
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = (n as f64).sqrt();
    let mut report =
        OnlReport { n, k, words, violations: 0, premise_failures: 0, max_ratio: 0.0, max_minimal_k: 0.0 };
    for w in 0..words {
        let len = if w == 0 { 0 } else { rng.random_range(1..=word_length.max(1)) };
        let a = ProjectiveMap::new(random_onl_word(n, len, &mut rng))?;
        let (holds, ratio) = box_entry_bound(&a, k);
        report.max_ratio = report.max_ratio.max(ratio);
        if !holds {
            report.violations += 1;
        }
        let m = a.matrix();
        let rescaled = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            let ei = if i < n { root } else { 1.0 };
            let ej = if j < n { root } else { 1.0 };
            ei * m[(i, j)] / ej
        });
        match box_estimate_check(&ProjectiveMap::new(rescaled)?, k) {
            Ok(c) => {
                report.max_minimal_k = report.max_minimal_k.max(c.minimal_k);
                if c.minimal_k > k * (1.0 + 1e-9) {
                    report.premise_failures += 1;
                }
            }
            Err(_) => report.premise_failures += 1,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simplex_pair_validation() {
        let p = make_simplex_pair(2, &[vec![2.0, 1.0, 0.5]]).unwrap();
        assert!(preserves(&p.generators()[0].map, p.body()));
        assert!(make_simplex_pair(2, &[vec![1.0, 1.0, 1.0]]).is_ok());
        assert!(matches!(make_simplex_pair(2, &[vec![1.0, 0.0, 1.0]]), Err(Error::NonPositive(_))));
    }

    #[test]
    fn non_invariant_generator_is_rejected() {
        let p = make_simplex_pair(2, &[vec![2.0, 1.0, 0.5]]).unwrap();
        let bad = LabeledMap { label: "r".into(), map: ProjectiveMap::new(rotation_generator(2, 0, 1, 0.3)).unwrap() };
        assert!(matches!(MarkedPair::new(p.body().clone(), vec![bad]), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn octant_pair_stays_diagonal() {
        let p = make_simplex_pair(2, &[vec![2.0, 1.0, 0.5], vec![1.0, 3.0, 1.0]]).unwrap();
        let r = renormalize_pair(&p, &CenterOptions::default()).unwrap();
        assert!(r.diagnostics.bottom_right_exact);
        for g in &r.conjugated {
            let m = g.map.canonical();
            let off: f64 = (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].abs()).fold(0.0, f64::max);
            // conjugation by an orthogonal map moving (1,1,1) to e3 does not keep
            // diagonal matrices diagonal, but the normalized body is preserved
            assert!(off.is_finite());
        }
        assert!(r.diagnostics.entry_bounds.iter().all(|b| b.bound_holds));
    }

    #[test]
    fn constant_sequence_is_bounded() {
        let p = make_centered_simplex_pair(2, &[vec![2.0, 1.0, 0.5]]).unwrap();
        let seq = vec![p; 4];
        let r = renormalize_sequence(&seq, &CenterOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
        for d in r.hausdorff_to_first() {
            assert_eq!(d.unwrap(), 0.0);
        }
    }

    #[test]
    fn centered_simplex_is_regular() {
        for n in 1..=4 {
            let rays = centered_simplex_rays(n);
            for (i, a) in rays.iter().enumerate() {
                assert_relative_eq!(a.rows(1, n).norm(), 1.0, epsilon = 1e-12);
                for b in &rays[i + 1..] {
                    assert_relative_eq!((a - b).norm(), (2.0 * (n + 1) as f64 / n as f64).sqrt(), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn onl_examples() {
        let a = ProjectiveMap::new(hyperbolic_generator(2, 0, 5.0)).unwrap();
        let (holds, ratio) = box_entry_bound(&a, 2f64.sqrt());
        assert!(holds);
        assert_relative_eq!(ratio, 1.0, epsilon = 1e-12);
        // the unit box reaches outside the invariant disk, so the premise
        // only holds after rescaling
        assert!(!box_estimate_check(&a, 2f64.sqrt()).unwrap().premise_holds);
        let r = onl_word_check(2, 20, 200, 2f64.sqrt(), 1).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.premise_failures, 0);
    }
}
