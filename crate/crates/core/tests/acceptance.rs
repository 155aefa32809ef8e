//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Set `UPDATE_GOLDEN=1` to rewrite the CLI golden files.

mod common;

use std::time::{Duration, Instant};

use common::*;
use cvxproj::body::{dual_body, make_body, make_box, transform_body, vertex_set_distance, ConvexBody};
use cvxproj::center::{center_residual, spherical_center, CenterOptions};
use cvxproj::map::{all_eigenvalues_real, ProjectiveMap};
use cvxproj::moments::{body_moments, mc_moments};
use cvxproj::normalize::{box_estimate_check, normalize_body};
use cvxproj::renorm::{
    diagonal_conjugators, make_centered_simplex_pair, make_degenerating_sequence, onl_word_check, renormalize_sequence,
    rotation_generator,
};
use cvxproj::sphere::{angle_between, AffinePatch, SpherePoint};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = o.pass && in_time;
    let limit_text = limit.map(|l| format!("; limit {} s", l.as_secs())).unwrap_or_default();
    println!(
        "criterion {id} {name}: {} ({:.2} s{limit_text}) {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        o.detail
    );
    pass
}

fn box_fuzz() -> Outcome {
    let mut failures = 0;
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        let mut r = rng(1000 + n as u64);
        let mut passed = 0;
        while passed < 10_000 {
            let m = DMatrix::<f64>::from_fn(n + 1, n + 1, |_, _| r.sample(StandardNormal));
            let Ok(a) = ProjectiveMap::new(m) else { continue };
            let Ok(probe) = box_estimate_check(&a, 1.0) else { continue };
            let k0 = probe.minimal_k.max(1.0);
            let c = box_estimate_check(&a, k0).unwrap();
            passed += 1;
            tested += 1;
            worst = worst.max(c.max_ratio / (2.0 * k0));
            if !(c.premise_holds && c.bound_holds) {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{failures} failures over {tested} matrices; largest max_ratio / 2K0 = {worst:.4}"),
    )
}

fn onl_words() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for n in [2usize, 3] {
        let r = onl_word_check(n, 20, 1000, (n as f64).sqrt(), 77 + n as u64).unwrap();
        pass &= r.violations == 0 && r.premise_failures == 0;
        detail.push(format!(
            "n={n}: {} violations, {} premise failures, max ratio {:.6}, max rescaled minimal K {:.12}",
            r.violations, r.premise_failures, r.max_ratio, r.max_minimal_k
        ));
    }
    outcome(pass, detail.join("; "))
}

fn moments_patch(name: &str, body: &ConvexBody) -> AffinePatch {
    if name.starts_with("box") || name.starts_with("simplex") {
        AffinePatch::native(body.n())
    } else if name.starts_with("octant") {
        AffinePatch::new(SpherePoint::new(DVector::from_element(body.n() + 1, 1.0)).unwrap())
    } else {
        AffinePatch::new(body.witness().clone())
    }
}

fn moments_oracle() -> Outcome {
    let bodies = corpus(100);
    let results: Vec<(String, f64, f64, f64)> = bodies
        .par_iter()
        .enumerate()
        .map(|(i, (name, body))| {
            let patch = moments_patch(name, body);
            let exact = body_moments(body, &patch).unwrap();
            let mc = mc_moments(body, &patch, 1_000_000, 500 + i as u64).unwrap();
            let z = |err: f64, se: f64| if se > 0.0 { err / se } else if err == 0.0 { 0.0 } else { f64::INFINITY };
            let zv = z((exact.volume - mc.moments.volume).abs(), mc.volume_se);
            let zc = z((&exact.centroid - &mc.moments.centroid).norm(), mc.centroid_se.norm());
            let zm = z(
                (exact.second_moment_about_origin() - &mc.second_about_origin).norm(),
                mc.second_about_origin_se.norm(),
            );
            (name.clone(), zv, zc, zm)
        })
        .collect();
    let outside: Vec<String> = results
        .iter()
        .filter(|(_, a, b, c)| *a > 3.0 || *b > 3.0 || *c > 3.0)
        .map(|(n, a, b, c)| format!("{n}(z_vol {a:.2}, z_centroid {b:.2}, z_moment {c:.2})"))
        .collect();
    let max_z = results.iter().map(|(_, a, b, c)| a.max(*b).max(*c)).fold(0.0, f64::max);
    // diagnostic only: outliers resampled at 10x the count with a fresh seed
    let recheck: Vec<String> = results
        .iter()
        .zip(&bodies)
        .filter(|((_, a, b, c), _)| *a > 3.0 || *b > 3.0 || *c > 3.0)
        .map(|((name, ..), (_, body))| {
            let patch = moments_patch(name, body);
            let exact = body_moments(body, &patch).unwrap();
            let mc = mc_moments(body, &patch, 10_000_000, 7_000_000).unwrap();
            format!("{name} z_vol {:.2}", (exact.volume - mc.moments.volume).abs() / mc.volume_se)
        })
        .collect();

    let sq = body_moments(&make_box(2, 1.0).unwrap(), &AffinePatch::native(2)).unwrap();
    let box_err = (&sq.second_moment - DMatrix::identity(2, 2) * (4.0 / 3.0)).amax();
    let mut simplex_err: f64 = 0.0;
    for seed in 0..20 {
        for n in [2usize, 3] {
            let (body, pts) = random_patch_simplex(n, seed);
            let m = body_moments(&body, &AffinePatch::native(n)).unwrap();
            let mean = pts.iter().fold(DVector::zeros(n), |a, p| a + p) / (n + 1) as f64;
            simplex_err = simplex_err.max((m.centroid - mean).amax());
        }
    }
    outcome(
        outside.is_empty() && box_err <= 1e-10 && simplex_err <= 1e-10,
        format!(
            "{} bodies, max z-score {max_z:.3}, outside 3 SE: [{}] (at 1e7 samples: [{}]); box M error {box_err:.1e}; simplex centroid error {simplex_err:.1e}",
            results.len(),
            outside.join(", "),
            recheck.join(", ")
        ),
    )
}

fn normalization() -> Outcome {
    let opts = CenterOptions::default();
    let bodies = corpus(100);
    let rows: Vec<std::result::Result<(f64, f64, f64, f64, f64), String>> = bodies
        .par_iter()
        .map(|(name, b)| {
            let r = normalize_body(b, &opts).map_err(|e| format!("{name}: {e}"))?;
            let again = normalize_body(&r.normalized_body, &opts).map_err(|e| format!("{name} (again): {e}"))?;
            let n = b.n();
            let scale_change = (0..n).map(|i| (again.scale.matrix()[(i, i)] - 1.0).abs()).fold(0.0, f64::max);
            Ok((
                r.residuals.centroid_norm,
                r.residuals.moment_identity_error,
                r.k_achieved,
                scale_change,
                (again.k_achieved - r.k_achieved).abs(),
            ))
        })
        .collect();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    let ok: Vec<_> = rows.iter().filter_map(|r| r.as_ref().ok()).collect();
    let max = |f: &dyn Fn(&(f64, f64, f64, f64, f64)) -> f64| ok.iter().map(|r| f(r)).fold(0.0, f64::max);
    let (c, m, k, s, dk) = (max(&|r| r.0), max(&|r| r.1), max(&|r| r.2), max(&|r| r.3), max(&|r| r.4));

    let sq = normalize_body(&make_box(2, 1.0).unwrap(), &opts).unwrap();
    let s_expected = 0.75f64.powf(0.25);
    let s_err = (0..2).map(|i| (sq.scale.matrix()[(i, i)] - s_expected).abs()).fold(0.0, f64::max);
    let k_err = (sq.k_achieved - (4.0f64 / 3.0).powf(0.25)).abs();
    outcome(
        errors.is_empty() && c <= 1e-8 && m <= 1e-6 && k.is_finite() && s <= 1e-8 && dk <= 1e-8 && s_err <= 1e-10 && k_err <= 1e-8,
        format!(
            "{} bodies, {} errors {:?}; max centroid {c:.1e}, max |M-I| {m:.1e}, max K {k:.4}; idempotence scale change {s:.1e}, K change {dk:.1e}; square scale error {s_err:.1e}, K error {k_err:.1e}",
            bodies.len(),
            errors.len(),
            errors
        ),
    )
}

fn centers() -> Outcome {
    let opts = CenterOptions::default();
    let sq = spherical_center(&make_box(2, 1.0).unwrap(), &opts).unwrap();
    let sq_angle = angle_between(sq.center.coords(), &DVector::from_vec(vec![0.0, 0.0, 1.0]));
    let oc = spherical_center(&octant(2), &opts).unwrap();
    let oc_angle = angle_between(oc.center.coords(), &DVector::from_element(3, 1.0));
    let known = sq.converged && oc.converged && sq.residual <= 1e-10 && oc.residual <= 1e-10 && sq_angle <= 1e-9 && oc_angle <= 1e-9;

    let rows: Vec<std::result::Result<(f64, f64), String>> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let n = 2 + (i % 2) as usize;
            let body = random_body(n, 9000 + i);
            let c = spherical_center(&body, &opts).map_err(|e| e.to_string())?;
            if !c.converged {
                return Err(format!("body {i}: residual {:e}", c.residual));
            }
            let q = random_orthogonal(n + 1, &mut rng(i));
            let moved = transform_body(&orthogonal_map(q.clone()), &body).map_err(|e| e.to_string())?;
            let y = SpherePoint::new(&q * c.center.coords()).unwrap();
            Ok((c.residual, center_residual(&moved, &y).map_err(|e| e.to_string())?))
        })
        .collect();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    let worst_moved = rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.1).fold(0.0, f64::max);
    let worst_base = rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.0).fold(0.0, f64::max);
    outcome(
        known && errors.is_empty() && worst_moved <= 1e-8,
        format!(
            "square residual {:.1e} angle {sq_angle:.1e}; octant residual {:.1e} angle {oc_angle:.1e}; 100 random bodies: {} failures, max residual {worst_base:.1e}, max residual after rotation {worst_moved:.1e}",
            sq.residual,
            oc.residual,
            errors.len()
        ),
    )
}

fn degeneration() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2usize, 3] {
        let diags = vec![
            (0..=n).map(|i| 1.0 + i as f64).collect::<Vec<f64>>(),
            (0..=n).map(|i| 2.0 / (1.0 + i as f64)).collect::<Vec<f64>>(),
        ];
        let base = make_centered_simplex_pair(n, &diags).unwrap();
        let seq = make_degenerating_sequence(&base, &diagonal_conjugators(n, 3.0, 10).unwrap()).unwrap();
        let report = renormalize_sequence(&seq, &CenterOptions::default()).unwrap();
        let items: Vec<_> = report.items.iter().filter_map(|i| i.as_ref().ok()).collect();
        let all_ok = items.len() == seq.len();
        let inner: Vec<f64> = items.iter().map(|i| i.raw_widths.inner).collect();
        let decreasing = inner.windows(2).all(|w| w[1] < w[0]);
        let last_inner = inner.last().copied().unwrap_or(f64::NAN);
        let haus = report.hausdorff_to_first().iter().map(|d| d.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        let bounds = items.iter().all(|i| i.entry_bound_ok);
        let exact = items.iter().all(|i| i.renormalized.diagnostics.bottom_right_exact);
        pass &= all_ok && decreasing && last_inner <= 1e-3 && haus <= 1e-6 && bounds && exact;
        detail.push(format!(
            "n={n}: raw inner {:.3e} -> {last_inner:.3e} (decreasing {decreasing}), max Hausdorff {haus:.1e}, entry bounds {bounds}, bottom-right exact {exact}, verdict {}",
            inner.first().copied().unwrap_or(f64::NAN),
            report.verdict.as_str()
        ));
    }
    outcome(pass, detail.join("; "))
}

fn duality() -> Outcome {
    let bodies = corpus(100);
    let failures: Vec<String> = bodies
        .par_iter()
        .filter_map(|(name, b)| {
            let dd = dual_body(&dual_body(b).ok()?).ok()?;
            vertex_set_distance(b, &dd, 1e-9).is_none().then(|| name.clone())
        })
        .collect();
    let oct = octant(2);
    let self_dual = vertex_set_distance(&oct, &dual_body(&oct).unwrap(), 1e-12).is_some();
    let square = make_box(2, 1.0).unwrap();
    let cross = make_body(2, &[v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0]), v(&[-1.0, 0.0, 1.0]), v(&[0.0, -1.0, 1.0])]).unwrap();
    let sq_to_cross = vertex_set_distance(&cross, &dual_body(&square).unwrap(), 1e-12).is_some();
    let cross_to_sq = vertex_set_distance(&square, &dual_body(&cross).unwrap(), 1e-12).is_some();
    outcome(
        failures.is_empty() && self_dual && sq_to_cross && cross_to_sq,
        format!(
            "double dual mismatches on {} of {} bodies {:?}; octant self-dual {self_dual}; square->cross {sq_to_cross}; cross->square {cross_to_sq}",
            failures.len(),
            bodies.len(),
            failures
        ),
    )
}

fn eigen_reality() -> Outcome {
    let mut r = rng(8);
    let sym = {
        let g = DMatrix::<f64>::from_fn(3, 3, |_, _| r.sample(StandardNormal));
        &g + g.transpose()
    };
    let symmetric = all_eigenvalues_real(&ProjectiveMap::new(sym).unwrap(), 1).unwrap();
    let rotation = all_eigenvalues_real(&ProjectiveMap::new(rotation_generator(2, 0, 1, 0.7)).unwrap(), 1).unwrap();
    let companion = ProjectiveMap::from_row_slice(3, &[0.0, 0.0, 1.0, 1.0, 0.0, -1.0, 0.0, 1.0, 1.0]).unwrap();
    let companion = all_eigenvalues_real(&companion, 1).unwrap();

    let mut disagreements = 0;
    let mut counts = [0usize; 2];
    for i in 0..500 {
        let dim = 3 + i % 2;
        let base = match i % 4 {
            0 => {
                let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| r.sample(StandardNormal));
                &g + g.transpose()
            }
            1 => {
                let t = random_orthogonal(dim, &mut r);
                let mut d = DMatrix::<f64>::identity(dim, dim);
                d.view_mut((0, 0), (2, 2)).copy_from(&rotation_generator(1, 0, 1, r.random_range(0.2..3.0)));
                for k in 2..dim {
                    d[(k, k)] = r.random_range(-2.0..2.0);
                }
                &t * d * t.transpose()
            }
            _ => DMatrix::<f64>::from_fn(dim, dim, |_, _| r.sample(StandardNormal)),
        };
        let p = loop {
            let p = DMatrix::<f64>::from_fn(dim, dim, |_, _| r.sample(StandardNormal)) + DMatrix::identity(dim, dim) * 2.0;
            let sv = p.clone().singular_values();
            if sv.max() / sv.min() < 100.0 {
                break p;
            }
        };
        let conj = &p * &base * p.clone().try_inverse().unwrap();
        let power = 1 + (i % 3) as u32;
        let a = all_eigenvalues_real(&ProjectiveMap::new(base).unwrap(), power).unwrap();
        let b = all_eigenvalues_real(&ProjectiveMap::new(conj).unwrap(), power).unwrap();
        counts[a as usize] += 1;
        if a != b {
            disagreements += 1;
        }
    }
    outcome(
        symmetric && !rotation && !companion && disagreements == 0,
        format!(
            "symmetric {symmetric}, rotation block {rotation}, companion {companion}; {disagreements} disagreements over 500 conjugations ({} real, {} non-real)",
            counts[1], counts[0]
        ),
    )
}

fn cli_determinism() -> Outcome {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let golden = fixtures_dir().join("golden");
    if update {
        std::fs::create_dir_all(&golden).unwrap();
    }
    let mut problems = Vec::new();
    for (name, args) in GOLDEN_CASES {
        let first = run_case(args);
        let second = run_case(args);
        if first != second {
            problems.push(format!("{name}: runs differ"));
            continue;
        }
        let (stdout, code, written) = first;
        let mut stored = format!("exit {code}\n{stdout}");
        if let Some(w) = written {
            stored.push_str("--- gen.json\n");
            stored.push_str(&w);
        }
        let path = golden.join(format!("{name}.txt"));
        if update {
            std::fs::write(&path, &stored).unwrap();
        } else {
            match std::fs::read_to_string(&path) {
                Ok(expected) if expected == stored => {}
                Ok(_) => problems.push(format!("{name}: differs from golden")),
                Err(_) => problems.push(format!("{name}: golden missing")),
            }
        }
    }
    outcome(problems.is_empty(), format!("{} golden cases; problems {:?}", GOLDEN_CASES.len(), problems))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "box-estimate fuzz", Some(secs(10)), box_fuzz),
        run(2, "O(n,1) words", Some(secs(5)), onl_words),
        run(3, "moments vs Monte-Carlo oracle", Some(secs(60)), moments_oracle),
        run(4, "normalization contract", Some(secs(30)), normalization),
        run(5, "spherical center", Some(secs(30)), centers),
        run(6, "degeneration rescue", Some(secs(10)), degeneration),
        run(7, "duality", Some(secs(10)), duality),
        run(8, "eigen-reality test", Some(secs(5)), eigen_reality),
        run(9, "CLI determinism", None, cli_determinism),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
