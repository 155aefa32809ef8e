#![allow(dead_code)]

use cvxproj::body::{make_body, make_box, ConvexBody};
use cvxproj::map::ProjectiveMap;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed orthogonal matrix of order `dim`.
pub fn random_orthogonal<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_diagonal(&r.diagonal().map(|x| if x < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

pub fn octant(n: usize) -> ConvexBody {
    let rays: Vec<_> = (0..=n)
        .map(|i| {
            let mut e = DVector::zeros(n + 1);
            e[i] = 1.0;
            e
        })
        .collect();
    make_body(n, &rays).unwrap()
}

pub fn lift(p: &DVector<f64>) -> DVector<f64> {
    let n = p.len();
    let mut r = DVector::from_element(n + 1, 1.0);
    r.rows_mut(0, n).copy_from(p);
    r
}

/// Simplex with random vertices in the native patch.
pub fn random_patch_simplex(n: usize, seed: u64) -> (ConvexBody, Vec<DVector<f64>>) {
    let mut r = rng(seed);
    loop {
        let pts: Vec<DVector<f64>> =
            (0..=n).map(|_| DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0))).collect();
        let mut edges = DMatrix::zeros(n, n);
        for k in 0..n {
            edges.set_column(k, &(&pts[k + 1] - &pts[0]));
        }
        if edges.determinant().abs() < 0.05 {
            continue;
        }
        let rays: Vec<_> = pts.iter().map(lift).collect();
        return (make_body(n, &rays).unwrap(), pts);
    }
}

/// Convex hull of 5 to 14 random patch points, moved by a random rotation
/// of the sphere.
pub fn random_body(n: usize, seed: u64) -> ConvexBody {
    let mut r = rng(seed.wrapping_mul(0x9E37_79B9).wrapping_add(n as u64));
    let m = r.random_range(n + 3..n + 12);
    let scale = r.random_range(0.3..2.0);
    let pts: Vec<DVector<f64>> = (0..m)
        .map(|_| lift(&DVector::from_fn(n, |_, _| scale * r.random_range(-1.0..1.0))))
        .collect();
    let q = random_orthogonal(n + 1, &mut r);
    let rays: Vec<_> = pts.iter().map(|p| &q * p).collect();
    make_body(n, &rays).unwrap()
}

/// Box, random simplex, octant and `count` random polytopes for n in {2, 3}.
pub fn corpus(count: usize) -> Vec<(String, ConvexBody)> {
    let mut out = Vec::new();
    for n in [2usize, 3] {
        out.push((format!("box{n}"), make_box(n, 1.0).unwrap()));
        out.push((format!("simplex{n}"), random_patch_simplex(n, 11 + n as u64).0));
        out.push((format!("octant{n}"), octant(n)));
    }
    for i in 0..count {
        let n = 2 + i % 2;
        out.push((format!("random{i}"), random_body(n, i as u64)));
    }
    out
}

pub fn orthogonal_map(q: DMatrix<f64>) -> ProjectiveMap {
    ProjectiveMap::unscaled(q).unwrap()
}

/// CLI invocations with stored golden outputs. Inputs are read relative to
/// `tests/fixtures`; `gen-example` cases write `gen.json` into a scratch
/// directory.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("moments_square", &["moments", "square.json"]),
    ("moments_square_pretty", &["moments", "square.json", "--pretty"]),
    ("moments_octant_center", &["moments", "octant.json", "--patch", "center"]),
    ("moments_triangle_mc", &["moments", "triangle.json", "--mc-samples", "200000", "--seed", "7"]),
    ("moments_cube", &["moments", "cube.json"]),
    ("center_octant", &["center", "octant.json"]),
    ("center_triangle", &["center", "triangle.json"]),
    ("center_nonconvex", &["center", "nonconvex-rays.json"]),
    ("dual_square", &["dual", "square.json"]),
    ("dual_cube", &["dual", "cube.json"]),
    ("normalize_square", &["normalize", "square.json"]),
    ("normalize_triangle", &["normalize", "triangle.json"]),
    ("boxcheck_identity", &["boxcheck", "identity.json", "--K", "1"]),
    ("boxcheck_hyperbolic", &["boxcheck", "hyperbolic.json", "--K", "1.4142135623730951"]),
    ("hausdorff_square_octant", &["hausdorff", "square.json", "octant.json"]),
    ("renorm_degenerate", &["renorm-seq", "degenerate-seq.json"]),
    ("renorm_simplex", &["renorm-seq", "simplex-seq.json"]),
    ("gen_degenerate", &["gen-example", "--family", "degenerate", "--out", "gen.json", "--seed", "1", "--steps", "3"]),
    ("gen_simplex", &["gen-example", "--family", "simplex-diag", "--out", "gen.json", "--seed", "4", "--steps", "2", "--n", "3"]),
    ("gen_onl", &["gen-example", "--family", "onl-words", "--out", "gen.json", "--seed", "2", "--steps", "5", "--n", "3"]),
];

pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

/// Runs the binary for a golden case and returns (stdout, exit code,
/// written file if any).
pub fn run_case(args: &[&str]) -> (String, i32, Option<String>) {
    let scratch = tempfile::tempdir().unwrap();
    let generates = args[0] == "gen-example";
    let cwd = if generates { scratch.path().to_path_buf() } else { fixtures_dir() };
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_cvxproj")).args(args).current_dir(&cwd).output().unwrap();
    let written = generates.then(|| std::fs::read_to_string(scratch.path().join("gen.json")).unwrap());
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap_or(-1), written)
}
