//! Command-line front end. Every command prints one JSON report on stdout.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::body::{dual_body, ConvexBody};
use crate::center::{spherical_center, CenterOptions};
use crate::error::{Error, Result};
use crate::hausdorff::hausdorff_distance;
use crate::io::{
    error_report, matrix_rows, parent_dir, read_json, render, vector, with_schema, write_text, BodyFile,
    GeneratorFile, SequenceFile,
};
use crate::map::ProjectiveMap;
use crate::moments::{body_moments, mc_moments, MomentData};
use crate::normalize::{box_estimate_check, normalize_body};
use crate::renorm::{
    diagonal_conjugators, make_centered_simplex_pair, make_degenerating_sequence, make_simplex_pair, random_onl_word,
    renormalize_sequence, LabeledMap, RenormReport, BOUNDED_FACTOR,
};
use crate::sphere::AffinePatch;

#[derive(Debug, Parser)]
#[command(name = "cvxproj", version, about = "Moments, centers and renormalization of convex projective polytopes")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Convergence tolerance of the center solver.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    max_iter: usize,
    /// Monte-Carlo samples for the moment oracle (0 disables it).
    #[arg(long, global = true, default_value_t = 0)]
    mc_samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatchChoice {
    /// Patch around `e_{n+1}`.
    Native,
    /// Patch around a spherical center of the body.
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    SimplexDiag,
    OnlWords,
    Degenerate,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Volume, centroid, second moment and inertia of a body.
    Moments {
        body: PathBuf,
        #[arg(long, value_enum, default_value_t = PatchChoice::Native)]
        patch: PatchChoice,
    },
    /// Spherical center of a body.
    Center { body: PathBuf },
    /// Dual body, written in the body file format.
    Dual { body: PathBuf },
    /// Isotropic normal form of a body.
    Normalize { body: PathBuf },
    /// Box premise and entry bound for every matrix of a generator file.
    Boxcheck {
        matrices: PathBuf,
        #[arg(long = "K")]
        k: f64,
    },
    /// Angular Hausdorff distance between two bodies.
    Hausdorff { body1: PathBuf, body2: PathBuf },
    /// Renormalizes every item of a sequence file.
    RenormSeq { sequence: PathBuf },
    /// Writes an example input file.
    GenExample {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 3.0)]
        ratio: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

impl Cli {
    fn center_options(&self) -> CenterOptions {
        CenterOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }
}

fn load_body(path: &Path) -> Result<ConvexBody> {
    read_json::<BodyFile>(path)?.to_body()
}

fn moment_json(m: &MomentData) -> Value {
    json!({
        "volume": m.volume,
        "centroid": vector(&m.centroid),
        "second_moment": matrix_rows(&m.second_moment),
        "inertia": matrix_rows(&m.inertia),
    })
}

fn cmd_moments(cli: &Cli, path: &Path, patch: PatchChoice) -> Result<Value> {
    let body = load_body(path)?;
    let patch = match patch {
        PatchChoice::Native => AffinePatch::native(body.n()),
        PatchChoice::Center => {
            let c = spherical_center(&body, &cli.center_options())?;
            if !c.converged {
                return Err(Error::NoConvergence { iterations: c.iterations, residual: c.residual });
            }
            AffinePatch::new(c.center)
        }
    };
    let exact = body_moments(&body, &patch)?;
    let mut report = moment_json(&exact);
    report["pole"] = json!(vector(patch.pole().coords()));
    if cli.mc_samples > 0 {
        let mc = mc_moments(&body, &patch, cli.mc_samples, cli.seed)?;
        report["monte_carlo"] = json!({
            "samples": mc.samples,
            "accepted": mc.accepted,
            "seed": cli.seed,
            "moments": moment_json(&mc.moments),
            "volume_se": mc.volume_se,
            "centroid_se": vector(&mc.centroid_se),
        });
    }
    Ok(report)
}

fn cmd_center(cli: &Cli, path: &Path) -> Result<Value> {
    let body = load_body(path)?;
    let c = spherical_center(&body, &cli.center_options())?;
    if !c.converged {
        return Err(Error::NoConvergence { iterations: c.iterations, residual: c.residual });
    }
    Ok(json!({
        "center": vector(c.center.coords()),
        "residual": c.residual,
        "iterations": c.iterations,
        "converged": c.converged,
    }))
}

fn cmd_dual(path: &Path) -> Result<Value> {
    let dual = dual_body(&load_body(path)?)?;
    Ok(serde_json::to_value(BodyFile::from_body(&dual)).expect("body files serialize"))
}

fn cmd_normalize(cli: &Cli, path: &Path) -> Result<Value> {
    let body = load_body(path)?;
    let r = normalize_body(&body, &cli.center_options())?;
    let n = body.n();
    Ok(json!({
        "alpha": matrix_rows(r.alpha.matrix()),
        "scale": (0..=n).map(|i| r.scale.matrix()[(i, i)]).collect::<Vec<_>>(),
        "beta": matrix_rows(r.beta()?.matrix()),
        "K_achieved": r.k_achieved,
        "residuals": {
            "centroid_norm": r.residuals.centroid_norm,
            "moment_identity_error": r.residuals.moment_identity_error,
            "center_residual": r.residuals.center_residual,
        },
        "center": vector(r.center.center.coords()),
        "normalized_body": BodyFile::from_body(&r.normalized_body),
    }))
}

fn cmd_boxcheck(path: &Path, k: f64) -> Result<Value> {
    let file: GeneratorFile = read_json(path)?;
    let maps = file.to_maps()?;
    if maps.is_empty() {
        return Err(Error::Validation("no matrices".into()));
    }
    let mut per = Vec::new();
    let (mut premise, mut bound, mut ratio, mut minimal) = (true, true, 0.0f64, 0.0f64);
    for g in &maps {
        let c = box_estimate_check(&g.map, k)?;
        premise &= c.premise_holds;
        bound &= c.bound_holds;
        ratio = ratio.max(c.max_ratio);
        minimal = minimal.max(c.minimal_k);
        per.push(json!({
            "label": g.label,
            "premise_holds": c.premise_holds,
            "minimal_K": c.minimal_k,
            "bound_holds": c.bound_holds,
            "max_ratio": c.max_ratio,
        }));
    }
    Ok(json!({
        "K": k,
        "premise_holds": premise,
        "minimal_K": minimal,
        "bound_holds": bound,
        "max_ratio": ratio,
        "per_matrix": per,
    }))
}

fn cmd_hausdorff(a: &Path, b: &Path) -> Result<Value> {
    Ok(json!({ "distance": hausdorff_distance(&load_body(a)?, &load_body(b)?)? }))
}

fn renorm_json(report: &RenormReport) -> Value {
    let items: Vec<Value> = report
        .items
        .iter()
        .enumerate()
        .map(|(k, item)| match item {
            Ok(r) => {
                let d = &r.renormalized.diagnostics;
                let res = &r.renormalized.normalization.residuals;
                json!({
                    "index": k,
                    "beta": matrix_rows(r.renormalized.beta.matrix()),
                    "conjugated": r.renormalized.conjugated.iter().map(|g| json!({
                        "label": g.label,
                        "matrix": matrix_rows(&g.map.canonical()),
                    })).collect::<Vec<_>>(),
                    "K_achieved": d.k_achieved,
                    "entry_bound_ok": r.entry_bound_ok,
                    "max_ratios": d.max_ratios,
                    "bottom_right": d.bottom_right,
                    "bottom_right_exact": d.bottom_right_exact,
                    "raw_inner": r.raw_widths.inner,
                    "raw_outer": r.raw_widths.outer,
                    "hausdorff_to_first": r.hausdorff_to_first,
                    "traces": r.traces,
                    "residuals": {
                        "centroid_norm": res.centroid_norm,
                        "moment_identity_error": res.moment_identity_error,
                        "center_residual": res.center_residual,
                    },
                })
            }
            Err(e) => json!({ "index": k, "error": { "kind": e.kind(), "message": e.to_string() } }),
        })
        .collect();
    json!({
        "items": items,
        "hausdorff_to_first": report.hausdorff_to_first(),
        "verdict": report.verdict.as_str(),
        "verdict_rule": format!(
            "heuristic: bounded iff every entry bound holds and every item's max entry ratio is at most {BOUNDED_FACTOR} times the first item's"
        ),
    })
}

fn cmd_renorm(cli: &Cli, path: &Path) -> Result<Value> {
    let file: SequenceFile = read_json(path)?;
    let pairs = file.to_pairs(&parent_dir(path))?;
    let report = renormalize_sequence(&pairs, &cli.center_options())?;
    Ok(renorm_json(&report))
}

fn random_diagonals(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..=n).map(|_| rng.random_range(-1.0f64..1.0).exp()).collect()).collect()
}

fn cmd_gen(cli: &Cli, family: Family, out: &Path, steps: usize, ratio: f64, n: usize) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let (text, count) = match family {
        Family::SimplexDiag | Family::Degenerate => {
            let diags = random_diagonals(n, 2, &mut rng);
            let base = if family == Family::SimplexDiag {
                make_simplex_pair(n, &diags)?
            } else {
                make_centered_simplex_pair(n, &diags)?
            };
            let seq = make_degenerating_sequence(&base, &diagonal_conjugators(n, ratio, steps)?)?;
            (serde_json::to_value(SequenceFile::from_pairs(&seq)).expect("sequence files serialize"), seq.len())
        }
        Family::OnlWords => {
            if n == 0 || n > 4 {
                return Err(Error::UnsupportedDimension(n));
            }
            let maps = (0..steps)
                .map(|i| {
                    let len = rng.random_range(1..=20);
                    Ok(LabeledMap { label: format!("w{}", i + 1), map: ProjectiveMap::new(random_onl_word(n, len, &mut rng))? })
                })
                .collect::<Result<Vec<_>>>()?;
            (serde_json::to_value(GeneratorFile::from_maps(n, &maps)).expect("generator files serialize"), maps.len())
        }
    };
    write_text(out, &render(&text, cli.pretty))?;
    let family = family.to_possible_value().expect("named variants").get_name().to_string();
    Ok(json!({ "family": family, "out": out.display().to_string(), "entries": count, "n": n, "seed": cli.seed }))
}

fn dispatch(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Moments { body, patch } => cmd_moments(cli, body, *patch),
        Command::Center { body } => cmd_center(cli, body),
        Command::Dual { body } => cmd_dual(body),
        Command::Normalize { body } => cmd_normalize(cli, body),
        Command::Boxcheck { matrices, k } => cmd_boxcheck(matrices, *k),
        Command::Hausdorff { body1, body2 } => cmd_hausdorff(body1, body2),
        Command::RenormSeq { sequence } => cmd_renorm(cli, sequence),
        Command::GenExample { family, out, steps, ratio, n } => cmd_gen(cli, *family, out, *steps, *ratio, *n),
    }
}

/// Runs the command line `args` (including the program name), writing the
/// report to `out`. Returns the process exit code.
pub fn run<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            eprintln!("{e}");
            let err = Error::Parse(e.kind().to_string());
            let _ = out.write_all(render(&error_report(&err), false).as_bytes());
            return err.exit_code();
        }
    };
    let (report, code) = match dispatch(&cli) {
        Ok(v) => (with_schema(v), 0),
        Err(e) => {
            eprintln!("cvxproj: {e}");
            (error_report(&e), e.exit_code())
        }
    };
    let _ = out.write_all(render(&report, cli.pretty).as_bytes());
    code
}
