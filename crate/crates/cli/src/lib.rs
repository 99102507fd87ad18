//! Build, check, and query Markov partitions from the command line.
//!
//! Every command is a plain function returning the text it would print, so
//! the binary is a thin argument parser and the tests call these directly.

pub mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use toral_markov::partition_builder::{
    build_cover_at, build_partition, check_coverage, cover_markov_check, feasible_budget,
    shadow_cross_check, validate_partition, verify_markov, Cell, CoverError, MarkovPartition,
};
use toral_markov::shadowing::{parse_points, shadow, verify_shadow, PseudoOrbit};
use toral_markov::symbolic::{
    all_codes, cylinder, encode, injectivity_check, perron_eigenvalue, random_admissible_word,
    semiconjugacy_residual, transition_matrix, Coding, ItineraryWindow, TransitionMatrix,
};
use toral_markov::{make_automorphism, ConstantsBudget, ToralAutomorphism, TorusError, TorusPoint};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Malformed(_) | CliError::Io { .. } => 1,
            CliError::Infeasible(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub matrix: [[i64; 2]; 2],
    pub beta: f64,
    pub samples: usize,
    pub seed: u64,
    pub depth: usize,
    pub out: PathBuf,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            matrix: [[2, 1], [1, 1]],
            beta: 0.1,
            samples: 100,
            seed: 42,
            depth: 15,
            out: PathBuf::from("."),
            svg: false,
        }
    }
}

pub fn parse_matrix(s: &str) -> Result<[[i64; 2]; 2], CliError> {
    let v: Result<Vec<i64>, _> = s.split(',').map(|t| t.trim().parse::<i64>()).collect();
    match v.as_deref() {
        Ok([a, b, c, d]) => Ok([[*a, *b], [*c, *d]]),
        _ => Err(CliError::Malformed(format!("matrix must be four integers a,b,c,d, got {s:?}"))),
    }
}

pub fn parse_point(s: &str) -> Result<TorusPoint, CliError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v.as_deref() {
        Ok([x, y]) if x.is_finite() && y.is_finite() => Ok(TorusPoint::new(*x, *y)),
        _ => Err(CliError::Malformed(format!("point must be x,y, got {s:?}"))),
    }
}

/// Comma-separated 1-based cell numbers to 0-based indices.
pub fn parse_word(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(CliError::Malformed(format!("bad symbol {t:?}; cells are numbered from 1"))),
        })
        .collect()
}

pub fn format_word(w: &[usize]) -> String {
    w.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn automorphism(m: [[i64; 2]; 2]) -> Result<ToralAutomorphism, CliError> {
    make_automorphism(m).map_err(|e| match e {
        TorusError::NotHyperbolic { .. } => CliError::Infeasible(e.to_string()),
        other => CliError::Malformed(other.to_string()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverInfo {
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    pub steps: Vec<[i64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub passed: bool,
    pub area_sum: f64,
    pub overlap_area: f64,
    pub improper: usize,
    pub uncovered: usize,
    pub markov_pairs: usize,
    pub markov_samples: usize,
    pub markov_violations: usize,
    pub face_failures: usize,
    pub cylinder_failures: usize,
    pub perron: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub matrix: [[i64; 2]; 2],
    pub budget: ConstantsBudget,
    pub cover: CoverInfo,
    pub diameter: f64,
    pub dropped: usize,
    pub cells: Vec<Cell>,
    pub verification: Verification,
}

pub fn load_partition(path: &Path) -> Result<(ToralAutomorphism, PartitionFile, MarkovPartition), CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: PartitionFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    let f = automorphism(file.matrix)?;
    let p = MarkovPartition::new(&f, file.cells.clone());
    Ok((f, file, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub text: String,
}

const PROBE: usize = 500;
const SHADOW_ORBITS: usize = 100;
const SHADOW_HALF_WIDTH: usize = 20;

/// Build the cover at beta/2, refine it, verify everything, and write
/// partition.json, matrix.csv, report.txt (and partition.svg) to `out`.
pub fn cmd_build(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = automorphism(cfg.matrix)?;
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        return Err(CliError::Malformed(format!("beta must be positive, got {}", cfg.beta)));
    }
    let beta_cover = cfg.beta / 2.0;
    let cover = build_cover_at(&f, beta_cover).map_err(|e| match e {
        CoverError::BadBeta(_) => CliError::Infeasible(format!("BudgetInfeasible: {e}")),
        other => CliError::Infeasible(other.to_string()),
    })?;
    let budget = feasible_budget(&f, beta_cover);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let coverage = check_coverage(&f, &cover, PROBE);
    let cover_fibers = cover_markov_check(&f, &cover, 100 * cfg.samples, &mut rng);
    let shadows = shadow_cross_check(&f, &cover, SHADOW_ORBITS, SHADOW_HALF_WIDTH, &mut rng)
        .map_err(|e| CliError::Verification(format!("shadowing the cover failed: {e}")))?;

    let p = build_partition(&f, &cover);
    let validity = validate_partition(&f, &p, PROBE);
    let markov = verify_markov(&f, &p, cfg.samples, &mut rng);
    let a = transition_matrix(&f, &p);
    let perron = perron_eigenvalue(&a);

    let depth = cfg.depth.max(2);
    let mut residual: f64 = 0.0;
    let mut decode_failures = 0;
    for _ in 0..cfg.samples {
        let w = random_admissible_word(&a, depth, &mut rng);
        match semiconjugacy_residual(&f, &p, &w) {
            Ok(r) => residual = residual.max(r),
            Err(_) => decode_failures += 1,
        }
    }
    let round_trip = injectivity_check(&f, &p, cfg.samples, depth, &mut rng);

    let passed = coverage.is_ok()
        && cover_fibers.stable_violations + cover_fibers.unstable_violations == 0
        && shadows.outside == 0
        && validity.ok(cfg.beta)
        && markov.ok()
        && perron.is_ok()
        && decode_failures == 0
        && round_trip.failures == 0;

    let verification = Verification {
        passed,
        area_sum: validity.area_sum,
        overlap_area: validity.overlap_area,
        improper: validity.improper,
        uncovered: validity.uncovered,
        markov_pairs: markov.pairs,
        markov_samples: markov.samples,
        markov_violations: markov.violations,
        face_failures: markov.stable_face_failures + markov.unstable_face_failures,
        cylinder_failures: markov.cylinder_failures,
        perron: perron.as_ref().ok().copied(),
    };
    let file = PartitionFile {
        matrix: cfg.matrix,
        budget,
        cover: CoverInfo { n: cover.net.n, beta: cover.beta, alpha: cover.alpha, steps: cover.steps.clone() },
        diameter: p.diameter,
        dropped: p.dropped,
        cells: p.cells.clone(),
        verification,
    };

    let mut r = String::new();
    let m = cfg.matrix;
    let _ = writeln!(r, "matrix: {},{},{},{}", m[0][0], m[0][1], m[1][0], m[1][1]);
    let _ = writeln!(r, "lambda_u: {}", f.lambda_u);
    let _ = writeln!(r, "lambda_s: {}", f.lambda_s);
    let _ = writeln!(r, "seed: {}", cfg.seed);
    let _ = writeln!(r, "beta requested: {}", cfg.beta);
    let _ = writeln!(r, "beta cover: {}", beta_cover);
    let _ = writeln!(
        r,
        "budget: rho={} epsilon={} delta={} beta={} alpha={} gamma={}",
        budget.rho, budget.epsilon, budget.delta, budget.beta, budget.alpha, budget.gamma
    );
    let _ = writeln!(r, "cover: {}x{} grid, {} steps, jump radius {}", cover.net.n, cover.net.n, cover.steps.len(), cover.alpha);
    let _ = writeln!(r, "cover max diameter: {}", cover.max_diameter(&f));
    let _ = writeln!(
        r,
        "cover coverage ({PROBE}x{PROBE} probes): {}",
        match &coverage {
            Ok(()) => "ok".to_string(),
            Err(e) => e.to_string(),
        }
    );
    let _ = writeln!(
        r,
        "cover fibers: {} checked of {}, {} stable and {} unstable violations",
        cover_fibers.checked, cover_fibers.samples, cover_fibers.stable_violations, cover_fibers.unstable_violations
    );
    let _ = writeln!(
        r,
        "cover shadows: {} orbits, {} outside their rectangle, max beta {:.6e}",
        shadows.orbits, shadows.outside, shadows.max_beta
    );
    let _ = writeln!(r, "cells: {}", p.len());
    let _ = writeln!(r, "dropped faces: {}", p.dropped);
    let _ = writeln!(r, "max diameter: {}", p.diameter);
    let _ = writeln!(r, "area sum: {}", validity.area_sum);
    let _ = writeln!(r, "overlap area: {} ({} pairs)", validity.overlap_area, validity.overlapping_pairs);
    let _ = writeln!(r, "improper cells: {}", validity.improper);
    let _ = writeln!(r, "uncovered probes: {} of {}", validity.uncovered, validity.probes);
    let _ = writeln!(
        r,
        "markov: {} pairs, {} samples, {} violations",
        markov.pairs, markov.samples, markov.violations
    );
    let _ = writeln!(
        r,
        "boundary: {} stable faces ({} failures), {} unstable faces ({} failures)",
        markov.stable_faces, markov.stable_face_failures, markov.unstable_faces, markov.unstable_face_failures
    );
    let _ = writeln!(r, "forward cylinders: {} ({} failures)", markov.cylinders, markov.cylinder_failures);
    let _ = writeln!(r, "transitions: {}", a.nnz());
    match &perron {
        Ok(l) => {
            let _ = writeln!(r, "perron eigenvalue: {l}");
        }
        Err(e) => {
            let _ = writeln!(r, "perron eigenvalue: {e}");
        }
    }
    let _ = writeln!(r, "semiconjugacy residual (depth {depth}): {residual:.6e}");
    let _ = writeln!(
        r,
        "round trip: {} checked, {} boundary hits, {} failures, max error {:.6e}",
        round_trip.checked, round_trip.boundary_hits, round_trip.failures, round_trip.max_error
    );
    let _ = writeln!(r, "status: {}", if passed { "ok" } else { "FAILED" });

    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let write = |name: &str, body: &str| -> Result<(), CliError> {
        let path = cfg.out.join(name);
        fs::write(&path, body).map_err(io_err(&path))
    };
    let json = serde_json::to_string(&file).map_err(|e| CliError::Malformed(e.to_string()))?;
    write("partition.json", &(json + "\n"))?;
    write("matrix.csv", &a.to_csv())?;
    write("report.txt", &r)?;
    if cfg.svg {
        write("partition.svg", &svg::render(&f, &p))?;
    }
    Ok(Outcome { passed, text: r })
}

/// Re-check a saved partition.
pub fn cmd_verify(path: &Path, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    let (f, file, p) = load_partition(path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let validity = validate_partition(&f, &p, PROBE);
    let markov = verify_markov(&f, &p, samples, &mut rng);
    // the cover was built at half the requested beta
    let passed = validity.ok(2.0 * file.cover.beta) && markov.ok();
    let mut r = String::new();
    let _ = writeln!(r, "cells: {}", p.len());
    let _ = writeln!(r, "max diameter: {}", p.diameter);
    let _ = writeln!(r, "area sum: {}", validity.area_sum);
    let _ = writeln!(r, "overlap area: {}", validity.overlap_area);
    let _ = writeln!(r, "improper cells: {}", validity.improper);
    let _ = writeln!(r, "uncovered probes: {} of {}", validity.uncovered, validity.probes);
    let _ = writeln!(r, "markov: {} pairs, {} samples, {} violations", markov.pairs, markov.samples, markov.violations);
    for v in &markov.examples {
        let _ = writeln!(r, "  violation: cell {} -> {} at ({}, {}), {:?} side", v.i + 1, v.j + 1, v.x[0], v.x[1], v.side);
    }
    let _ = writeln!(
        r,
        "boundary: {} stable face failures, {} unstable face failures",
        markov.stable_face_failures, markov.unstable_face_failures
    );
    let _ = writeln!(r, "forward cylinders: {} ({} failures)", markov.cylinders, markov.cylinder_failures);
    let _ = writeln!(r, "status: {}", if passed { "ok" } else { "FAILED" });
    Ok(Outcome { passed, text: r })
}

/// Itinerary of a point, or its boundary hit and optionally every code.
pub fn cmd_code(path: &Path, point: &TorusPoint, depth: usize, every: bool) -> Result<String, CliError> {
    let (f, _, p) = load_partition(path)?;
    let mut r = String::new();
    match encode(&f, &p, point, depth) {
        Coding::Word(w) => {
            let k = cylinder(&f, &p, &w).map_err(|e| CliError::Verification(e.to_string()))?;
            let c = k.rect.center(&f);
            let _ = writeln!(r, "word: {}", format_word(&w.word));
            let _ = writeln!(r, "cylinder center: {} {}", c.x(), c.y());
            let _ = writeln!(r, "cylinder diameter: {:.6e}", k.diameter);
        }
        Coding::BoundaryHit { index, candidates } => {
            let _ = writeln!(r, "boundary hit at step {index}: cells {}", format_word(&candidates));
            if every {
                let a = transition_matrix(&f, &p);
                for w in all_codes(&f, &p, &a, point, depth, 64) {
                    let _ = writeln!(r, "word: {}", format_word(&w.word));
                }
            }
        }
    }
    Ok(r)
}

/// π of a finite window: the cylinder centre and radius.
pub fn cmd_decode(path: &Path, word: &[usize], matrix_file: Option<&Path>) -> Result<String, CliError> {
    let (f, _, p) = load_partition(path)?;
    let a = match matrix_file {
        Some(m) => {
            let text = fs::read_to_string(m).map_err(io_err(m))?;
            TransitionMatrix::from_csv(&text).map_err(|e| CliError::Malformed(format!("{}: {e}", m.display())))?
        }
        None => transition_matrix(&f, &p),
    };
    if a.len() != p.len() {
        return Err(CliError::Malformed(format!("matrix has {} rows but the partition has {} cells", a.len(), p.len())));
    }
    let w = ItineraryWindow::new(&a, word.to_vec()).map_err(|e| CliError::Malformed(e.to_string()))?;
    let k = cylinder(&f, &p, &w).map_err(|e| CliError::Verification(e.to_string()))?;
    let c = k.rect.center(&f);
    let mut r = String::new();
    let _ = writeln!(r, "point: {} {}", c.x(), c.y());
    let _ = writeln!(r, "radius: {:.6e}", 0.5 * k.diameter);
    Ok(r)
}

/// Shadow a pseudo-orbit read from a points file.
pub fn cmd_shadow(input: &Path, matrix: [[i64; 2]; 2]) -> Result<Outcome, CliError> {
    let f = automorphism(matrix)?;
    let text = fs::read_to_string(input).map_err(io_err(input))?;
    let points = parse_points(&text).map_err(|e| CliError::Malformed(e.to_string()))?;
    let q = PseudoOrbit::new(&f, points).map_err(|e| CliError::Malformed(e.to_string()))?;
    let s = shadow(&f, &q).map_err(|e| CliError::Malformed(e.to_string()))?;
    let passed = verify_shadow(&f, &q, &s.point, s.beta_certified);
    let mut r = String::new();
    let _ = writeln!(r, "point: {} {}", s.point.x(), s.point.y());
    let _ = writeln!(r, "delta: {:.6e}", q.delta);
    let _ = writeln!(r, "beta: {:.6e}", s.beta_certified);
    let _ = writeln!(r, "tail: {:.6e}", s.tail_bound);
    let _ = writeln!(r, "verified: {passed}");
    Ok(Outcome { passed, text: r })
}
