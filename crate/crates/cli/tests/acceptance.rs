//! Acceptance run for the cat map. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails. Tolerances are pinned below.
//!
//! Reference quantities (eigenvalues, eigenvectors, exact orbits, distances)
//! are recomputed here from the integer matrix rather than taken from the
//! library.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toral_markov::partition_builder::{build_cover_at, build_partition, polygons, validate_partition, verify_markov};
use toral_markov::shadowing::random_pseudo_orbit;
use toral_markov::symbolic::{
    cylinder, encode, perron_eigenvalue, pi_point, random_admissible_word, semiconjugacy_residual,
    transition_matrix, Coding,
};
use toral_markov::{
    bracket, make_automorphism, make_budget, shadow, Cell, MarkovPartition, PseudoOrbit, ToralAutomorphism,
    TorusPoint,
};
use toral_markov_cli::{cmd_build, RunConfig};

const CAT: [[i64; 2]; 2] = [[2, 1], [1, 1]];

const SHADOW_ORBITS: usize = 200;
const SHADOW_DELTA: f64 = 1e-3;
const SHADOW_N: usize = 50;
const SHADOW_BOUND: f64 = 1.62e-3;

const BRACKET_PAIRS: usize = 1000;
const BRACKET_TOL: f64 = 1e-12;

const BETA: f64 = 0.1;
const AREA_TOL: f64 = 1e-9;
const MARKOV_SAMPLES: usize = 100;

const DECAY_WORDS: usize = 100;
const DECAY_RANGE: std::ops::RangeInclusive<usize> = 5..=15;

const SEMICONJ_WORDS: usize = 100;
const SEMICONJ_N: usize = 15;
const SEMICONJ_TOL: f64 = 1e-6;
const ROUND_TRIP_POINTS: usize = 1000;

const PERRON_TARGET: f64 = 2.6180339887;
const PERRON_TOL: f64 = 1e-3;

const TWO_128: f64 = 340282366920938463463374607431768211456.0;

/// Eigenvalues and eigenvectors of the integer matrix, in plain f64.
struct Reference {
    m: [[i64; 2]; 2],
    lu: f64,
    ls: f64,
    eu: [f64; 2],
    es: [f64; 2],
}

impl Reference {
    fn new(m: [[i64; 2]; 2]) -> Self {
        let tr = (m[0][0] + m[1][1]) as f64;
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) as f64;
        let root = (tr * tr - 4.0 * det).sqrt();
        let lu = if tr >= 0.0 { (tr + root) / 2.0 } else { (tr - root) / 2.0 };
        let ls = det / lu;
        let vec = |l: f64| {
            let v = [m[0][1] as f64, l - m[0][0] as f64];
            let n = v[0].hypot(v[1]);
            [v[0] / n, v[1] / n]
        };
        Reference { m, lu, ls, eu: vec(lu), es: vec(ls) }
    }

    /// Coefficients (a, b) with v = a·eu + b·es.
    fn split(&self, v: [f64; 2]) -> (f64, f64) {
        let d = self.eu[0] * self.es[1] - self.es[0] * self.eu[1];
        ((v[0] * self.es[1] - v[1] * self.es[0]) / d, (self.eu[0] * v[1] - self.eu[1] * v[0]) / d)
    }

    /// Exact image on the 128-bit fixed-point torus.
    fn step(&self, p: &TorusPoint) -> TorusPoint {
        let (x, y) = p.raw();
        let c = |k: i64| k as i128 as u128;
        TorusPoint::from_raw(
            c(self.m[0][0]).wrapping_mul(x).wrapping_add(c(self.m[0][1]).wrapping_mul(y)),
            c(self.m[1][0]).wrapping_mul(x).wrapping_add(c(self.m[1][1]).wrapping_mul(y)),
        )
    }
}

/// Nearest lift of q − p.
fn lift(p: &TorusPoint, q: &TorusPoint) -> [f64; 2] {
    let (px, py) = p.raw();
    let (qx, qy) = q.raw();
    [qx.wrapping_sub(px) as i128 as f64 / TWO_128, qy.wrapping_sub(py) as i128 as f64 / TWO_128]
}

fn dist(p: &TorusPoint, q: &TorusPoint) -> f64 {
    let v = lift(p, q);
    v[0].hypot(v[1])
}

struct Line {
    ok: bool,
    text: String,
}

fn line(ok: bool, text: String) -> Line {
    Line { ok, text }
}

fn shadowing(f: &ToralAutomorphism, r: &Reference, rng: &mut ChaCha8Rng) -> Line {
    let inv = Reference::new(inverse(r.m));
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..SHADOW_ORBITS {
        let start = TorusPoint::new(rng.random(), rng.random());
        let q = PseudoOrbit::new(f, random_pseudo_orbit(f, start, SHADOW_N, SHADOW_DELTA, rng)).unwrap();
        let Ok(res) = shadow(f, &q) else {
            failures += 1;
            continue;
        };
        let mut x = res.point;
        let mut back = Vec::new();
        let mut y = res.point;
        for _ in 0..SHADOW_N {
            y = inv.step(&y);
            back.push(y);
        }
        let mut orbit_worst: f64 = 0.0;
        for n in 0..=SHADOW_N {
            orbit_worst = orbit_worst.max(dist(&x, q.at(n as i64)));
            x = r.step(&x);
        }
        for (k, y) in back.iter().enumerate() {
            orbit_worst = orbit_worst.max(dist(y, q.at(-(k as i64) - 1)));
        }
        if orbit_worst > SHADOW_BOUND {
            failures += 1;
        }
        worst = worst.max(orbit_worst);
    }
    line(
        failures == 0,
        format!(
            "shadowing: {SHADOW_ORBITS} orbits, delta {SHADOW_DELTA:e}, N {SHADOW_N}: max distance {worst:.4e} (bound {SHADOW_BOUND:e}), {failures} failures"
        ),
    )
}

/// Inverse of a unimodular matrix.
fn inverse(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] * det, -m[0][1] * det], [-m[1][0] * det, m[0][0] * det]]
}

fn brackets(f: &ToralAutomorphism, r: &Reference, rng: &mut ChaCha8Rng) -> Line {
    let budget = make_budget(f, 0.00625).unwrap();
    let (mut diag, mut stable, mut unstable, mut equi) = (0usize, 0.0f64, 0.0f64, 0.0f64);
    let mut equi_pairs = 0;
    for _ in 0..BRACKET_PAIRS {
        let x = TorusPoint::new(rng.random(), rng.random());
        let len = 0.99 * budget.delta * rng.random::<f64>().sqrt();
        let th = std::f64::consts::TAU * rng.random::<f64>();
        let y = x.translate([len * th.cos(), len * th.sin()]);
        if bracket(f, &budget, &x, &x).unwrap() != x {
            diag += 1;
        }
        let z = bracket(f, &budget, &x, &y).unwrap();
        // z − x is along e_s, z − y along e_u
        stable = stable.max(r.split(lift(&x, &z)).0.abs());
        unstable = unstable.max(r.split(lift(&y, &z)).1.abs());
        // [fx, fy] is only defined when the images are still δ-close
        let (fx, fy) = (r.step(&x), r.step(&y));
        if dist(&fx, &fy) < budget.delta {
            equi_pairs += 1;
            equi = equi.max(dist(&r.step(&z), &bracket(f, &budget, &fx, &fy).unwrap()));
        }
    }
    let ok = diag == 0 && equi_pairs > 0 && stable <= BRACKET_TOL && unstable <= BRACKET_TOL && equi <= BRACKET_TOL;
    line(
        ok,
        format!(
            "bracket: {BRACKET_PAIRS} pairs: [x,x]!=x {diag}, stable residual {stable:.2e}, unstable residual {unstable:.2e}, equivariance {equi:.2e} over {equi_pairs} pairs with δ-close images (tol {BRACKET_TOL:e})"
        ),
    )
}

fn shoelace(c: &[[f64; 2]; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let (a, b) = (c[i], c[(i + 1) % 4]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s.abs()
}

fn validity(f: &ToralAutomorphism, p: &MarkovPartition) -> Line {
    let rep = validate_partition(f, p, 500);
    // area and diameter again from the drawn parallelograms
    let mut area = 0.0;
    let mut diam: f64 = 0.0;
    let mut last = usize::MAX;
    for (k, c) in polygons(f, p) {
        if k == last {
            continue;
        }
        last = k;
        area += shoelace(&c);
        for a in &c {
            for b in &c {
                diam = diam.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
    }
    let ok = (area - 1.0).abs() <= AREA_TOL
        && (rep.area_sum - 1.0).abs() <= AREA_TOL
        && rep.overlap_area == 0.0
        && rep.improper == 0
        && rep.uncovered == 0
        && diam < BETA;
    line(
        ok,
        format!(
            "validity: {} cells, area {:.12} (polygons {:.12}), overlap {}, improper {}, uncovered {} of {}, max diameter {:.5} < {BETA}",
            rep.cells, rep.area_sum, area, rep.overlap_area, rep.improper, rep.uncovered, rep.probes, diam
        ),
    )
}

fn markov(f: &ToralAutomorphism, p: &MarkovPartition, rng: &mut ChaCha8Rng) -> (Line, Line) {
    let rep = verify_markov(f, p, MARKOV_SAMPLES, rng);
    let mut cells: Vec<Cell> = p.cells.clone();
    let k = cells.len() / 2;
    let r = &mut cells[k].rect;
    r.is.hi -= 0.3 * r.is.width();
    let bad = MarkovPartition::new(f, cells);
    let control = verify_markov(f, &bad, MARKOV_SAMPLES, rng);
    let ok = rep.violations == 0 && rep.cylinder_failures == 0 && control.violations >= 1;
    let markov = line(
        ok,
        format!(
            "markov: {} pairs, {} samples, {} violations; perturbed cell: {} violations",
            rep.pairs, rep.samples, rep.violations, control.violations
        ),
    );
    let faces = rep.stable_face_failures == 0 && rep.unstable_face_failures == 0;
    let boundary = line(
        faces,
        format!(
            "boundary: {} stable faces ({} failures), {} unstable faces ({} failures)",
            rep.stable_faces, rep.stable_face_failures, rep.unstable_faces, rep.unstable_face_failures
        ),
    );
    (markov, boundary)
}

fn decay(f: &ToralAutomorphism, p: &MarkovPartition, r: &Reference, rng: &mut ChaCha8Rng) -> Line {
    let a = transition_matrix(f, p);
    let rate = r.ls.abs().max(1.0 / r.lu.abs());
    let n_max = *DECAY_RANGE.end();
    let (mut empty, mut over, mut outside) = (0, 0, 0);
    let mut log_ratio = 0.0;
    let mut ratios = 0usize;
    for _ in 0..DECAY_WORDS {
        let w = random_admissible_word(&a, n_max, rng);
        let mut prev: Option<f64> = None;
        for n in DECAY_RANGE {
            let k = match cylinder(f, p, &w.truncated(n)) {
                Ok(k) => k,
                Err(_) => {
                    empty += 1;
                    continue;
                }
            };
            if k.diameter > p.diameter * rate.powi(n as i32 - 1) * 2.0 {
                over += 1;
            }
            // the centre of K_N visits R_{a_j} for |j| ≤ N
            let c = k.rect.center(f);
            let mut y = c;
            for j in 0..=n as i64 {
                if !p.rect(w.at(j)).contains(f, &y) {
                    outside += 1;
                }
                y = r.step(&y);
            }
            if let Some(d) = prev {
                log_ratio += (k.diameter / d).ln();
                ratios += 1;
            }
            prev = Some(k.diameter);
        }
    }
    let measured = (log_ratio / ratios.max(1) as f64).exp();
    line(
        empty == 0 && over == 0 && outside == 0,
        format!(
            "cylinder decay: {DECAY_WORDS} words, N {}..{}: {empty} empty, {over} above bound, {outside} centre misses; mean ratio {measured:.4} vs rate {rate:.4}",
            DECAY_RANGE.start(),
            n_max
        ),
    )
}

fn semiconjugacy(f: &ToralAutomorphism, p: &MarkovPartition, rng: &mut ChaCha8Rng) -> Line {
    let a = transition_matrix(f, p);
    let mut residual: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..SEMICONJ_WORDS {
        let w = random_admissible_word(&a, SEMICONJ_N, rng);
        match semiconjugacy_residual(f, p, &w) {
            Ok(d) => residual = residual.max(d),
            Err(_) => errors += 1,
        }
    }
    let (mut hits, mut failures) = (0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..ROUND_TRIP_POINTS {
        let x = TorusPoint::new(rng.random(), rng.random());
        let Coding::Word(w) = encode(f, p, &x, SEMICONJ_N) else {
            hits += 1;
            continue;
        };
        match pi_point(f, p, &w) {
            Ok((c, radius)) => {
                let e = dist(&x, &c);
                worst = worst.max(e);
                if e > 2.0 * radius {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    line(
        errors == 0 && residual <= SEMICONJ_TOL && failures == 0,
        format!(
            "semiconjugacy: {SEMICONJ_WORDS} words, N {SEMICONJ_N}: residual {residual:.3e} (tol {SEMICONJ_TOL:e}), {errors} errors; round trip {ROUND_TRIP_POINTS} points: {hits} boundary hits, {failures} beyond diam K_N, max error {worst:.3e}"
        ),
    )
}

fn spectral(f: &ToralAutomorphism, p: &MarkovPartition, r: &Reference) -> Line {
    let a = transition_matrix(f, p);
    match perron_eigenvalue(&a) {
        Ok(l) => line(
            (l - r.lu).abs() <= PERRON_TOL && (r.lu - PERRON_TARGET).abs() <= 1e-9,
            format!("perron: {l:.12} vs lambda_u {:.12}, difference {:.2e} (tol {PERRON_TOL:e})", r.lu, (l - r.lu).abs()),
        ),
        Err(e) => line(false, format!("perron: {e}")),
    }
}

fn determinism() -> Line {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let cfg = RunConfig { seed: 42, out: d.path().to_path_buf(), ..RunConfig::default() };
        if let Err(e) = cmd_build(&cfg) {
            return line(false, format!("determinism: build failed: {e}"));
        }
    }
    let mut differing = Vec::new();
    for name in ["partition.json", "matrix.csv", "report.txt"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        if a != b {
            differing.push(name);
        }
    }
    line(
        differing.is_empty(),
        format!("determinism: two builds with seed 42, differing files: {differing:?}"),
    )
}

fn main() -> ExitCode {
    let f = make_automorphism(CAT).unwrap();
    let r = Reference::new(CAT);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut lines: Vec<(usize, Line)> = Vec::new();
    let run = |k: usize, lines: &mut Vec<(usize, Line)>, g: &mut dyn FnMut() -> Line| {
        let t = Instant::now();
        let l = g();
        let secs = t.elapsed().as_secs_f64();
        println!("[{}] {k}. {} ({secs:.1}s)", if l.ok { "PASS" } else { "FAIL" }, l.text);
        lines.push((k, l));
    };

    run(1, &mut lines, &mut || shadowing(&f, &r, &mut rng));
    run(2, &mut lines, &mut || brackets(&f, &r, &mut rng));

    let t = Instant::now();
    let p = build_partition(&f, &build_cover_at(&f, BETA / 2.0).unwrap());
    println!("built partition at beta {BETA}: {} cells in {:.1}s", p.len(), t.elapsed().as_secs_f64());

    run(3, &mut lines, &mut || validity(&f, &p));
    // criteria 4 and 5 share one verification pass
    let t = Instant::now();
    let (m, b) = markov(&f, &p, &mut rng);
    let secs = t.elapsed().as_secs_f64();
    for (k, l) in [(4, m), (5, b)] {
        println!("[{}] {k}. {} ({secs:.1}s)", if l.ok { "PASS" } else { "FAIL" }, l.text);
        lines.push((k, l));
    }
    run(6, &mut lines, &mut || decay(&f, &p, &r, &mut rng));
    run(7, &mut lines, &mut || semiconjugacy(&f, &p, &mut rng));
    run(8, &mut lines, &mut || spectral(&f, &p, &r));
    run(9, &mut lines, &mut determinism);

    let failed: Vec<usize> = lines.iter().filter(|(_, l)| !l.ok).map(|(k, _)| *k).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", lines.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
