//! Checks of the partition: validity, fiber inclusions, boundary invariance.

use rand::Rng;
use serde::Serialize;

use super::MarkovPartition;
use crate::local_product::Direction;
use crate::rectangles::{image_rectangle, Interval, Rectangle, TOL};
use crate::symbolic::forward_cylinder;
use crate::torus_model::{apply, apply_inverse, ToralAutomorphism, TorusPoint};

/// For each cell i, the cells j with int f(R_i) ∩ int R_j ≠ ∅, sorted.
pub fn admissible_pairs(f: &ToralAutomorphism, p: &MarkovPartition) -> Vec<Vec<u32>> {
    p.rects()
        .iter()
        .map(|r| {
            let img = image_rectangle(f, r);
            p.overlapping(f, &img).into_iter().map(|(k, _)| k as u32).collect()
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidityReport {
    pub cells: usize,
    pub area_sum: f64,
    pub overlap_area: f64,
    pub overlapping_pairs: usize,
    pub improper: usize,
    pub max_diameter: f64,
    pub probes: usize,
    pub uncovered: usize,
}

impl ValidityReport {
    pub fn ok(&self, max_diameter: f64) -> bool {
        (self.area_sum - 1.0).abs() <= 1e-9
            && self.overlap_area == 0.0
            && self.improper == 0
            && self.max_diameter < max_diameter
            && self.uncovered == 0
    }
}

/// Area sum, pairwise interior overlaps, properness, diameter, and coverage
/// of a probe×probe grid.
pub fn validate_partition(f: &ToralAutomorphism, p: &MarkovPartition, probe: usize) -> ValidityReport {
    let mut rep = ValidityReport {
        cells: p.len(),
        area_sum: p.total_area(f),
        max_diameter: p.diameter,
        probes: probe * probe,
        ..Default::default()
    };
    for (i, r) in p.rects().iter().enumerate() {
        if !r.is_proper() {
            rep.improper += 1;
        }
        for (k, c) in p.overlapping(f, r) {
            if k > i {
                rep.overlapping_pairs += 1;
                rep.overlap_area += Rectangle::new(r.base, c.iu.intersect(&r.iu), c.is.intersect(&r.is)).area(f);
            }
        }
    }
    for a in 0..probe {
        for b in 0..probe {
            let x = TorusPoint::new((a as f64 + 0.5) / probe as f64, (b as f64 + 0.5) / probe as f64);
            if p.locate(f, &x).is_empty() {
                rep.uncovered += 1;
            }
        }
    }
    rep
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub x: [f64; 2],
    pub side: Direction,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MarkovReport {
    pub pairs: usize,
    pub samples: usize,
    pub violations: usize,
    /// The first few violations found.
    pub examples: Vec<Violation>,
    pub stable_faces: usize,
    pub stable_face_failures: usize,
    pub unstable_faces: usize,
    pub unstable_face_failures: usize,
    pub cylinders: usize,
    pub cylinder_failures: usize,
}

impl MarkovReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
            && self.stable_face_failures == 0
            && self.unstable_face_failures == 0
            && self.cylinder_failures == 0
    }
}

const KEPT_EXAMPLES: usize = 16;

/// Sampled fiber inclusions for every admissible pair, boundary invariance
/// of every face, and forward cylinders from `samples` random cells.
pub fn verify_markov<R: Rng + ?Sized>(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    samples: usize,
    rng: &mut R,
) -> MarkovReport {
    let mut rep = MarkovReport::default();
    let pairs = admissible_pairs(f, p);
    for (i, row) in pairs.iter().enumerate() {
        let ri = p.rect(i);
        for &j in row {
            let j = j as usize;
            rep.pairs += 1;
            check_pair(f, p, ri, i, j, samples, rng, &mut rep);
        }
    }
    boundary_invariance(f, p, &mut rep);
    forward_cylinders(f, p, &pairs, samples, rng, &mut rep);
    rep
}

#[allow(clippy::too_many_arguments)]
fn check_pair<R: Rng + ?Sized>(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    ri: &Rectangle,
    i: usize,
    j: usize,
    samples: usize,
    rng: &mut R,
    rep: &mut MarkovReport,
) {
    let rj = p.rect(j);
    // f(R_i) ∩ R_j in the chart of R_j
    let img = image_rectangle(f, ri).rebase(f, &rj.base);
    let (iu, is) = (img.iu.intersect(&rj.iu), img.is.intersect(&rj.is));
    let mut points: Vec<(f64, f64)> = vec![(iu.lo, is.lo), (iu.lo, is.hi), (iu.hi, is.lo), (iu.hi, is.hi)];
    for _ in 0..samples {
        points.push((rng.random_range(iu.lo..=iu.hi), rng.random_range(is.lo..=is.hi)));
    }
    for (u, s) in points {
        let y = rj.point(f, u, s);
        let x = apply_inverse(f, &y);
        rep.samples += 1;
        let side = match (ri.stable_fiber(f, &x), ri.unstable_fiber(f, &x)) {
            (Ok(ws), Ok(wu)) => {
                let vs = rj.stable_fiber(f, &y).expect("sample lies in R_j");
                let vu = rj.unstable_fiber(f, &y).expect("sample lies in R_j");
                if !ws.image(f).within(f, &vs, TOL) {
                    Some(Direction::Stable)
                } else if !vu.within(f, &wu.image(f), TOL) {
                    Some(Direction::Unstable)
                } else {
                    None
                }
            }
            _ => Some(Direction::Stable),
        };
        if let Some(side) = side {
            rep.violations += 1;
            if rep.examples.len() < KEPT_EXAMPLES {
                rep.examples.push(Violation { i, j, x: x.coords(), side });
            }
        }
    }
}

/// Whether the segment {base ⊕ c·e_fixed ⊕ t·e_along : t ∈ range} is covered
/// by faces of cells lying on the same line.
fn on_faces(f: &ToralAutomorphism, p: &MarkovPartition, seg: &Rectangle, along: Direction) -> bool {
    let mut pieces: Vec<Interval> = Vec::new();
    for k in p.index.query_rect(f, seg) {
        let c = p.rect(k).rebase(f, &seg.base);
        let (fixed, cell_fixed, range, cell_range) = match along {
            Direction::Stable => (seg.iu.lo, c.iu, seg.is, c.is),
            Direction::Unstable => (seg.is.lo, c.is, seg.iu, c.iu),
        };
        let on_face = (fixed - cell_fixed.lo).abs() <= TOL || (fixed - cell_fixed.hi).abs() <= TOL;
        if on_face {
            let piece = range.intersect(&cell_range);
            if piece.hi >= piece.lo {
                pieces.push(piece);
            }
        }
    }
    let range = match along {
        Direction::Stable => seg.is,
        Direction::Unstable => seg.iu,
    };
    pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut reach = range.lo;
    for q in &pieces {
        if q.lo > reach + TOL {
            return false;
        }
        reach = reach.max(q.hi);
    }
    reach >= range.hi - TOL
}

/// f(∂^s) ⊆ ∂^s and f^{-1}(∂^u) ⊆ ∂^u, face by face. Each face is charted
/// at its own midpoint before mapping.
fn boundary_invariance(f: &ToralAutomorphism, p: &MarkovPartition, rep: &mut MarkovReport) {
    for r in p.rects() {
        let (mu, ms) = (r.iu.mid(), r.is.mid());
        for u in [r.iu.lo, r.iu.hi] {
            let base = apply(f, &r.point(f, u, ms));
            let seg = Rectangle::new(base, Interval::point(0.0), r.is.shift(-ms).scale(f.lambda_s).closure());
            rep.stable_faces += 1;
            if !on_faces(f, p, &seg, Direction::Stable) {
                rep.stable_face_failures += 1;
            }
        }
        for s in [r.is.lo, r.is.hi] {
            let base = apply_inverse(f, &r.point(f, mu, s));
            let seg = Rectangle::new(base, r.iu.shift(-mu).scale(1.0 / f.lambda_u).closure(), Interval::point(0.0));
            rep.unstable_faces += 1;
            if !on_faces(f, p, &seg, Direction::Unstable) {
                rep.unstable_face_failures += 1;
            }
        }
    }
}

const CYLINDER_DEPTH: usize = 8;

/// The forward cylinder of a random forward path keeps the full stable
/// extent of its first cell and shrinks in the unstable direction.
fn forward_cylinders<R: Rng + ?Sized>(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    pairs: &[Vec<u32>],
    samples: usize,
    rng: &mut R,
    rep: &mut MarkovReport,
) {
    if p.is_empty() {
        return;
    }
    let widest = p.rects().iter().map(|r| r.iu.width()).fold(0.0, f64::max);
    for _ in 0..samples {
        let mut word = vec![rng.random_range(0..p.len())];
        for _ in 0..CYLINDER_DEPTH {
            let row = &pairs[*word.last().unwrap()];
            if row.is_empty() {
                break;
            }
            word.push(row[rng.random_range(0..row.len())] as usize);
        }
        rep.cylinders += 1;
        let r0 = p.rect(word[0]);
        let ok = match forward_cylinder(f, p, &word) {
            Ok(c) => {
                let n = (word.len() - 1) as i32;
                c.is.approx_eq(&r0.is) && c.iu.width() <= widest * f.lambda_u.abs().powi(-n) + TOL
            }
            Err(_) => false,
        };
        if !ok {
            rep.cylinder_failures += 1;
        }
    }
}
