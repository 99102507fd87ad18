//! Transition matrix, admissible words, cylinders, and the coding map π.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::partition_builder::{admissible_pairs, MarkovPartition};
use crate::rectangles::{image_rectangle, preimage_rectangle, BoxComplex, Rectangle};
use crate::torus_model::{apply, apply_inverse, torus_distance, ToralAutomorphism, TorusPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("symbol {0} is out of range")]
    IndexOutOfRange(usize),
    #[error("transition {0} -> {1} is not allowed")]
    NotAdmissible(usize, usize),
    #[error("a window needs an odd number of symbols, got {0}")]
    BadWindow(usize),
    #[error("cylinder is empty at step {0}")]
    EmptyCylinder(usize),
    #[error("matrix is reducible (power iteration gave {estimate})")]
    Reducible { estimate: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Sparse 0/1 matrix: `rows[i]` lists the j with A_ij = 1, increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub rows: Vec<Vec<u32>>,
}

pub fn transition_matrix(f: &ToralAutomorphism, p: &MarkovPartition) -> TransitionMatrix {
    TransitionMatrix { rows: admissible_pairs(f, p) }
}

impl TransitionMatrix {
    pub fn from_dense(a: &[Vec<u8>]) -> Self {
        TransitionMatrix {
            rows: a
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, _)| j as u32).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&(j as u32)).is_ok()
    }

    /// P A Pᵀ for the relabelling i ↦ perm[i].
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut rows = vec![Vec::new(); self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            let mut r: Vec<u32> = row.iter().map(|&j| perm[j as usize] as u32).collect();
            r.sort_unstable();
            rows[perm[i]] = r;
        }
        TransitionMatrix { rows }
    }

    fn reach(&self, start: usize, forward: bool) -> usize {
        let m = self.len();
        let adj: Vec<Vec<u32>> = if forward {
            self.rows.clone()
        } else {
            let mut t = vec![Vec::new(); m];
            for (i, row) in self.rows.iter().enumerate() {
                for &j in row {
                    t[j as usize].push(i as u32);
                }
            }
            t
        };
        let mut seen = vec![false; m];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j as usize] {
                    seen[j as usize] = true;
                    count += 1;
                    stack.push(j as usize);
                }
            }
        }
        count
    }

    pub fn is_irreducible(&self) -> bool {
        !self.is_empty() && self.reach(0, true) == self.len() && self.reach(0, false) == self.len()
    }

    /// `row,col` header then one 1-based pair per nonzero entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col\n");
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                s.push_str(&format!("{},{}\n", i + 1, j + 1));
            }
        }
        s
    }

    /// Reads the sparse form written by [`to_csv`](Self::to_csv) or dense
    /// rows of comma-separated 0/1 values.
    pub fn from_csv(text: &str) -> Result<Self, SymbolicError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let bad = |line: usize, msg: &str| SymbolicError::Parse { line, msg: msg.to_string() };
        match lines.first() {
            None => Err(bad(1, "empty matrix")),
            Some((_, "row,col")) => {
                let mut entries = Vec::new();
                let mut m = 0;
                for &(k, l) in &lines[1..] {
                    let (a, b) = l.split_once(',').ok_or_else(|| bad(k, "expected row,col"))?;
                    let i: usize = a.trim().parse().map_err(|_| bad(k, "bad row"))?;
                    let j: usize = b.trim().parse().map_err(|_| bad(k, "bad column"))?;
                    if i == 0 || j == 0 {
                        return Err(bad(k, "indices start at 1"));
                    }
                    m = m.max(i).max(j);
                    entries.push((i - 1, j - 1));
                }
                let mut rows = vec![Vec::new(); m];
                for (i, j) in entries {
                    rows[i].push(j as u32);
                }
                for r in &mut rows {
                    r.sort_unstable();
                    r.dedup();
                }
                Ok(TransitionMatrix { rows })
            }
            Some(_) => {
                let mut dense = Vec::new();
                for &(k, l) in &lines {
                    let row: Result<Vec<u8>, _> = l
                        .split(',')
                        .map(|v| match v.trim() {
                            "0" => Ok(0),
                            "1" => Ok(1),
                            _ => Err(bad(k, "entries must be 0 or 1")),
                        })
                        .collect();
                    dense.push(row?);
                }
                if dense.iter().any(|r| r.len() != dense.len()) {
                    return Err(bad(1, "matrix is not square"));
                }
                Ok(TransitionMatrix::from_dense(&dense))
            }
        }
    }
}

pub fn is_admissible(a: &TransitionMatrix, word: &[usize]) -> Result<bool, SymbolicError> {
    if let Some(&bad) = word.iter().find(|&&s| s >= a.len()) {
        return Err(SymbolicError::IndexOutOfRange(bad));
    }
    Ok(word.windows(2).all(|w| a.get(w[0], w[1])))
}

/// a_{−N}..a_N, stored from a_{−N}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItineraryWindow {
    pub half_width: usize,
    pub word: Vec<usize>,
}

impl ItineraryWindow {
    pub fn new(a: &TransitionMatrix, word: Vec<usize>) -> Result<Self, SymbolicError> {
        if word.len().is_multiple_of(2) {
            return Err(SymbolicError::BadWindow(word.len()));
        }
        is_admissible(a, &word)?;
        if let Some(w) = word.windows(2).find(|w| !a.get(w[0], w[1])) {
            return Err(SymbolicError::NotAdmissible(w[0], w[1]));
        }
        Ok(ItineraryWindow { half_width: word.len() / 2, word })
    }

    /// a_j for −N ≤ j ≤ N.
    pub fn at(&self, j: i64) -> usize {
        self.word[(j + self.half_width as i64) as usize]
    }

    /// The window of σa: centred at a_1, one shorter on each side.
    pub fn shifted(&self) -> ItineraryWindow {
        assert!(self.half_width >= 1);
        ItineraryWindow { half_width: self.half_width - 1, word: self.word[2..].to_vec() }
    }

    pub fn truncated(&self, m: usize) -> ItineraryWindow {
        let n = self.half_width;
        assert!(m <= n);
        ItineraryWindow { half_width: m, word: self.word[n - m..=n + m].to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Coding {
    Word(ItineraryWindow),
    /// f^index(x) lies on the boundary of the partition (or on no cell).
    BoundaryHit { index: i64, candidates: Vec<usize> },
}

fn orbit(f: &ToralAutomorphism, x: &TorusPoint, n: usize) -> Vec<TorusPoint> {
    let mut fwd = vec![*x];
    let mut back = Vec::new();
    let (mut a, mut b) = (*x, *x);
    for _ in 0..n {
        a = apply(f, &a);
        b = apply_inverse(f, &b);
        fwd.push(a);
        back.push(b);
    }
    back.reverse();
    back.extend(fwd);
    back
}

/// Itinerary of x over |j| ≤ n. Positions are tried in the order
/// 0, 1, −1, 2, −2, ... so a hit at 0 is reported first.
pub fn encode(f: &ToralAutomorphism, p: &MarkovPartition, x: &TorusPoint, n: usize) -> Coding {
    let pts = orbit(f, x, n);
    let mut word = vec![0; 2 * n + 1];
    let order = std::iter::once(0i64).chain((1..=n as i64).flat_map(|k| [k, -k]));
    for j in order {
        let y = &pts[(j + n as i64) as usize];
        match p.locate_interior(f, y) {
            Some(c) => word[(j + n as i64) as usize] = c,
            None => return Coding::BoundaryHit { index: j, candidates: p.locate(f, y) },
        }
    }
    Coding::Word(ItineraryWindow { half_width: n, word })
}

/// Every admissible word whose j-th letter is a cell containing f^j(x), up
/// to `limit` words.
pub fn all_codes(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    a: &TransitionMatrix,
    x: &TorusPoint,
    n: usize,
    limit: usize,
) -> Vec<ItineraryWindow> {
    let cands: Vec<Vec<usize>> = orbit(f, x, n).iter().map(|y| p.locate(f, y)).collect();
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(cands.len());
    fn dfs(
        cands: &[Vec<usize>],
        a: &TransitionMatrix,
        word: &mut Vec<usize>,
        out: &mut Vec<ItineraryWindow>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if word.len() == cands.len() {
            out.push(ItineraryWindow { half_width: word.len() / 2, word: word.clone() });
            return;
        }
        for &c in &cands[word.len()] {
            if word.last().is_none_or(|&prev| a.get(prev, c)) {
                word.push(c);
                dfs(cands, a, word, out, limit);
                word.pop();
            }
        }
    }
    dfs(&cands, a, &mut word, &mut out, limit);
    out
}

fn clip(r: &Rectangle, cell: &Rectangle, step: usize) -> Result<Rectangle, SymbolicError> {
    let iu = cell.iu.intersect(&r.iu);
    let is = cell.is.intersect(&r.is);
    if iu.is_empty() || is.is_empty() {
        return Err(SymbolicError::EmptyCylinder(step));
    }
    Ok(Rectangle::new(cell.base, iu, is))
}

/// ∩_{k=0..n} f^{-k} R_{w_k}, in the chart of R_{w_0}.
pub fn forward_cylinder(f: &ToralAutomorphism, p: &MarkovPartition, word: &[usize]) -> Result<Rectangle, SymbolicError> {
    let last = word.len() - 1;
    let mut c = *p.rect(word[last]);
    for k in (0..last).rev() {
        let pre = preimage_rectangle(f, &c);
        let cell = p.rect(word[k]);
        c = clip(&pre.rebase(f, &cell.base), cell, k)?;
    }
    Ok(c)
}

/// ∩_{k=0..n} f^{k} R_{w_{n−k}}, in the chart of R_{w_n}.
pub fn backward_cylinder(f: &ToralAutomorphism, p: &MarkovPartition, word: &[usize]) -> Result<Rectangle, SymbolicError> {
    let mut c = *p.rect(word[0]);
    for (k, &w) in word.iter().enumerate().skip(1) {
        let img = image_rectangle(f, &c);
        let cell = p.rect(w);
        c = clip(&img.rebase(f, &cell.base), cell, k)?;
    }
    Ok(c)
}

/// K_N(a) with its diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderIntersection {
    pub word: ItineraryWindow,
    pub rect: Rectangle,
    pub diameter: f64,
}

impl CylinderIntersection {
    pub fn box_complex(&self) -> BoxComplex {
        BoxComplex::from_rect(&self.rect)
    }
}

pub fn cylinder(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    word: &ItineraryWindow,
) -> Result<CylinderIntersection, SymbolicError> {
    if let Some(&bad) = word.word.iter().find(|&&s| s >= p.len()) {
        return Err(SymbolicError::IndexOutOfRange(bad));
    }
    let n = word.half_width;
    let fwd = forward_cylinder(f, p, &word.word[n..])?;
    let back = backward_cylinder(f, p, &word.word[..=n])?;
    let rect = clip(&back, &fwd, 0)?;
    let diameter = rect.diameter(f);
    Ok(CylinderIntersection { word: word.clone(), rect, diameter })
}

/// Centre of K_N(a) and the radius diam K_N / 2.
pub fn pi_point(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    word: &ItineraryWindow,
) -> Result<(TorusPoint, f64), SymbolicError> {
    let k = cylinder(f, p, word)?;
    Ok((k.rect.center(f), 0.5 * k.diameter))
}

/// dist(π(σa), f(π(a))).
pub fn semiconjugacy_residual(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    word: &ItineraryWindow,
) -> Result<f64, SymbolicError> {
    let (x, _) = pi_point(f, p, word)?;
    let (y, _) = pi_point(f, p, &word.shifted())?;
    Ok(torus_distance(&y, &apply(f, &x)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub samples: usize,
    pub checked: usize,
    pub boundary_hits: usize,
    pub failures: usize,
    pub max_error: f64,
    pub max_diameter: f64,
}

/// Round trip x ↦ encode ↦ π for random x whose orbit window avoids the
/// boundary.
pub fn injectivity_check<R: Rng + ?Sized>(
    f: &ToralAutomorphism,
    p: &MarkovPartition,
    samples: usize,
    n: usize,
    rng: &mut R,
) -> InjectivityReport {
    let mut rep = InjectivityReport { samples, ..Default::default() };
    for _ in 0..samples {
        let x = TorusPoint::new(rng.random(), rng.random());
        let Coding::Word(w) = encode(f, p, &x, n) else {
            rep.boundary_hits += 1;
            continue;
        };
        rep.checked += 1;
        match cylinder(f, p, &w) {
            Ok(k) => {
                let err = torus_distance(&x, &k.rect.center(f));
                rep.max_error = rep.max_error.max(err);
                rep.max_diameter = rep.max_diameter.max(k.diameter);
                if err > k.diameter || !k.rect.contains(f, &x) {
                    rep.failures += 1;
                }
            }
            Err(_) => rep.failures += 1,
        }
    }
    rep
}

/// Dominant eigenvalue by power iteration on A + I.
pub fn perron_eigenvalue(a: &TransitionMatrix) -> Result<f64, SymbolicError> {
    let m = a.len();
    if m == 0 {
        return Err(SymbolicError::Reducible { estimate: 0.0 });
    }
    let mut v = vec![1.0 / m as f64; m];
    let mut w = vec![0.0; m];
    let mut est = 0.0;
    for it in 0..200_000 {
        w.copy_from_slice(&v);
        for (i, row) in a.rows.iter().enumerate() {
            for &j in row {
                w[i] += v[j as usize];
            }
        }
        let norm: f64 = w.iter().sum();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        let next = norm - 1.0;
        if it > 10 && (next - est).abs() <= 1e-12 * next.abs().max(1.0) {
            est = next;
            break;
        }
        est = next;
    }
    if a.is_irreducible() {
        Ok(est)
    } else {
        Err(SymbolicError::Reducible { estimate: est })
    }
}

/// Uniform start, then uniform successors.
pub fn random_admissible_word<R: Rng + ?Sized>(a: &TransitionMatrix, n: usize, rng: &mut R) -> ItineraryWindow {
    loop {
        let mut word = vec![rng.random_range(0..a.len())];
        while word.len() < 2 * n + 1 {
            let row = &a.rows[*word.last().unwrap()];
            if row.is_empty() {
                break;
            }
            word.push(row[rng.random_range(0..row.len())] as usize);
        }
        if word.len() == 2 * n + 1 {
            return ItineraryWindow { half_width: n, word };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition_builder::{build_cover_at, build_partition};
    use crate::torus_model::make_automorphism;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn setup() -> &'static (ToralAutomorphism, MarkovPartition, TransitionMatrix) {
        static S: OnceLock<(ToralAutomorphism, MarkovPartition, TransitionMatrix)> = OnceLock::new();
        S.get_or_init(|| {
            let f = make_automorphism([[2, 1], [1, 1]]).unwrap();
            let p = build_partition(&f, &build_cover_at(&f, 0.1).unwrap());
            let a = transition_matrix(&f, &p);
            (f, p, a)
        })
    }

    #[test]
    fn small_matrices() {
        let one = TransitionMatrix::from_dense(&[vec![1]]);
        assert_eq!(perron_eigenvalue(&one).unwrap(), 1.0);
        let full = TransitionMatrix::from_dense(&vec![vec![1; 5]; 5]);
        assert!((perron_eigenvalue(&full).unwrap() - 5.0).abs() < 1e-9);
        let red = TransitionMatrix::from_dense(&[vec![1, 1], vec![0, 1]]);
        assert!(matches!(perron_eigenvalue(&red), Err(SymbolicError::Reducible { .. })));
        let golden = TransitionMatrix::from_dense(&[vec![1, 1], vec![1, 0]]);
        assert!((perron_eigenvalue(&golden).unwrap() - 1.618_033_988_749_895).abs() < 1e-9);
    }

    #[test]
    fn admissibility() {
        let a = TransitionMatrix::from_dense(&[vec![1, 1], vec![1, 0]]);
        assert!(is_admissible(&a, &[1]).unwrap());
        assert!(!is_admissible(&a, &[0, 1, 1]).unwrap());
        assert!(is_admissible(&a, &[0, 1, 0, 0]).unwrap());
        assert_eq!(is_admissible(&a, &[0, 2]), Err(SymbolicError::IndexOutOfRange(2)));
        assert_eq!(ItineraryWindow::new(&a, vec![1, 1, 0]), Err(SymbolicError::NotAdmissible(1, 1)));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let w = random_admissible_word(&a, 6, &mut rng);
            assert!(is_admissible(&a, &w.word).unwrap());
            assert!(is_admissible(&a, &w.shifted().word).unwrap());
        }
    }

    #[test]
    fn csv_round_trip() {
        let a = TransitionMatrix::from_dense(&[vec![1, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert_eq!(TransitionMatrix::from_csv(&a.to_csv()).unwrap(), a);
        assert_eq!(TransitionMatrix::from_csv("1,1,0\n0,0,1\n1,0,0\n").unwrap(), a);
        assert!(TransitionMatrix::from_csv("1,2\n0,1\n").is_err());
    }

    #[test]
    fn permutation_symmetry() {
        let (_, _, a) = setup();
        let m = a.len();
        let perm: Vec<usize> = (0..m).map(|i| (i * 7919 + 13) % m).collect();
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), m);
        let b = a.permuted(&perm);
        for i in (0..m).step_by(31) {
            for &j in &a.rows[i] {
                assert!(b.get(perm[i], perm[j as usize]));
            }
        }
        assert_eq!(a.nnz(), b.nnz());
        assert!((perron_eigenvalue(a).unwrap() - perron_eigenvalue(&b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn cat_matrix_rows_and_spectrum() {
        let (f, _, a) = setup();
        assert!(a.rows.iter().all(|r| !r.is_empty()));
        let mut col = vec![false; a.len()];
        a.rows.iter().flatten().for_each(|&j| col[j as usize] = true);
        assert!(col.iter().all(|&c| c));
        assert!(a.is_irreducible());
        assert!((perron_eigenvalue(a).unwrap() - f.lambda_u).abs() < 1e-3);
    }

    #[test]
    fn fixed_point_codes_constantly() {
        let (f, p, a) = setup();
        let x = TorusPoint::ORIGIN;
        let hits = p.locate(f, &x);
        if let Coding::Word(w) = encode(f, p, &x, 6) {
            let c = w.at(0);
            assert!(w.word.iter().all(|&s| s == c));
            assert!(a.get(c, c));
        } else {
            // the fixed point sits on a corner: every cell around it has a constant code
            assert!(hits.len() > 1);
            let codes = all_codes(f, p, a, &x, 6, 64);
            assert!(codes.iter().any(|w| w.word.iter().all(|&s| s == w.word[0])));
        }
        // cylinders of constant words shrink to the fixed point
        for &c in &hits {
            if !a.get(c, c) {
                continue;
            }
            let mut last = f64::INFINITY;
            for n in [1, 4, 8, 12] {
                let w = ItineraryWindow { half_width: n, word: vec![c; 2 * n + 1] };
                let k = cylinder(f, p, &w).unwrap();
                assert!(k.rect.contains(f, &x));
                assert!(k.diameter < last);
                last = k.diameter;
            }
            assert!(last < 1e-5);
        }
    }

    #[test]
    fn face_point_is_a_boundary_hit() {
        let (f, p, _) = setup();
        let r = p.rect(100);
        let x = r.point(f, r.iu.hi, r.is.mid());
        assert!(matches!(encode(f, p, &x, 5), Coding::BoundaryHit { index: 0, .. }));
    }

    #[test]
    fn encoded_words_match_membership() {
        let (f, p, a) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = TorusPoint::new(rng.random(), rng.random());
            if let Coding::Word(w) = encode(f, p, &x, 10) {
                assert!(is_admissible(a, &w.word).unwrap());
                for j in -10i64..=10 {
                    let y = crate::torus_model::iterate(f, &x, j);
                    assert!(p.rect(w.at(j)).contains(f, &y));
                }
            }
        }
    }

    #[test]
    fn cylinders_nest_and_decay() {
        let (f, p, a) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let w = random_admissible_word(a, 12, &mut rng);
            let mut prev: Option<Rectangle> = None;
            let mut diams = Vec::new();
            for n in 0..=12 {
                let k = cylinder(f, p, &w.truncated(n)).unwrap();
                if n == 0 {
                    assert_eq!(k.rect, *p.rect(w.at(0)));
                }
                if let Some(q) = prev {
                    assert!(k.rect.iu.lo >= q.iu.lo - 1e-15 && k.rect.iu.hi <= q.iu.hi + 1e-15);
                    assert!(k.rect.is.lo >= q.is.lo - 1e-15 && k.rect.is.hi <= q.is.hi + 1e-15);
                }
                prev = Some(k.rect);
                diams.push(k.diameter);
            }
            // widths scale exactly with the eigenvalues from the end cells
            let k = cylinder(f, p, &w).unwrap().rect;
            let wu = p.rect(w.at(12)).iu.width() / f.lambda_u.abs().powi(12);
            let ws = p.rect(w.at(-12)).is.width() * f.lambda_s.abs().powi(12);
            assert!((k.iu.width() / wu - 1.0).abs() < 1e-6);
            assert!((k.is.width() / ws - 1.0).abs() < 1e-6);
            assert!(diams[12] < diams[5]);
        }
    }

    #[test]
    fn forward_cylinder_is_stable_fiber_band() {
        let (f, p, a) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let w = random_admissible_word(a, 5, &mut rng);
            let fw = forward_cylinder(f, p, &w.word[5..]).unwrap();
            let r0 = p.rect(w.at(0));
            assert!(fw.is.approx_eq(&r0.is));
            assert!(fw.iu.width() <= r0.iu.width());
        }
    }

    #[test]
    fn semiconjugacy() {
        let (f, p, a) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f2 = make_automorphism([[5, 3], [3, 2]]).unwrap();
        let mut control = 0.0f64;
        for _ in 0..50 {
            let w = random_admissible_word(a, 15, &mut rng);
            assert!(semiconjugacy_residual(f, p, &w).unwrap() <= 1e-6);
            let (x, _) = pi_point(f, p, &w).unwrap();
            let (y, _) = pi_point(f, p, &w.shifted()).unwrap();
            control = control.max(torus_distance(&y, &apply(&f2, &x)));
        }
        assert!(control > 1e-2);
    }

    #[test]
    fn round_trip() {
        let (f, p, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rep = injectivity_check(f, p, 200, 15, &mut rng);
        assert_eq!(rep.failures, 0);
        assert!(rep.checked > 150);
        assert!(rep.max_error <= rep.max_diameter);
    }

    #[test]
    fn nearby_points_separate() {
        let (f, p, _) = setup();
        let x = TorusPoint::new(0.3141592653, 0.2718281828);
        let y = x.translate([1e-9, 0.0]);
        match (encode(f, p, &x, 40), encode(f, p, &y, 40)) {
            (Coding::Word(a), Coding::Word(b)) => assert_ne!(a, b),
            _ => panic!("generic points hit the boundary"),
        }
    }
}
