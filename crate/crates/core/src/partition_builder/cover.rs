//! The cover by images of pseudo-orbit sets.
//!
//! Net points are the n×n grid. A pseudo-orbit may jump from f(p) to
//! f(p) + e/n for e in a fixed step set E ⊂ Z². The set of points shadowing
//! such pseudo-orbits started at p is p plus U×S (times 1/n) in eigen-
//! coordinates, where U and S are the attractors of
//!
//!   U = ∪_e (e_u + U) / lambda_u,    S = ∪_e (lambda_s·S − e_s).
//!
//! When the pieces of the hull leave no gap, the attractor is the hull, so
//! every T_p is an exact closed product.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::index::CellIndex;
use crate::local_product::{make_budget, ConstantsBudget};
use crate::rectangles::{Interval, Rectangle, TOL};
use crate::shadowing::{shadow, DenseNet, PseudoOrbit, ShadowError};
use crate::torus_model::{apply, ToralAutomorphism, TorusPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("point ({0}, {1}) is not covered")]
    CoverageGap(f64, f64),
    #[error("no step set up to radius {0} gives a gap-free attractor")]
    NoStepSet(f64),
    #[error("beta = {0} is out of range for a cover")]
    BadBeta(f64),
}

#[derive(Debug, Clone)]
pub struct Cover {
    pub net: DenseNet,
    /// Jump radius of the admitted pseudo-orbits.
    pub alpha: f64,
    pub beta: f64,
    /// Step set E, in grid units.
    pub steps: Vec<[i64; 2]>,
    pub rects: Vec<Rectangle>,
    pub index: CellIndex,
}

/// Hulls of the two attractors at unit grid spacing, or None when one of
/// them has a gap.
pub fn attractor_hulls(f: &ToralAutomorphism, steps: &[[i64; 2]]) -> Option<(Interval, Interval)> {
    let es: Vec<(f64, f64)> = steps
        .iter()
        .map(|e| {
            let d = f.to_eigen([e[0] as f64, e[1] as f64]);
            (d.du, d.ds)
        })
        .collect();
    let lu = f.lambda_u;
    let ls = f.lambda_s;
    let u_map = |t: f64, e: f64| (e + t) / lu;
    let s_map = |t: f64, e: f64| ls * t - e;
    let step = |lo: f64, hi: f64, g: &dyn Fn(f64, f64) -> f64, pick: fn(&(f64, f64)) -> f64| {
        let mut a = f64::MAX;
        let mut b = f64::MIN;
        for e in &es {
            for t in [lo, hi] {
                let v = g(t, pick(e));
                a = a.min(v);
                b = b.max(v);
            }
        }
        (a, b)
    };
    let mut u = (0.0, 0.0);
    let mut s = (0.0, 0.0);
    for _ in 0..10_000 {
        let nu = step(u.0, u.1, &u_map, |e| e.0);
        let ns = step(s.0, s.1, &s_map, |e| e.1);
        if nu == u && ns == s {
            break;
        }
        u = nu;
        s = ns;
    }
    let pieces = |lo: f64, hi: f64, g: &dyn Fn(f64, f64) -> f64, pick: fn(&(f64, f64)) -> f64| {
        let mut p: Vec<(f64, f64)> = es
            .iter()
            .map(|e| {
                let (a, b) = (g(lo, pick(e)), g(hi, pick(e)));
                (a.min(b), a.max(b))
            })
            .collect();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        p
    };
    let gap_free = |p: Vec<(f64, f64)>, width: f64| {
        let mut reach = p[0].1;
        for (a, b) in &p[1..] {
            if *a > reach + 1e-12 * width.max(1.0) {
                return false;
            }
            reach = reach.max(*b);
        }
        true
    };
    let ok = gap_free(pieces(u.0, u.1, &u_map, |e| e.0), u.1 - u.0)
        && gap_free(pieces(s.0, s.1, &s_map, |e| e.1), s.1 - s.0);
    ok.then(|| (Interval::closed(u.0, u.1), Interval::closed(s.0, s.1)))
}

/// Lattice points with |z|² ≤ r2, sorted.
fn shell(r2: i64) -> Vec<[i64; 2]> {
    let r = (r2 as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for j in -r..=r {
        for i in -r..=r {
            if i * i + j * j <= r2 {
                out.push([i, j]);
            }
        }
    }
    out
}

/// Steps, jump radius, and the U and S attractor hulls.
pub type StepSet = (Vec<[i64; 2]>, f64, Interval, Interval);

/// Smallest lattice disc whose attractors are gap-free, with the midpoint
/// radius between it and the next shell (grid units).
pub fn step_set(f: &ToralAutomorphism) -> Result<StepSet, CoverError> {
    let norms: Vec<i64> = {
        let mut v: Vec<i64> = shell(50).iter().map(|z| z[0] * z[0] + z[1] * z[1]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for w in norms.windows(2).skip(1) {
        let steps = shell(w[0]);
        if let Some((u, s)) = attractor_hulls(f, &steps) {
            let radius = 0.5 * ((w[0] as f64).sqrt() + (w[1] as f64).sqrt());
            return Ok((steps, radius, u, s));
        }
    }
    Err(CoverError::NoStepSet(50f64.sqrt()))
}

fn box_diam(f: &ToralAutomorphism, u: &Interval, s: &Interval) -> f64 {
    Rectangle::new(TorusPoint::ORIGIN, *u, *s).diameter(f)
}

pub fn build_cover(f: &ToralAutomorphism, budget: &ConstantsBudget) -> Result<Cover, CoverError> {
    build_cover_at(f, budget.beta)
}

/// Cover with every rectangle of diameter at most 2·beta.
pub fn build_cover_at(f: &ToralAutomorphism, beta: f64) -> Result<Cover, CoverError> {
    if !(beta > 0.0 && beta < 0.125) {
        return Err(CoverError::BadBeta(beta));
    }
    let (steps, radius, u1, s1) = step_set(f)?;
    let n = (box_diam(f, &u1, &s1) / (2.0 * beta)).ceil().max(1.0) as usize;
    let h = 1.0 / n as f64;
    let net = DenseNet::grid(n);
    let (iu, is) = (u1.scale(h), s1.scale(h));
    let rects: Vec<Rectangle> = net.points.iter().map(|p| Rectangle::new(*p, iu, is)).collect();
    let index = CellIndex::new(f, &rects);
    Ok(Cover { net, alpha: radius * h, beta, steps, rects, index })
}

impl Cover {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn max_diameter(&self, f: &ToralAutomorphism) -> f64 {
        self.rects.iter().map(|r| r.diameter(f)).fold(0.0, f64::max)
    }

    /// Net indices s' with p_{s'} = f(p_s) + e/n for some step e.
    pub fn successors(&self, f: &ToralAutomorphism, s: usize) -> Vec<usize> {
        let n = self.net.n as i64;
        let g = f.apply_grid(self.net.coords(s), n);
        self.steps.iter().map(|e| self.net.index(g[0] + e[0], g[1] + e[1])).collect()
    }

    /// A random admissible pseudo-orbit of the cover through net point s.
    pub fn random_pseudo_orbit<R: Rng + ?Sized>(
        &self,
        f: &ToralAutomorphism,
        s: usize,
        half_width: usize,
        rng: &mut R,
    ) -> Vec<TorusPoint> {
        let n = self.net.n as i64;
        let mut fwd = vec![self.net.coords(s)];
        for _ in 0..half_width {
            let g = f.apply_grid(*fwd.last().unwrap(), n);
            let e = self.steps[rng.random_range(0..self.steps.len())];
            fwd.push([(g[0] + e[0]).rem_euclid(n), (g[1] + e[1]).rem_euclid(n)]);
        }
        // backwards: q_{k-1} = f^{-1}(q_k − e/n)
        let mut back = Vec::new();
        let mut cur = self.net.coords(s);
        for _ in 0..half_width {
            let e = self.steps[rng.random_range(0..self.steps.len())];
            cur = f.apply_inverse_grid([cur[0] - e[0], cur[1] - e[1]], n);
            back.push(cur);
        }
        back.reverse();
        back.into_iter()
            .chain(fwd)
            .map(|g| self.net.points[self.net.index(g[0], g[1])])
            .collect()
    }
}

/// Every probe point (a, b)/probe, offset by half a cell, lies in some
/// rectangle.
pub fn check_coverage(f: &ToralAutomorphism, cover: &Cover, probe: usize) -> Result<(), CoverError> {
    for a in 0..probe {
        for b in 0..probe {
            let x = TorusPoint::new((a as f64 + 0.5) / probe as f64, (b as f64 + 0.5) / probe as f64);
            let hit = cover.index.candidates(&x).iter().any(|&k| cover.rects[k as usize].contains(f, &x));
            if !hit {
                return Err(CoverError::CoverageGap(x.x(), x.y()));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ShadowCheck {
    pub orbits: usize,
    pub outside: usize,
    pub max_beta: f64,
}

/// Shadow random cover pseudo-orbits through random net points and check
/// that the shadowing point lies in the rectangle of the starting node.
pub fn shadow_cross_check<R: Rng + ?Sized>(
    f: &ToralAutomorphism,
    cover: &Cover,
    orbits: usize,
    half_width: usize,
    rng: &mut R,
) -> Result<ShadowCheck, ShadowError> {
    let mut out = ShadowCheck { orbits, ..Default::default() };
    for _ in 0..orbits {
        let s = rng.random_range(0..cover.len());
        let q = PseudoOrbit::new(f, cover.random_pseudo_orbit(f, s, half_width, rng))?;
        let r = shadow(f, &q)?;
        out.max_beta = out.max_beta.max(r.beta_certified);
        if !cover.rects[s].contains(f, &r.point) {
            out.outside += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CoverMarkovReport {
    pub samples: usize,
    pub checked: usize,
    pub stable_violations: usize,
    pub unstable_violations: usize,
}

/// Fiber inclusions between T_s and the rectangles T_t of its admissible
/// successors, at random x ∈ T_s ∩ f^{-1}(T_t).
pub fn cover_markov_check<R: Rng + ?Sized>(
    f: &ToralAutomorphism,
    cover: &Cover,
    samples: usize,
    rng: &mut R,
) -> CoverMarkovReport {
    let mut rep = CoverMarkovReport { samples, ..Default::default() };
    for _ in 0..samples {
        let s = rng.random_range(0..cover.len());
        let ts = &cover.rects[s];
        let x = ts.point(
            f,
            rng.random_range(ts.iu.lo..=ts.iu.hi),
            rng.random_range(ts.is.lo..=ts.is.hi),
        );
        let fx = apply(f, &x);
        let succ = cover.successors(f, s);
        let t = succ[rng.random_range(0..succ.len())];
        let tt = &cover.rects[t];
        if !tt.contains(f, &fx) {
            continue;
        }
        rep.checked += 1;
        let (ws, wu) = (ts.stable_fiber(f, &x).unwrap(), ts.unstable_fiber(f, &x).unwrap());
        let (vs, vu) = (tt.stable_fiber(f, &fx).unwrap(), tt.unstable_fiber(f, &fx).unwrap());
        if !ws.image(f).within(f, &vs, TOL) {
            rep.stable_violations += 1;
        }
        if !vu.within(f, &wu.image(f), TOL) {
            rep.unstable_violations += 1;
        }
    }
    rep
}

/// Largest budget of the halving sequence beta, beta/2, ... that is feasible.
pub fn feasible_budget(f: &ToralAutomorphism, beta: f64) -> ConstantsBudget {
    let mut b = beta;
    loop {
        if let Ok(budget) = make_budget(f, b) {
            return budget;
        }
        b /= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_model::make_automorphism;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cat() -> ToralAutomorphism {
        make_automorphism([[2, 1], [1, 1]]).unwrap()
    }

    #[test]
    fn cat_map_step_set_is_the_unit_cross() {
        let f = cat();
        let (steps, radius, u, s) = step_set(&f).unwrap();
        assert_eq!(steps.len(), 5);
        assert!((radius - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-15);
        // symmetric step set gives symmetric attractors
        assert!((u.lo + u.hi).abs() < 1e-15 && (s.lo + s.hi).abs() < 1e-15);
        assert!((box_diam(&f, &u, &s) - 2.9467408391305385).abs() < 1e-9);
    }

    #[test]
    fn hull_is_invariant() {
        let f = cat();
        let (steps, _, u, s) = step_set(&f).unwrap();
        for e in &steps {
            let d = f.to_eigen([e[0] as f64, e[1] as f64]);
            let iu = u.shift(d.du).scale(1.0 / f.lambda_u);
            let is = s.scale(f.lambda_s).shift(-d.ds);
            assert!(iu.lo >= u.lo - 1e-15 && iu.hi <= u.hi + 1e-15);
            assert!(is.lo >= s.lo - 1e-15 && is.hi <= s.hi + 1e-15);
        }
    }

    #[test]
    fn lone_origin_step_has_gaps() {
        // E = {0} gives the single point attractor, which is trivially gap-free;
        // E = {0, (3,0)} leaves a gap
        let f = cat();
        assert!(attractor_hulls(&f, &[[0, 0]]).is_some());
        assert!(attractor_hulls(&f, &[[0, 0], [3, 0]]).is_none());
    }

    #[test]
    fn other_matrices_get_covers() {
        for m in [[[1, 1], [1, 0]], [[-2, 1], [1, -1]], [[3, 1], [2, 1]], [[5, 2], [2, 1]]] {
            let f = make_automorphism(m).unwrap();
            let c = build_cover_at(&f, 0.05).unwrap();
            assert!(c.max_diameter(&f) <= 0.1 + 1e-12, "{m:?}");
            check_coverage(&f, &c, 150).unwrap();
        }
    }

    #[test]
    fn cover_diameter_and_coverage() {
        let f = cat();
        let c = build_cover_at(&f, 0.05).unwrap();
        assert_eq!(c.net.n, 30);
        assert!(c.max_diameter(&f) <= 0.1);
        check_coverage(&f, &c, 300).unwrap();
    }

    #[test]
    fn sparse_cover_has_gap() {
        let f = cat();
        let mut c = build_cover_at(&f, 0.05).unwrap();
        c.rects.truncate(1);
        c.index = CellIndex::new(&f, &c.rects);
        assert!(matches!(check_coverage(&f, &c, 50), Err(CoverError::CoverageGap(..))));
    }

    #[test]
    fn shadows_land_in_their_rectangle() {
        let f = cat();
        let c = build_cover_at(&f, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = shadow_cross_check(&f, &c, 100, 30, &mut rng).unwrap();
        assert_eq!(r.outside, 0);
        assert!(r.max_beta < 0.1);
    }

    #[test]
    fn cover_fibers_nest() {
        let f = cat();
        let c = build_cover_at(&f, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = cover_markov_check(&f, &c, 10_000, &mut rng);
        assert!(r.checked > 1000);
        assert_eq!((r.stable_violations, r.unstable_violations), (0, 0));
    }

    #[test]
    fn fixed_point_fibers_nest() {
        let f = cat();
        let c = build_cover_at(&f, 0.05).unwrap();
        // T_0 contains the fixed point and 0 ∈ E, so T_0 is its own successor
        assert!(c.successors(&f, 0).contains(&0));
        let t = &c.rects[0];
        let w = t.stable_fiber(&f, &TorusPoint::ORIGIN).unwrap();
        assert!(w.image(&f).within(&f, &w, 0.0));
    }

    #[test]
    fn halving_finds_feasible_budget() {
        let f = cat();
        let b = feasible_budget(&f, 0.05);
        assert!((b.beta - 0.00625).abs() < 1e-15);
        assert!(b.check());
    }
}
