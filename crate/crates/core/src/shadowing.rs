//! Finite-window shadowing for linear hyperbolic maps.
//!
//! The deviation d_n of the true orbit from the pseudo-orbit obeys
//! d_{n+1} = A d_n − e_n. Its stable part is summed from the past and its
//! unstable part from the future, both as geometric series. The sums run in
//! double-double arithmetic and the point is assembled in 128-bit fixed
//! point, so the forward orbit of the result still tracks the window after
//! fifty expansions.

use rand::Rng;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::torus_model::{
    apply, apply_inverse, dd_recip, displacement, lift_raw, torus_distance, Displacement,
    ToralAutomorphism, TorusError, TorusPoint,
};

const INV_SCALE: f64 = 1.0 / 340282366920938463463374607431768211456.0;
const SCALE: f64 = 340282366920938463463374607431768211456.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShadowError {
    #[error("pseudo-orbit needs an odd number of points, at least 3 (got {0})")]
    BadWindow(usize),
    #[error("truncation tail {tail:e} exceeds a tenth of the certified beta {beta:e}")]
    WindowTooSmall { tail: f64, beta: f64 },
    #[error("certified beta {0} is not below 1/4")]
    DefectTooLarge(f64),
    #[error("window of half-width {0} needs more than double-double precision")]
    PrecisionExhausted(usize),
    #[error("gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// q_{−N}..q_N with its certified step defect.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbit {
    pub half_width: usize,
    pub points: Vec<TorusPoint>,
    pub delta: f64,
}

impl PseudoOrbit {
    pub fn new(f: &ToralAutomorphism, points: Vec<TorusPoint>) -> Result<Self, ShadowError> {
        if points.len() < 3 || points.len().is_multiple_of(2) {
            return Err(ShadowError::BadWindow(points.len()));
        }
        let (_, delta) = defect(f, &points)?;
        Ok(PseudoOrbit { half_width: points.len() / 2, points, delta })
    }

    /// q_n for −N ≤ n ≤ N.
    pub fn at(&self, n: i64) -> &TorusPoint {
        &self.points[(n + self.half_width as i64) as usize]
    }

    /// The window re-centred at q_1, one shorter on each side.
    pub fn shifted(&self, f: &ToralAutomorphism) -> Result<Self, ShadowError> {
        PseudoOrbit::new(f, self.points[2..].to_vec())
    }

    /// The central sub-window of half-width m.
    pub fn truncated(&self, f: &ToralAutomorphism, m: usize) -> Result<Self, ShadowError> {
        let n = self.half_width;
        assert!(m <= n);
        PseudoOrbit::new(f, self.points[n - m..=n + m].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowResult {
    /// The shadowing point at index 0.
    pub point: TorusPoint,
    pub beta_certified: f64,
    /// Distance bound to the shadow of any bi-infinite extension of the
    /// window with the same defect.
    pub tail_bound: f64,
}

/// Per-step defects e_n = f(q_n) → q_{n+1} in eigen-coordinates, and their
/// maximal length.
pub fn defect(
    f: &ToralAutomorphism,
    points: &[TorusPoint],
) -> Result<(Vec<Displacement>, f64), TorusError> {
    let mut out = Vec::with_capacity(points.len().saturating_sub(1));
    let mut delta: f64 = 0.0;
    for w in points.windows(2) {
        let img = apply(f, &w[0]);
        out.push(displacement(f, &img, &w[1])?);
        delta = delta.max(torus_distance(&img, &w[1]));
    }
    Ok((out, delta))
}

fn dd_from_raw(v: i128) -> TwoFloat {
    TwoFloat::from(v) * INV_SCALE
}

fn dd_to_raw(v: TwoFloat) -> i128 {
    (v.hi() * SCALE) as i128 + (v.lo() * SCALE).round() as i128
}

pub fn shadow(f: &ToralAutomorphism, q: &PseudoOrbit) -> Result<ShadowResult, ShadowError> {
    let n = q.half_width;
    let pe = f.precise_eigen();
    let t = pe.to_eigen;

    // exact defects, then eigen-coordinates in double-double
    let mut eu = Vec::with_capacity(2 * n);
    let mut es = Vec::with_capacity(2 * n);
    for w in q.points.windows(2) {
        let ([dx, dy], tie) = lift_raw(&apply(f, &w[0]), &w[1]);
        if tie {
            return Err(TorusError::AmbiguousLift.into());
        }
        let (x, y) = (dd_from_raw(dx), dd_from_raw(dy));
        eu.push(t[0][0] * x + t[0][1] * y);
        es.push(t[1][0] * x + t[1][1] * y);
    }

    // index k in 0..2N is the step from q_{k−N} to q_{k−N+1}
    let inv_lu = dd_recip(pe.lambda_u);
    let mut du = vec![TwoFloat::from(0.0); 2 * n + 1];
    for k in (0..2 * n).rev() {
        du[k] = (du[k + 1] + eu[k]) * inv_lu;
    }
    let mut ds = vec![TwoFloat::from(0.0); 2 * n + 1];
    for k in 0..2 * n {
        ds[k + 1] = pe.lambda_s * ds[k] - es[k];
    }

    let mut beta_raw: f64 = 0.0;
    for k in 0..=2 * n {
        let v = f.from_eigen(du[k].hi(), ds[k].hi());
        beta_raw = beta_raw.max(v[0].hypot(v[1]));
    }

    let (d0u, d0s) = (du[n], ds[n]);
    let vx = d0u * pe.e_u[0] + d0s * pe.e_s[0];
    let vy = d0u * pe.e_u[1] + d0s * pe.e_s[1];
    let point = q.at(0).translate_raw(dd_to_raw(vx), dd_to_raw(vy));

    let (lu, ls) = (f.lambda_u.abs(), f.lambda_s.abs());
    let edge = f.kappa() * q.delta;
    let tail_bound = edge * (ls.powi(n as i32) / (1.0 - ls) + lu.powi(-(n as i32)) / (lu - 1.0));

    // error of the assembled point, spread over the window by the dynamics
    let point_err = 1e-31 * (d0u.hi().abs() + d0s.hi().abs()) + 2f64.powi(-126);
    let margin = point_err * lu.powi(n as i32).max(ls.powi(-(n as i32))) + 1e-15;
    if margin > 1e-9 {
        return Err(ShadowError::PrecisionExhausted(n));
    }
    let beta_certified = beta_raw + tail_bound + margin;
    if beta_certified >= 0.25 {
        return Err(ShadowError::DefectTooLarge(beta_certified));
    }
    if tail_bound > beta_certified / 10.0 {
        return Err(ShadowError::WindowTooSmall { tail: tail_bound, beta: beta_certified });
    }
    Ok(ShadowResult { point, beta_certified, tail_bound })
}

/// Whether the exact orbit of x stays within beta of q over the window.
pub fn verify_shadow(f: &ToralAutomorphism, q: &PseudoOrbit, x: &TorusPoint, beta: f64) -> bool {
    let n = q.half_width as i64;
    let mut fwd = *x;
    let mut bwd = *x;
    for k in 0..=n {
        if torus_distance(&fwd, q.at(k)) > beta || torus_distance(&bwd, q.at(-k)) > beta {
            return false;
        }
        fwd = apply(f, &fwd);
        bwd = apply_inverse(f, &bwd);
    }
    true
}

/// Uniform grid net: every point of the torus is within gamma of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    pub gamma: f64,
    /// Grid resolution; node (i, j) sits at (i/n, j/n) with index j·n + i.
    pub n: usize,
    pub points: Vec<TorusPoint>,
}

impl DenseNet {
    pub fn grid(n: usize) -> Self {
        assert!(n > 0);
        let mut points = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push(TorusPoint::grid(i as i64, j as i64, n as u64));
            }
        }
        DenseNet { gamma: std::f64::consts::FRAC_1_SQRT_2 / n as f64, n, points }
    }

    pub fn index(&self, i: i64, j: i64) -> usize {
        let n = self.n as i64;
        (j.rem_euclid(n) * n + i.rem_euclid(n)) as usize
    }

    pub fn coords(&self, s: usize) -> [i64; 2] {
        [(s % self.n) as i64, (s / self.n) as i64]
    }

    /// Largest distance from a probe-grid point to its nearest node.
    pub fn covering_radius(&self, probe: usize) -> f64 {
        let n = self.n as f64;
        let mut worst: f64 = 0.0;
        for a in 0..probe {
            for b in 0..probe {
                let p = TorusPoint::new((a as f64 + 0.5) / probe as f64, (b as f64 + 0.5) / probe as f64);
                let [x, y] = p.coords();
                let (i, j) = ((x * n).round() as i64, (y * n).round() as i64);
                let mut best = f64::INFINITY;
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let s = self.index(i + di, j + dj);
                        best = best.min(torus_distance(&p, &self.points[s]));
                    }
                }
                worst = worst.max(best);
            }
        }
        worst
    }
}

pub fn gamma_net(gamma: f64) -> Result<DenseNet, ShadowError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(ShadowError::InvalidGamma(gamma));
    }
    let n = (1.0 / (gamma * std::f64::consts::SQRT_2) - 1e-9).ceil().max(1.0) as usize;
    let mut net = DenseNet::grid(n);
    net.gamma = gamma;
    Ok(net)
}

/// Two orbits that stay within this distance of each other coincide.
pub fn expansivity_constant(_f: &ToralAutomorphism) -> f64 {
    0.25
}

/// Orbit of `start` from index −N, with each step perturbed by a vector drawn
/// uniformly from the disc of radius delta.
pub fn random_pseudo_orbit<R: Rng + ?Sized>(
    f: &ToralAutomorphism,
    start: TorusPoint,
    half_width: usize,
    delta: f64,
    rng: &mut R,
) -> Vec<TorusPoint> {
    let mut pts = Vec::with_capacity(2 * half_width + 1);
    pts.push(start);
    for _ in 0..2 * half_width {
        let r = delta * rng.random::<f64>().sqrt();
        let th = std::f64::consts::TAU * rng.random::<f64>();
        let last = pts[pts.len() - 1];
        pts.push(apply(f, &last).translate([r * th.cos(), r * th.sin()]));
    }
    pts
}

/// One `x y` pair per line; blank lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<Vec<TorusPoint>, ShadowError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| ShadowError::Parse { line: i + 1, msg: msg.to_string() };
        if nums.len() != 2 {
            return Err(bad("expected two numbers"));
        }
        let x: f64 = nums[0].parse().map_err(|_| bad("bad number"))?;
        let y: f64 = nums[1].parse().map_err(|_| bad("bad number"))?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(bad("non-finite coordinate"));
        }
        out.push(TorusPoint::new(x, y));
    }
    Ok(out)
}

pub fn format_points(points: &[TorusPoint]) -> String {
    points.iter().map(|p| format!("{:?} {:?}\n", p.x(), p.y())).collect()
}
