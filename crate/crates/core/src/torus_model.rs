//! Linear automorphisms of the 2-torus and exact point arithmetic.
//!
//! Points are stored as 128-bit binary fractions, so reduction mod 1 is a
//! wrapping add and the integer matrix acts on them without rounding. Orbits
//! of any length can then be followed exactly, which the forward half of a
//! shadowing window needs: an f64 point loses every significant bit after
//! about 35 iterates of the cat map.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use twofloat::TwoFloat;

/// 2^128 as f64.
const SCALE: f64 = 340282366920938463463374607431768211456.0;
const INV_SCALE: f64 = 1.0 / SCALE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: i64 },
    #[error("matrix is not hyperbolic (trace = {trace}, det = {det})")]
    NotHyperbolic { trace: i64, det: i64 },
    #[error("nearest lift is ambiguous: a coordinate difference is exactly 1/2")]
    AmbiguousLift,
}

/// Reduce a finite f64 into the fixed-point circle. Bits below 2^-128 are
/// rounded away.
pub(crate) fn f64_to_fixed(v: f64) -> u128 {
    assert!(v.is_finite(), "torus coordinate must be finite, got {v}");
    if v == 0.0 {
        return 0;
    }
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if biased == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    let shift = exp + 128;
    let mag: u128 = if shift >= 128 {
        0
    } else if shift >= 0 {
        (mant as u128) << shift
    } else if shift > -64 {
        let s = (-shift) as u32;
        ((mant as u128) + (1u128 << (s - 1))) >> s
    } else {
        0
    };
    if v < 0.0 {
        mag.wrapping_neg()
    } else {
        mag
    }
}

pub(crate) fn fixed_to_f64(v: u128) -> f64 {
    let r = v as f64 * INV_SCALE;
    // rounding can land on 1.0, which is 0 on the circle
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub(crate) fn signed_to_f64(v: i128) -> f64 {
    v as f64 * INV_SCALE
}

/// floor(i * 2^128 / n) for 0 <= i < n.
fn ratio_to_fixed(i: u64, n: u64) -> u128 {
    assert!(n > 0 && i < n);
    if i == 0 {
        return 0;
    }
    let n = n as u128;
    let (mut q, mut r) = (u128::MAX / n, u128::MAX % n + 1);
    if r == n {
        q += 1;
        r = 0;
    }
    let i = i as u128;
    i * q + (i * r) / n
}

/// A point of R²/Z². Coordinates live in [0, 1) by construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TorusPoint {
    x: u128,
    y: u128,
}

impl TorusPoint {
    pub const ORIGIN: TorusPoint = TorusPoint { x: 0, y: 0 };

    /// Any finite reals; reduced mod 1. Panics on NaN or infinity.
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint { x: f64_to_fixed(x), y: f64_to_fixed(y) }
    }

    /// The grid point (i/n, j/n), indices taken mod n.
    pub fn grid(i: i64, j: i64, n: u64) -> Self {
        let m = n as i64;
        TorusPoint {
            x: ratio_to_fixed(i.rem_euclid(m) as u64, n),
            y: ratio_to_fixed(j.rem_euclid(m) as u64, n),
        }
    }

    pub fn from_raw(x: u128, y: u128) -> Self {
        TorusPoint { x, y }
    }

    pub fn raw(&self) -> (u128, u128) {
        (self.x, self.y)
    }

    pub fn x(&self) -> f64 {
        fixed_to_f64(self.x)
    }

    pub fn y(&self) -> f64 {
        fixed_to_f64(self.y)
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.x(), self.y()]
    }

    /// Translate by a Cartesian vector.
    pub fn translate(&self, v: [f64; 2]) -> Self {
        TorusPoint {
            x: self.x.wrapping_add(f64_to_fixed(v[0])),
            y: self.y.wrapping_add(f64_to_fixed(v[1])),
        }
    }

    /// Translate by an exact fixed-point vector (two's complement).
    pub(crate) fn translate_raw(&self, dx: i128, dy: i128) -> Self {
        TorusPoint {
            x: self.x.wrapping_add(dx as u128),
            y: self.y.wrapping_add(dy as u128),
        }
    }
}

impl std::fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:.17}, {:.17})", self.x(), self.y())
    }
}

impl Serialize for TorusPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(serde::de::Error::custom("non-finite torus coordinate"));
        }
        Ok(TorusPoint::new(x, y))
    }
}

/// Eigen-coordinates of a nearest lift of q − p.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Displacement {
    pub du: f64,
    pub ds: f64,
}

impl Displacement {
    pub fn new(du: f64, ds: f64) -> Self {
        Displacement { du, ds }
    }
}

/// Eigen data carried in double-double precision, for computations whose
/// error is later multiplied by large powers of lambda_u.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PreciseEigen {
    pub lambda_u: TwoFloat,
    pub lambda_s: TwoFloat,
    pub e_u: [TwoFloat; 2],
    pub e_s: [TwoFloat; 2],
    pub to_eigen: [[TwoFloat; 2]; 2],
}

/// A hyperbolic element of GL(2, Z) acting on the torus.
///
/// `lambda_u` is the eigenvalue of modulus > 1 and keeps its sign, so a
/// matrix with negative trace has `lambda_u < -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToralAutomorphism {
    pub matrix: [[i64; 2]; 2],
    pub inverse: [[i64; 2]; 2],
    pub det: i64,
    pub lambda_u: f64,
    pub lambda_s: f64,
    pub e_u: [f64; 2],
    pub e_s: [f64; 2],
    to_eigen: [[f64; 2]; 2],
    op_norm: f64,
}

pub fn make_automorphism(m: [[i64; 2]; 2]) -> Result<ToralAutomorphism, TorusError> {
    let [[a, b], [c, d]] = m;
    let det = a * d - b * c;
    if det.abs() != 1 {
        return Err(TorusError::NotUnimodular { det });
    }
    let trace = a + d;
    let disc = trace * trace - 4 * det;
    // disc <= 0 gives unit-modulus complex roots; with det = -1 a root of
    // modulus one forces trace 0
    if disc <= 0 || (det == -1 && trace == 0) {
        return Err(TorusError::NotHyperbolic { trace, det });
    }
    let root = (disc as f64).sqrt();
    let signed = if trace >= 0 { root } else { -root };
    let lambda_u = (trace as f64 + signed) / 2.0;
    let lambda_s = det as f64 / lambda_u;
    let e_u = eigenvector(m, lambda_u);
    let e_s = eigenvector(m, lambda_s);
    let bdet = e_u[0] * e_s[1] - e_s[0] * e_u[1];
    let to_eigen = [[e_s[1] / bdet, -e_s[0] / bdet], [-e_u[1] / bdet, e_u[0] / bdet]];

    let (af, bf, cf, df) = (a as f64, b as f64, c as f64, d as f64);
    let t = af * af + bf * bf + cf * cf + df * df;
    let op_norm = ((t + (t * t - 4.0 * (det * det) as f64).max(0.0).sqrt()) / 2.0).sqrt();

    Ok(ToralAutomorphism {
        matrix: m,
        inverse: [[d * det, -b * det], [-c * det, a * det]],
        det,
        lambda_u,
        lambda_s,
        e_u,
        e_s,
        to_eigen,
        op_norm,
    })
}

fn eigenvector(m: [[i64; 2]; 2], lambda: f64) -> [f64; 2] {
    let [[a, b], [c, d]] = m;
    let v1 = [b as f64, lambda - a as f64];
    let v2 = [lambda - d as f64, c as f64];
    let n1 = v1[0].hypot(v1[1]);
    let n2 = v2[0].hypot(v2[1]);
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    let mut e = [v[0] / n, v[1] / n];
    if e[0] < 0.0 || (e[0] == 0.0 && e[1] < 0.0) {
        e = [-e[0], -e[1]];
    }
    e
}

/// 1/b to full double-double accuracy; the crate's own division stops at
/// about 53 bits.
pub(crate) fn dd_recip(b: TwoFloat) -> TwoFloat {
    let mut x = TwoFloat::from(1.0 / b.hi());
    for _ in 0..2 {
        x = x + x * (TwoFloat::from(1.0) - b * x);
    }
    x
}

pub(crate) fn dd_sqrt(a: TwoFloat) -> TwoFloat {
    let mut x = TwoFloat::from(a.hi().sqrt());
    for _ in 0..2 {
        x = x + (a - x * x) * dd_recip(x) * 0.5;
    }
    x
}

fn eigenvector_dd(m: [[i64; 2]; 2], lambda: TwoFloat) -> [TwoFloat; 2] {
    let [[a, b], [c, d]] = m;
    let v1 = [TwoFloat::from(b as f64), lambda - a as f64];
    let v2 = [lambda - d as f64, TwoFloat::from(c as f64)];
    let n1 = dd_sqrt(v1[0] * v1[0] + v1[1] * v1[1]);
    let n2 = dd_sqrt(v2[0] * v2[0] + v2[1] * v2[1]);
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    let inv = dd_recip(n);
    let mut e = [v[0] * inv, v[1] * inv];
    if e[0] < 0.0 || (e[0] == 0.0 && e[1] < 0.0) {
        e = [-e[0], -e[1]];
    }
    e
}

fn mul_raw(m: [[i64; 2]; 2], x: u128, y: u128) -> (u128, u128) {
    let k = |c: i64| c as i128 as u128;
    (
        k(m[0][0]).wrapping_mul(x).wrapping_add(k(m[0][1]).wrapping_mul(y)),
        k(m[1][0]).wrapping_mul(x).wrapping_add(k(m[1][1]).wrapping_mul(y)),
    )
}

impl ToralAutomorphism {
    /// Eigenvalue of the stable direction for f^-1, i.e. the common
    /// contraction rate max(|lambda_s|, 1/|lambda_u|).
    pub fn lambda(&self) -> f64 {
        self.lambda_s.abs().max(1.0 / self.lambda_u.abs())
    }

    /// Operator 2-norm of the matrix.
    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    /// Cartesian vector to eigen-coordinates.
    pub fn to_eigen(&self, v: [f64; 2]) -> Displacement {
        let t = &self.to_eigen;
        Displacement {
            du: t[0][0] * v[0] + t[0][1] * v[1],
            ds: t[1][0] * v[0] + t[1][1] * v[1],
        }
    }

    /// Eigen-coordinates to a Cartesian vector.
    pub fn from_eigen(&self, du: f64, ds: f64) -> [f64; 2] {
        [du * self.e_u[0] + ds * self.e_s[0], du * self.e_u[1] + ds * self.e_s[1]]
    }

    /// Max row norm of the change of basis to eigen-coordinates: a lift of
    /// length r has eigen-coordinates bounded by kappa * r.
    pub fn kappa(&self) -> f64 {
        let t = &self.to_eigen;
        t[0][0].hypot(t[0][1]).max(t[1][0].hypot(t[1][1]))
    }

    /// p ⊕ du·e_u ⊕ ds·e_s.
    pub fn offset(&self, p: &TorusPoint, du: f64, ds: f64) -> TorusPoint {
        p.translate(self.from_eigen(du, ds))
    }

    pub(crate) fn precise_eigen(&self) -> PreciseEigen {
        let [[a, _], [_, d]] = self.matrix;
        let trace = a + d;
        let disc = TwoFloat::from((trace * trace - 4 * self.det) as f64);
        let root = dd_sqrt(disc);
        let signed = if trace >= 0 { root } else { -root };
        let lambda_u = (signed + trace as f64) / 2.0;
        let lambda_s = dd_recip(lambda_u) * self.det as f64;
        let e_u = eigenvector_dd(self.matrix, lambda_u);
        let e_s = eigenvector_dd(self.matrix, lambda_s);
        let ib = dd_recip(e_u[0] * e_s[1] - e_s[0] * e_u[1]);
        PreciseEigen {
            lambda_u,
            lambda_s,
            e_u,
            e_s,
            to_eigen: [[e_s[1] * ib, -e_s[0] * ib], [-e_u[1] * ib, e_u[0] * ib]],
        }
    }

    /// Apply the integer matrix to a grid index pair mod n.
    pub fn apply_grid(&self, g: [i64; 2], n: i64) -> [i64; 2] {
        let m = &self.matrix;
        [
            (m[0][0] * g[0] + m[0][1] * g[1]).rem_euclid(n),
            (m[1][0] * g[0] + m[1][1] * g[1]).rem_euclid(n),
        ]
    }

    pub fn apply_inverse_grid(&self, g: [i64; 2], n: i64) -> [i64; 2] {
        let m = &self.inverse;
        [
            (m[0][0] * g[0] + m[0][1] * g[1]).rem_euclid(n),
            (m[1][0] * g[0] + m[1][1] * g[1]).rem_euclid(n),
        ]
    }
}

/// (matrix · p) mod 1, exact.
pub fn apply(f: &ToralAutomorphism, p: &TorusPoint) -> TorusPoint {
    let (x, y) = mul_raw(f.matrix, p.x, p.y);
    TorusPoint { x, y }
}

/// Inverse of [`apply`], exact.
pub fn apply_inverse(f: &ToralAutomorphism, p: &TorusPoint) -> TorusPoint {
    let (x, y) = mul_raw(f.inverse, p.x, p.y);
    TorusPoint { x, y }
}

/// f^n(p) for any integer n, exact.
pub fn iterate(f: &ToralAutomorphism, p: &TorusPoint, n: i64) -> TorusPoint {
    let mut q = *p;
    for _ in 0..n.unsigned_abs() {
        q = if n > 0 { apply(f, &q) } else { apply_inverse(f, &q) };
    }
    q
}

/// Exact fixed-point nearest lift of q − p, plus whether a component hit the
/// −1/2 tie.
pub(crate) fn lift_raw(p: &TorusPoint, q: &TorusPoint) -> ([i128; 2], bool) {
    let dx = q.x.wrapping_sub(p.x) as i128;
    let dy = q.y.wrapping_sub(p.y) as i128;
    ([dx, dy], dx == i128::MIN || dy == i128::MIN)
}

/// Cartesian nearest lift of q − p, components in [−1/2, 1/2).
pub fn lift(p: &TorusPoint, q: &TorusPoint) -> [f64; 2] {
    let ([dx, dy], _) = lift_raw(p, q);
    [signed_to_f64(dx), signed_to_f64(dy)]
}

pub fn displacement(
    f: &ToralAutomorphism,
    p: &TorusPoint,
    q: &TorusPoint,
) -> Result<Displacement, TorusError> {
    let (_, tie) = lift_raw(p, q);
    if tie {
        return Err(TorusError::AmbiguousLift);
    }
    Ok(f.to_eigen(lift(p, q)))
}

/// Like [`displacement`] but takes the −1/2 representative on ties.
pub fn displacement_lossy(f: &ToralAutomorphism, p: &TorusPoint, q: &TorusPoint) -> Displacement {
    f.to_eigen(lift(p, q))
}

pub fn torus_distance(p: &TorusPoint, q: &TorusPoint) -> f64 {
    let v = lift(p, q);
    v[0].hypot(v[1])
}

/// (K, lambda) of the Anosov inequalities. K = 1 because the eigenbasis is
/// used as the adapted frame.
pub fn hyperbolicity_constants(f: &ToralAutomorphism) -> (f64, f64) {
    (1.0, f.lambda())
}
