//! Product rectangles in eigen-coordinates and finite unions of them.
//!
//! A rectangle is a base point plus an unstable and a stable interval; its
//! point set is {base ⊕ u·e_u ⊕ s·e_s}. Comparisons across charts go through
//! float lifts, so membership of a point on a face is decided up to [`TOL`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::local_product::{Direction, FiberSegment};
use crate::torus_model::{
    apply, apply_inverse, displacement_lossy, lift_raw, Displacement, ToralAutomorphism,
    TorusPoint,
};

/// Eigen-coordinate slack for face membership.
pub const TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RectError {
    #[error("point is not in the rectangle")]
    NotInRectangle,
    #[error("rectangles have no common chart (diameters {0} and {1})")]
    ChartConflict(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn point(t: f64) -> Self {
        Interval::closed(t, t)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// No points at all (a closed degenerate interval is not empty).
    pub fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.lo_closed && self.hi_closed))
    }

    /// Positive length beyond the tolerance.
    pub fn has_interior(&self) -> bool {
        self.hi - self.lo > TOL
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo - TOL } else { t > self.lo + TOL };
        let below = if self.hi_closed { t <= self.hi + TOL } else { t < self.hi - TOL };
        above && below
    }

    /// Strictly inside, at least `TOL` from both ends.
    pub fn contains_interior(&self, t: f64) -> bool {
        t > self.lo + TOL && t < self.hi - TOL
    }

    pub fn shift(&self, d: f64) -> Self {
        Interval { lo: self.lo + d, hi: self.hi + d, ..*self }
    }

    /// Image under t ↦ l·t, flipping for negative l.
    pub fn scale(&self, l: f64) -> Self {
        if l >= 0.0 {
            Interval { lo: self.lo * l, hi: self.hi * l, ..*self }
        } else {
            Interval {
                lo: self.hi * l,
                hi: self.lo * l,
                lo_closed: self.hi_closed,
                hi_closed: self.lo_closed,
            }
        }
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.total_cmp(&o.lo) {
            Ordering::Greater => (self.lo, self.lo_closed),
            Ordering::Less => (o.lo, o.lo_closed),
            Ordering::Equal => (self.lo, self.lo_closed && o.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.total_cmp(&o.hi) {
            Ordering::Less => (self.hi, self.hi_closed),
            Ordering::Greater => (o.hi, o.hi_closed),
            Ordering::Equal => (self.hi, self.hi_closed && o.hi_closed),
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }

    /// Closed sets meet, allowing a gap of up to `TOL`.
    pub fn meets(&self, o: &Interval) -> bool {
        self.lo.max(o.lo) <= self.hi.min(o.hi) + TOL
    }

    /// Length of the overlap, ignoring overlaps below `TOL`.
    pub fn overlap(&self, o: &Interval) -> f64 {
        let w = self.hi.min(o.hi) - self.lo.max(o.lo);
        if w > TOL {
            w
        } else {
            0.0
        }
    }

    /// self \ o: up to two pieces, open where they border o.
    pub fn minus(&self, o: &Interval) -> Vec<Interval> {
        let mut out = Vec::new();
        let left = Interval { hi: o.lo, hi_closed: !o.lo_closed, ..*self }.intersect(self);
        if !left.is_empty() {
            out.push(left);
        }
        let right = Interval { lo: o.hi, lo_closed: !o.hi_closed, ..*self }.intersect(self);
        if !right.is_empty() {
            out.push(right);
        }
        out
    }

    pub fn interior(&self) -> Interval {
        Interval::open(self.lo, self.hi)
    }

    pub fn closure(&self) -> Interval {
        Interval::closed(self.lo, self.hi)
    }

    pub fn is_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }

    /// Same endpoints up to `TOL` and the same flags.
    pub fn approx_eq(&self, o: &Interval) -> bool {
        (self.lo - o.lo).abs() <= TOL
            && (self.hi - o.hi).abs() <= TOL
            && self.lo_closed == o.lo_closed
            && self.hi_closed == o.hi_closed
    }

    fn key(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Cartesian corners of the box [iu] × [is] placed at the origin.
fn corner_offsets(f: &ToralAutomorphism, iu: &Interval, is: &Interval) -> [[f64; 2]; 4] {
    [
        f.from_eigen(iu.lo, is.lo),
        f.from_eigen(iu.hi, is.lo),
        f.from_eigen(iu.hi, is.hi),
        f.from_eigen(iu.lo, is.hi),
    ]
}

fn box_diameter(f: &ToralAutomorphism, iu: &Interval, is: &Interval) -> f64 {
    let a = f.from_eigen(iu.width(), is.width());
    let b = f.from_eigen(iu.width(), -is.width());
    a[0].hypot(a[1]).max(b[0].hypot(b[1]))
}

fn box_area(f: &ToralAutomorphism, iu: &Interval, is: &Interval) -> f64 {
    let jac = (f.e_u[0] * f.e_s[1] - f.e_s[0] * f.e_u[1]).abs();
    iu.width() * is.width() * jac
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub base: TorusPoint,
    pub iu: Interval,
    pub is: Interval,
}

/// Flat record used in JSON output.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RectRecord {
    base: TorusPoint,
    iu: [f64; 2],
    is: [f64; 2],
    flags: [bool; 4],
}

impl Serialize for Rectangle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RectRecord {
            base: self.base,
            iu: [self.iu.lo, self.iu.hi],
            is: [self.is.lo, self.is.hi],
            flags: [self.iu.lo_closed, self.iu.hi_closed, self.is.lo_closed, self.is.hi_closed],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rectangle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RectRecord::deserialize(d)?;
        let ok = r.iu.iter().chain(r.is.iter()).all(|v| v.is_finite());
        if !ok || r.iu[0] > r.iu[1] || r.is[0] > r.is[1] {
            return Err(serde::de::Error::custom("rectangle intervals must be finite and ordered"));
        }
        let [a, b, c, e] = r.flags;
        Ok(Rectangle {
            base: r.base,
            iu: Interval { lo: r.iu[0], hi: r.iu[1], lo_closed: a, hi_closed: b },
            is: Interval { lo: r.is[0], hi: r.is[1], lo_closed: c, hi_closed: e },
        })
    }
}

impl Rectangle {
    pub fn new(base: TorusPoint, iu: Interval, is: Interval) -> Self {
        Rectangle { base, iu, is }
    }

    pub fn closed(base: TorusPoint, iu: [f64; 2], is: [f64; 2]) -> Self {
        Rectangle { base, iu: Interval::closed(iu[0], iu[1]), is: Interval::closed(is[0], is[1]) }
    }

    /// Eigen-coordinates of x relative to the base.
    pub fn local(&self, f: &ToralAutomorphism, x: &TorusPoint) -> Displacement {
        displacement_lossy(f, &self.base, x)
    }

    pub fn point(&self, f: &ToralAutomorphism, u: f64, s: f64) -> TorusPoint {
        f.offset(&self.base, u, s)
    }

    pub fn center(&self, f: &ToralAutomorphism) -> TorusPoint {
        self.point(f, self.iu.mid(), self.is.mid())
    }

    pub fn contains(&self, f: &ToralAutomorphism, x: &TorusPoint) -> bool {
        let d = self.local(f, x);
        self.iu.contains(d.du) && self.is.contains(d.ds)
    }

    /// At least `TOL` inside every face.
    pub fn contains_interior(&self, f: &ToralAutomorphism, x: &TorusPoint) -> bool {
        let d = self.local(f, x);
        self.iu.contains_interior(d.du) && self.is.contains_interior(d.ds)
    }

    pub fn diameter(&self, f: &ToralAutomorphism) -> f64 {
        box_diameter(f, &self.iu, &self.is)
    }

    pub fn area(&self, f: &ToralAutomorphism) -> f64 {
        box_area(f, &self.iu, &self.is)
    }

    pub fn is_proper(&self) -> bool {
        self.iu.has_interior() && self.is.has_interior() && self.iu.is_closed() && self.is.is_closed()
    }

    pub fn interior(&self) -> Rectangle {
        Rectangle { base: self.base, iu: self.iu.interior(), is: self.is.interior() }
    }

    pub fn closure(&self) -> Rectangle {
        Rectangle { base: self.base, iu: self.iu.closure(), is: self.is.closure() }
    }

    /// Cartesian corners, as lifts relative to the base.
    pub fn corner_offsets(&self, f: &ToralAutomorphism) -> [[f64; 2]; 4] {
        corner_offsets(f, &self.iu, &self.is)
    }

    /// Same point set, described from another base point.
    pub fn rebase(&self, f: &ToralAutomorphism, base: &TorusPoint) -> Rectangle {
        let o = displacement_lossy(f, base, &self.base);
        Rectangle { base: *base, iu: self.iu.shift(o.du), is: self.is.shift(o.ds) }
    }

    /// W^s(x, R): the stable slice through x.
    ///
    /// Every rectangle handled here is far below the expansivity scale, so
    /// the slice is never clipped by an epsilon-ball.
    pub fn stable_fiber(&self, f: &ToralAutomorphism, x: &TorusPoint) -> Result<FiberSegment, RectError> {
        if !self.contains(f, x) {
            return Err(RectError::NotInRectangle);
        }
        let d = self.local(f, x);
        Ok(FiberSegment { base: *x, direction: Direction::Stable, lo: self.is.lo - d.ds, hi: self.is.hi - d.ds })
    }

    /// W^u(x, R): the unstable slice through x.
    pub fn unstable_fiber(&self, f: &ToralAutomorphism, x: &TorusPoint) -> Result<FiberSegment, RectError> {
        if !self.contains(f, x) {
            return Err(RectError::NotInRectangle);
        }
        let d = self.local(f, x);
        Ok(FiberSegment { base: *x, direction: Direction::Unstable, lo: self.iu.lo - d.du, hi: self.iu.hi - d.du })
    }

    /// The two faces u = au and u = bu.
    pub fn stable_boundary(&self) -> BoxComplex {
        let mut c = BoxComplex::new(self.base);
        c.push(Interval::point(self.iu.lo), self.is.closure());
        c.push(Interval::point(self.iu.hi), self.is.closure());
        c.canonicalize();
        c
    }

    /// The two faces s = as and s = bs.
    pub fn unstable_boundary(&self) -> BoxComplex {
        let mut c = BoxComplex::new(self.base);
        c.push(self.iu.closure(), Interval::point(self.is.lo));
        c.push(self.iu.closure(), Interval::point(self.is.hi));
        c.canonicalize();
        c
    }
}

/// Whether x lies on the boundary of R (within `TOL`).
pub fn on_boundary(f: &ToralAutomorphism, r: &Rectangle, x: &TorusPoint) -> bool {
    r.contains(f, x) && !r.contains_interior(f, x)
}

pub fn contains(f: &ToralAutomorphism, r: &Rectangle, x: &TorusPoint) -> bool {
    r.contains(f, x)
}

pub fn stable_fiber(f: &ToralAutomorphism, r: &Rectangle, x: &TorusPoint) -> Result<FiberSegment, RectError> {
    r.stable_fiber(f, x)
}

pub fn unstable_fiber(f: &ToralAutomorphism, r: &Rectangle, x: &TorusPoint) -> Result<FiberSegment, RectError> {
    r.unstable_fiber(f, x)
}

pub fn stable_boundary(r: &Rectangle) -> BoxComplex {
    r.stable_boundary()
}

pub fn unstable_boundary(r: &Rectangle) -> BoxComplex {
    r.unstable_boundary()
}

pub fn is_proper(r: &Rectangle) -> bool {
    r.is_proper()
}

pub fn diameter(f: &ToralAutomorphism, r: &Rectangle) -> f64 {
    r.diameter(f)
}

/// R1 ∩ R2, in the chart of R1.
pub fn intersect(f: &ToralAutomorphism, r1: &Rectangle, r2: &Rectangle) -> Result<BoxComplex, RectError> {
    let (d1, d2) = (r1.diameter(f), r2.diameter(f));
    let (_, tie) = lift_raw(&r1.base, &r2.base);
    if d1 >= 0.25 || d2 >= 0.25 || tie {
        return Err(RectError::ChartConflict(d1, d2));
    }
    let r2 = r2.rebase(f, &r1.base);
    let mut out = BoxComplex::new(r1.base);
    out.push(r1.iu.intersect(&r2.iu), r1.is.intersect(&r2.is));
    out.canonicalize();
    Ok(out)
}

/// f(R), charted at the image of the centre of R.
///
/// A base far from the rectangle would have its offset multiplied by the
/// eigenvalue and could end up past the half-width of the torus.
pub fn image_rectangle(f: &ToralAutomorphism, r: &Rectangle) -> Rectangle {
    let r = r.rebase(f, &r.center(f));
    Rectangle { base: apply(f, &r.base), iu: r.iu.scale(f.lambda_u), is: r.is.scale(f.lambda_s) }
}

/// f^{-1}(R), charted at the preimage of the centre of R.
pub fn preimage_rectangle(f: &ToralAutomorphism, r: &Rectangle) -> Rectangle {
    let r = r.rebase(f, &r.center(f));
    Rectangle {
        base: apply_inverse(f, &r.base),
        iu: r.iu.scale(1.0 / f.lambda_u),
        is: r.is.scale(1.0 / f.lambda_s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBox {
    pub u: Interval,
    pub s: Interval,
}

impl EigenBox {
    fn is_empty(&self) -> bool {
        self.u.is_empty() || self.s.is_empty()
    }
}

/// A finite union of boxes sharing one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxComplex {
    pub base: TorusPoint,
    pub boxes: Vec<EigenBox>,
    /// Set by [`BoxComplex::canonicalize`] when the interiors are pairwise
    /// disjoint.
    pub canonical: bool,
}

impl BoxComplex {
    pub fn new(base: TorusPoint) -> Self {
        BoxComplex { base, boxes: Vec::new(), canonical: true }
    }

    pub fn from_rect(r: &Rectangle) -> Self {
        let mut c = BoxComplex::new(r.base);
        c.push(r.iu, r.is);
        c
    }

    pub fn push(&mut self, u: Interval, s: Interval) {
        let b = EigenBox { u, s };
        if !b.is_empty() {
            self.boxes.push(b);
            self.canonical = false;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn area(&self, f: &ToralAutomorphism) -> f64 {
        self.boxes.iter().map(|b| box_area(f, &b.u, &b.s)).sum()
    }

    pub fn contains(&self, f: &ToralAutomorphism, x: &TorusPoint) -> bool {
        let d = displacement_lossy(f, &self.base, x);
        self.boxes.iter().any(|b| b.u.contains(d.du) && b.s.contains(d.ds))
    }

    pub fn rectangles(&self) -> Vec<Rectangle> {
        self.boxes.iter().map(|b| Rectangle::new(self.base, b.u, b.s)).collect()
    }

    /// Sort, merge boxes that share a full face, and record disjointness.
    pub fn canonicalize(&mut self) {
        self.boxes.retain(|b| !b.is_empty());
        loop {
            self.boxes.sort_by(|a, b| {
                let (ka, kb) = ((a.u.key(), a.s.key()), (b.u.key(), b.s.key()));
                ka.0 .0
                    .total_cmp(&kb.0 .0)
                    .then(ka.0 .1.total_cmp(&kb.0 .1))
                    .then(ka.1 .0.total_cmp(&kb.1 .0))
                    .then(ka.1 .1.total_cmp(&kb.1 .1))
            });
            let mut merged = false;
            'outer: for i in 0..self.boxes.len() {
                for j in i + 1..self.boxes.len() {
                    if let Some(m) = merge(&self.boxes[i], &self.boxes[j]) {
                        self.boxes[i] = m;
                        self.boxes.remove(j);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        self.canonical = (0..self.boxes.len()).all(|i| {
            (i + 1..self.boxes.len()).all(|j| {
                let (a, b) = (&self.boxes[i], &self.boxes[j]);
                a.u.overlap(&b.u) == 0.0 || a.s.overlap(&b.s) == 0.0
            })
        });
    }
}

/// Union of two boxes when it is itself a box.
fn merge(a: &EigenBox, b: &EigenBox) -> Option<EigenBox> {
    let join = |x: &Interval, y: &Interval| -> Option<Interval> {
        let (first, second) = if x.lo <= y.lo { (x, y) } else { (y, x) };
        let touching = second.lo < first.hi || (second.lo == first.hi && (first.hi_closed || second.lo_closed));
        if !touching {
            return None;
        }
        let (hi, hi_closed) = if second.hi > first.hi {
            (second.hi, second.hi_closed)
        } else if second.hi < first.hi {
            (first.hi, first.hi_closed)
        } else {
            (first.hi, first.hi_closed || second.hi_closed)
        };
        let lo_closed = if first.lo == second.lo { first.lo_closed || second.lo_closed } else { first.lo_closed };
        Some(Interval { lo: first.lo, hi, lo_closed, hi_closed })
    };
    if a.u == b.u {
        join(&a.s, &b.s).map(|s| EigenBox { u: a.u, s })
    } else if a.s == b.s {
        join(&a.u, &b.u).map(|u| EigenBox { u, s: a.s })
    } else {
        None
    }
}
