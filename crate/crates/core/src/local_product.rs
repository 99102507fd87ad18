//! The bracket [x, y], fiber segments, and the chain of scale constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shadowing::expansivity_constant;
use crate::torus_model::{
    apply, apply_inverse, displacement_lossy, torus_distance, ToralAutomorphism, TorusPoint,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductError {
    #[error("points are {dist} apart, bracket needs less than delta = {delta}")]
    TooFar { dist: f64, delta: f64 },
    #[error("eigen-coordinates ({du}, {ds}) leave the epsilon = {epsilon} box")]
    EpsilonExceeded { du: f64, ds: f64, epsilon: f64 },
    #[error("beta = {beta} violates 2 beta < min(epsilon, delta/2) = {limit}")]
    BudgetInfeasible { beta: f64, limit: f64 },
    #[error("fiber half-width must lie in [0, 1/4), got {0}")]
    BadHalfWidth(f64),
}

/// rho > epsilon > delta > beta > alpha > gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBudget {
    pub rho: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl ConstantsBudget {
    /// Every ordering invariant of the chain.
    pub fn check(&self) -> bool {
        self.epsilon > 0.0
            && self.epsilon <= self.rho / 4.0
            && self.delta <= self.epsilon / 2.0
            && 2.0 * self.beta < self.epsilon.min(self.delta / 2.0)
            && self.alpha > 0.0
            && self.alpha < self.beta
            && self.gamma > 0.0
            && self.gamma < self.beta.min(self.alpha / 2.0)
    }
}

pub fn make_budget(f: &ToralAutomorphism, beta_target: f64) -> Result<ConstantsBudget, ProductError> {
    let rho = expansivity_constant(f);
    let epsilon = 0.99 * rho / 4.0;
    // a lift shorter than delta_1 has both eigen-coordinates below epsilon
    let delta_1 = epsilon / f.kappa();
    let delta = delta_1.min(epsilon / 2.0);
    let limit = epsilon.min(delta / 2.0);
    if !(beta_target > 0.0 && 2.0 * beta_target < limit) {
        return Err(ProductError::BudgetInfeasible { beta: beta_target, limit: limit / 2.0 });
    }
    let alpha = beta_target * (1.0 - f.lambda()) / 2.0;
    let gamma = beta_target.min(alpha / 2.0) / (1.0 + f.op_norm());
    Ok(ConstantsBudget { rho, epsilon, delta, beta: beta_target, alpha, gamma })
}

/// The point W^s(x) ∩ W^u(y).
pub fn bracket(
    f: &ToralAutomorphism,
    budget: &ConstantsBudget,
    x: &TorusPoint,
    y: &TorusPoint,
) -> Result<TorusPoint, ProductError> {
    let dist = torus_distance(x, y);
    if dist >= budget.delta {
        return Err(ProductError::TooFar { dist, delta: budget.delta });
    }
    let d = displacement_lossy(f, y, x);
    if d.du.abs() > budget.epsilon || d.ds.abs() > budget.epsilon {
        return Err(ProductError::EpsilonExceeded { du: d.du, ds: d.ds, epsilon: budget.epsilon });
    }
    Ok(f.offset(y, d.du, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Stable,
    Unstable,
}

/// {base ⊕ t·e_dir : t ∈ [lo, hi]}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSegment {
    pub base: TorusPoint,
    pub direction: Direction,
    pub lo: f64,
    pub hi: f64,
}

impl FiberSegment {
    pub fn point_at(&self, f: &ToralAutomorphism, t: f64) -> TorusPoint {
        match self.direction {
            Direction::Stable => f.offset(&self.base, 0.0, t),
            Direction::Unstable => f.offset(&self.base, t, 0.0),
        }
    }

    /// Whether z lies on the segment, up to `tol` in both eigen-coordinates.
    pub fn contains(&self, f: &ToralAutomorphism, z: &TorusPoint, tol: f64) -> bool {
        let d = displacement_lossy(f, &self.base, z);
        let (along, across) = match self.direction {
            Direction::Stable => (d.ds, d.du),
            Direction::Unstable => (d.du, d.ds),
        };
        across.abs() <= tol && along >= self.lo - tol && along <= self.hi + tol
    }

    /// The segment f(self).
    pub fn image(&self, f: &ToralAutomorphism) -> FiberSegment {
        let l = match self.direction {
            Direction::Stable => f.lambda_s,
            Direction::Unstable => f.lambda_u,
        };
        let (a, b) = (l * self.lo, l * self.hi);
        FiberSegment { base: apply(f, &self.base), direction: self.direction, lo: a.min(b), hi: a.max(b) }
    }

    /// The segment f^{-1}(self).
    pub fn preimage(&self, f: &ToralAutomorphism) -> FiberSegment {
        let l = match self.direction {
            Direction::Stable => f.lambda_s,
            Direction::Unstable => f.lambda_u,
        };
        let (a, b) = (self.lo / l, self.hi / l);
        FiberSegment {
            base: apply_inverse(f, &self.base),
            direction: self.direction,
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    /// Whether self ⊆ other as point sets (same line required), up to tol.
    pub fn within(&self, f: &ToralAutomorphism, other: &FiberSegment, tol: f64) -> bool {
        if self.direction != other.direction {
            return false;
        }
        let d = displacement_lossy(f, &other.base, &self.base);
        let (along, across) = match self.direction {
            Direction::Stable => (d.ds, d.du),
            Direction::Unstable => (d.du, d.ds),
        };
        across.abs() <= tol && self.lo + along >= other.lo - tol && self.hi + along <= other.hi + tol
    }
}

pub fn fiber(x: &TorusPoint, direction: Direction, half_width: f64) -> Result<FiberSegment, ProductError> {
    if !(0.0..0.25).contains(&half_width) {
        return Err(ProductError::BadHalfWidth(half_width));
    }
    Ok(FiberSegment { base: *x, direction, lo: -half_width, hi: half_width })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_model::{displacement, iterate, make_automorphism};

    fn cat() -> ToralAutomorphism {
        make_automorphism([[2, 1], [1, 1]]).unwrap()
    }

    #[test]
    fn budget_examples() {
        let f = cat();
        let b = make_budget(&f, 0.005).unwrap();
        assert!(b.check());
        assert_eq!(b.rho, 0.25);
        assert!((b.epsilon - 0.061875).abs() < 1e-15);
        assert!((b.delta - 0.0309375).abs() < 1e-12);
        assert!(matches!(make_budget(&f, 0.05), Err(ProductError::BudgetInfeasible { .. })));
        assert!(matches!(make_budget(&f, 0.3), Err(ProductError::BudgetInfeasible { .. })));
        // the chain bound 2 beta < delta/2
        assert!(make_budget(&f, 0.0077).is_ok());
        assert!(make_budget(&f, 0.0078).is_err());
    }

    #[test]
    fn bracket_examples() {
        let f = cat();
        let b = make_budget(&f, 0.005).unwrap();
        let x = TorusPoint::new(0.5, 0.5);
        assert_eq!(bracket(&f, &b, &x, &x).unwrap(), x);

        let y = f.offset(&x, 0.01, 0.02);
        let z = bracket(&f, &b, &x, &y).unwrap();
        let expect = f.offset(&x, 0.0, 0.02);
        assert!(torus_distance(&z, &expect) < 1e-15);
        let dx = displacement(&f, &x, &z).unwrap();
        let dy = displacement(&f, &y, &z).unwrap();
        assert!(dx.du.abs() < 1e-12 && dy.ds.abs() < 1e-12);

        let ys = f.offset(&x, 0.0, 0.01);
        assert!(torus_distance(&bracket(&f, &b, &x, &ys).unwrap(), &ys) < 1e-15);
        let xu = f.offset(&x, 0.01, 0.0);
        assert!(torus_distance(&bracket(&f, &b, &xu, &x).unwrap(), &xu) < 1e-15);

        let far = TorusPoint::new(0.6, 0.6);
        assert!(matches!(bracket(&f, &b, &x, &far), Err(ProductError::TooFar { .. })));
    }

    #[test]
    fn stable_fiber_at_fixed_point_stays_close() {
        let f = cat();
        let seg = fiber(&TorusPoint::ORIGIN, Direction::Stable, 0.1).unwrap();
        for k in 0..=20 {
            let z = seg.point_at(&f, -0.1 + 0.01 * k as f64);
            for n in 0..=30 {
                assert!(torus_distance(&iterate(&f, &z, n), &TorusPoint::ORIGIN) <= 0.1 + 1e-15);
            }
        }
    }

    #[test]
    fn unstable_fiber_contracts_backwards() {
        let f = cat();
        let seg = fiber(&TorusPoint::new(0.2, 0.9), Direction::Unstable, 0.1).unwrap();
        let z = seg.point_at(&f, 0.07);
        // rounding in the stable coordinate of z grows like lambda_u^n backwards
        for n in 0..=15 {
            let d = torus_distance(&iterate(&f, &z, -n), &iterate(&f, &seg.base, -n));
            assert!(d <= 0.07 * f.lambda_s.powi(n as i32) + 1e-12);
        }
    }

    #[test]
    fn degenerate_fiber() {
        let seg = fiber(&TorusPoint::ORIGIN, Direction::Unstable, 0.0).unwrap();
        assert_eq!((seg.lo, seg.hi), (0.0, 0.0));
        assert!(fiber(&TorusPoint::ORIGIN, Direction::Stable, 0.25).is_err());
    }

    #[test]
    fn segment_image_and_inclusion() {
        let f = cat();
        let seg = FiberSegment { base: TorusPoint::new(0.3, 0.3), direction: Direction::Stable, lo: -0.02, hi: 0.05 };
        let img = seg.image(&f);
        assert!((img.hi - 0.05 * f.lambda_s).abs() < 1e-16);
        let back = img.preimage(&f);
        assert!(back.within(&f, &seg, 1e-14) && seg.within(&f, &back, 1e-14));
        let wide = FiberSegment { lo: -0.1, hi: 0.1, ..img };
        assert!(img.within(&f, &wide, 0.0) && !wide.within(&f, &img, 1e-9));
    }
}
