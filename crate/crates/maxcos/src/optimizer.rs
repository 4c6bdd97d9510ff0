//! Closed-form maximizers for the two one-dimensional ratio objectives that
//! produce the classifiers' step lengths.
//!
//! Both objectives are maximized over the half-line x ≥ 0 (x is a step length
//! divided by the hypothesis norm, so negative x never arises):
//!
//! * simple:  Φ(x) = (r + px) / √(s + qx²)
//! * shifted: Φ(x) = (r + px) / √(s + qx² + 2tqx)
//!
//! Each has at most one interior stationary point, so the supremum is either
//! that point or one of the boundaries {0, ∞}. The shifted analysis branches
//! on sign(r − pt) and sign(ps − rtq); comparisons at the branch boundaries
//! are exact floating-point comparisons — collisions are measure-zero and the
//! adjacent branches agree in the limit (covered by the grid-oracle property
//! tests).

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("scale coefficients must be positive: s = {s}, q = {q}")]
    NonPositiveScale { s: f64, q: f64 },
    #[error("denominator can vanish: need s > qt² (s = {s}, q = {q}, t = {t})")]
    DegenerateDenominator { s: f64, q: f64, t: f64 },
}

fn as_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Φ(x) = (r + px) / √(s + qx²), valid when s > 0 and q > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleRatioProblem<T> {
    pub r: T,
    pub p: T,
    pub s: T,
    pub q: T,
}

impl<T: Scalar> SimpleRatioProblem<T> {
    pub fn new(r: T, p: T, s: T, q: T) -> Result<Self, OptimizerError> {
        if s <= T::zero() || q <= T::zero() {
            return Err(OptimizerError::NonPositiveScale { s: as_f64(s), q: as_f64(q) });
        }
        Ok(Self { r, p, s, q })
    }

    pub fn value_at(&self, x: T) -> T {
        (self.r + self.p * x) / (self.s + self.q * x * x).sqrt()
    }
}

/// Φ(x) = (r + px) / √(s + qx² + 2tqx), valid when q > 0 and s > qt²
/// (equivalently: the denominator is positive for every real x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedRatioProblem<T> {
    pub r: T,
    pub p: T,
    pub s: T,
    pub q: T,
    pub t: T,
}

impl<T: Scalar> ShiftedRatioProblem<T> {
    pub fn new(r: T, p: T, s: T, q: T, t: T) -> Result<Self, OptimizerError> {
        if q <= T::zero() {
            return Err(OptimizerError::NonPositiveScale { s: as_f64(s), q: as_f64(q) });
        }
        if s <= q * t * t {
            return Err(OptimizerError::DegenerateDenominator {
                s: as_f64(s),
                q: as_f64(q),
                t: as_f64(t),
            });
        }
        Ok(Self { r, p, s, q, t })
    }

    pub fn value_at(&self, x: T) -> T {
        let two = T::one() + T::one();
        (self.r + self.p * x) / (self.s + self.q * x * x + two * self.t * self.q * x).sqrt()
    }
}

/// Where the supremum over x ≥ 0 sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location<T> {
    /// Attained at the given x ≥ 0 (possibly exactly 0 when the interior
    /// stationary point degenerates onto the boundary).
    Finite(T),
    /// Attained at the boundary x = 0.
    AtZero,
    /// Supremum only: Φ approaches the value as x → ∞.
    AtInfinity,
}

/// Supremum location and value for one problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerVerdict<T> {
    pub location: Location<T>,
    pub value: T,
}

impl<T: Scalar> OptimizerVerdict<T> {
    /// The maximizing x when the supremum is attained.
    pub fn argmax(&self) -> Option<T> {
        match self.location {
            Location::Finite(x) => Some(x),
            Location::AtZero => Some(T::zero()),
            Location::AtInfinity => None,
        }
    }
}

/// Maximizes the simple ratio over x ≥ 0.
///
/// For r > 0 the interior stationary point ps/(rq) is the global maximum;
/// it lies on the half-line iff p ≥ 0. In every other case the supremum is
/// a boundary value, with ties resolved to x = 0 (a finite step is always
/// realizable; ∞ needs a dedicated replace-hypothesis move).
pub fn maximize_simple<T: Scalar>(pb: &SimpleRatioProblem<T>) -> OptimizerVerdict<T> {
    let SimpleRatioProblem { r, p, s, q } = *pb;
    let zero = T::zero();
    let phi_zero = r / s.sqrt();
    let phi_inf = p / q.sqrt();
    if r > zero {
        if p >= zero {
            let value = (r * r / s + p * p / q).sqrt();
            OptimizerVerdict { location: Location::Finite(p * s / (r * q)), value }
        } else {
            OptimizerVerdict { location: Location::AtZero, value: phi_zero }
        }
    } else if r == zero {
        if p > zero {
            OptimizerVerdict { location: Location::AtInfinity, value: phi_inf }
        } else {
            OptimizerVerdict { location: Location::AtZero, value: phi_zero }
        }
    } else if phi_inf > phi_zero {
        // Interior stationary point (if on the half-line) is a minimum here;
        // the supremum is the better boundary.
        OptimizerVerdict { location: Location::AtInfinity, value: phi_inf }
    } else {
        OptimizerVerdict { location: Location::AtZero, value: phi_zero }
    }
}

/// Maximizes the shifted ratio over x ≥ 0 by the six-way case split on
/// sign(r − pt) and sign(ps − rtq).
pub fn maximize_shifted<T: Scalar>(pb: &ShiftedRatioProblem<T>) -> OptimizerVerdict<T> {
    let ShiftedRatioProblem { r, p, s, q, t } = *pb;
    let zero = T::zero();
    let r_pt = r - p * t;
    let disc = p * s - r * t * q;
    let phi_zero = r / s.sqrt();
    let phi_inf = p / q.sqrt();
    if r_pt == zero {
        // Φ is monotone: increasing iff p > 0.
        if p > zero {
            OptimizerVerdict { location: Location::AtInfinity, value: phi_inf }
        } else {
            OptimizerVerdict { location: Location::AtZero, value: phi_zero }
        }
    } else if r_pt > zero {
        if disc >= zero {
            let x_star = disc / (q * r_pt);
            let value = (r_pt * r_pt / (s - q * t * t) + p * p / q).sqrt();
            OptimizerVerdict { location: Location::Finite(x_star), value }
        } else {
            // Maximum sits at negative x; Φ decreases on the half-line.
            OptimizerVerdict { location: Location::AtZero, value: phi_zero }
        }
    } else if disc >= zero {
        OptimizerVerdict { location: Location::AtInfinity, value: phi_inf }
    } else if phi_inf > phi_zero {
        // Interior stationary point is a minimum; compare boundaries,
        // ties to x = 0.
        OptimizerVerdict { location: Location::AtInfinity, value: phi_inf }
    } else {
        OptimizerVerdict { location: Location::AtZero, value: phi_zero }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple(r: f64, p: f64, s: f64, q: f64) -> OptimizerVerdict<f64> {
        maximize_simple(&SimpleRatioProblem::new(r, p, s, q).unwrap())
    }

    fn shifted(r: f64, p: f64, s: f64, q: f64, t: f64) -> OptimizerVerdict<f64> {
        maximize_shifted(&ShiftedRatioProblem::new(r, p, s, q, t).unwrap())
    }

    #[test]
    fn simple_interior_maximum() {
        let v = simple(1.0, 1.0, 1.0, 1.0);
        assert_eq!(v.location, Location::Finite(1.0));
        assert!((v.value - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn simple_monotone_increasing() {
        let v = simple(0.0, 1.0, 1.0, 1.0);
        assert_eq!(v.location, Location::AtInfinity);
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn simple_decreasing_takes_zero() {
        let v = simple(1.0, -1.0, 1.0, 1.0);
        assert_eq!(v.location, Location::AtZero);
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn simple_negative_r_boundary_comparison() {
        // Minimum in the interior; far boundary wins.
        let v = simple(-2.0, -1.0, 1.0, 1.0);
        assert_eq!(v.location, Location::AtInfinity);
        assert_eq!(v.value, -1.0);
        // Symmetric values tie; ties go to zero.
        let v = simple(-1.0, -1.0, 1.0, 1.0);
        assert_eq!(v.location, Location::AtZero);
        assert_eq!(v.value, -1.0);
    }

    #[test]
    fn shifted_monotone_increasing() {
        let v = shifted(1.0, 1.0, 3.0, 1.0, 1.0);
        assert_eq!(v.location, Location::AtInfinity);
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn shifted_interior_maximum() {
        let v = shifted(2.0, 1.0, 3.0, 1.0, 1.0);
        assert_eq!(v.location, Location::Finite(1.0));
        assert!((v.value - 1.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn shifted_boundary_comparison_takes_zero() {
        let v = shifted(0.0, -1.0, 2.0, 1.0, -1.0);
        assert_eq!(v.location, Location::AtZero);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn shifted_stationary_on_boundary_matches_zero_value() {
        // ps = rtq puts the stationary point exactly at 0.
        let v = shifted(2.0, 1.0, 2.0, 1.0, 1.0);
        assert_eq!(v.location, Location::Finite(0.0));
        assert!((v.value - 2.0 / 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constructors_reject_invalid_scales() {
        assert!(matches!(
            SimpleRatioProblem::new(1.0, 1.0, 0.0, 1.0),
            Err(OptimizerError::NonPositiveScale { .. })
        ));
        assert!(matches!(
            SimpleRatioProblem::new(1.0, 1.0, 1.0, -2.0),
            Err(OptimizerError::NonPositiveScale { .. })
        ));
        assert!(matches!(
            ShiftedRatioProblem::new(1.0, 1.0, 1.0, 1.0, 1.0),
            Err(OptimizerError::DegenerateDenominator { .. })
        ));
        assert!(matches!(
            ShiftedRatioProblem::new(1.0, 1.0, 1.0, -1.0, 0.0),
            Err(OptimizerError::NonPositiveScale { .. })
        ));
    }

    #[test]
    fn verdict_argmax() {
        assert_eq!(simple(1.0, 1.0, 1.0, 1.0).argmax(), Some(1.0));
        assert_eq!(simple(1.0, -1.0, 1.0, 1.0).argmax(), Some(0.0));
        assert_eq!(simple(0.0, 1.0, 1.0, 1.0).argmax(), None);
    }
}
