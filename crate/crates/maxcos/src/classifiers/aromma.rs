//! Aggressive relaxed maximum-margin classifier.

use crate::linalg::{norm_sq, SparseVector};
use crate::Scalar;

use super::{
    ClassifierError, HypothesisState, Label, OnlineClassifier, SkipReason, TrialOutcome, UpdateKind,
};

/// Margin-driven three-way rule on y(u·a):
///
/// * ≥ 1 — no change.
/// * in [‖a‖²‖u‖², 1) — replace: u ← (y/‖a‖²)·a.
/// * otherwise — affine step u ← c·u + d·a with
///   c = (‖a‖²‖u‖² − y(u·a)) / (‖a‖²‖u‖² − (u·a)²),
///   d = ‖u‖²(y − u·a) / (‖a‖²‖u‖² − (u·a)²).
///
/// The hypothesis norm ‖u‖ is itself the certificate: this rule keeps the
/// same direction and the same update types as [`super::Naromma`] on any
/// shared stream, with ‖u‖ equal to that algorithm's ℓ, which is what the
/// equivalence checks in the `certificate` module assert. Examples
/// (anti)parallel to u are skipped — the affine denominator vanishes.
#[derive(Debug, Clone)]
pub struct AggressiveRomma<T> {
    state: HypothesisState<T>,
}

impl<T: Scalar> AggressiveRomma<T> {
    pub fn new(dim: usize) -> Self {
        Self { state: HypothesisState::new(dim) }
    }
}

impl<T: Scalar> OnlineClassifier<T> for AggressiveRomma<T> {
    fn name(&self) -> &'static str {
        "aromma"
    }

    fn state(&self) -> &HypothesisState<T> {
        &self.state
    }

    fn observe(&mut self, a: &SparseVector<T>, y: Label) -> Result<TrialOutcome<T>, ClassifierError> {
        let trial = self.state.next_trial();
        if !self.state.initialized() {
            if a.is_zero() {
                return Ok(TrialOutcome::preinit_skip(trial));
            }
            // u₁ = (y₀/‖a₀‖²)·a₀, so ‖u₁‖ = 1/‖a₀‖.
            let scale = T::one() / norm_sq(a);
            let ell = norm_sq(a).sqrt() * scale;
            self.state.assign(scale, y, a, ell)?;
            return Ok(TrialOutcome::init(trial, scale, ell));
        }

        let score = self.state.score(a)?;
        let margin = y.sign::<T>() * score;
        let mut outcome = TrialOutcome {
            predicted: Some(Label::from_score(score)),
            margin: Some(margin),
            ell_after: self.state.ell(),
            ..TrialOutcome::new(trial)
        };
        if a.is_zero() {
            outcome.skip = Some(SkipReason::ZeroNorm);
            return Ok(outcome);
        }
        let norm_u_sq = self.state.norm_sq_w();
        let norm_a_sq = norm_sq(a);
        outcome.gamma = Some(margin / self.state.norm_w());
        if self.state.linearly_dependent(score, norm_a_sq) {
            outcome.skip = Some(SkipReason::LinearDependence);
            return Ok(outcome);
        }

        if margin >= T::one() {
            // Held with unit margin already.
        } else if margin >= norm_a_sq * norm_u_sq {
            let scale = T::one() / norm_a_sq;
            let new_ell = norm_a_sq.sqrt() * scale;
            self.state.assign(scale, y, a, new_ell)?;
            outcome.update_kind = UpdateKind::Replace;
            outcome.lambda = scale;
            outcome.ell_after = new_ell;
        } else {
            // The dependence guard keeps this denominator positive.
            let denom = norm_a_sq * norm_u_sq - score * score;
            let c = (norm_a_sq * norm_u_sq - margin) / denom;
            let lambda = norm_u_sq * (T::one() - margin) / denom;
            debug_assert!(c > T::zero() && lambda > T::zero());
            self.state.affine(c, lambda, y, a)?;
            outcome.update_kind = UpdateKind::Additive;
            outcome.lambda = lambda;
            outcome.ell_after = self.state.ell();
        }
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(entries: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(entries)
    }

    #[test]
    fn init_scales_by_inverse_norm_sq() {
        let mut clf = AggressiveRomma::<f64>::new(2);
        let o = clf.observe(&sv(&[2.0, 0.0]), Label::Pos).unwrap();
        assert_eq!(o.update_kind, UpdateKind::Init);
        assert_eq!(clf.state().w().as_slice(), &[0.5, 0.0]);
        assert_eq!(clf.state().ell(), 0.5);
    }

    #[test]
    fn unit_margin_is_passive() {
        let mut clf = AggressiveRomma::<f64>::new(2);
        clf.observe(&sv(&[1.0, 0.0]), Label::Pos).unwrap(); // u = (1, 0)
        let o = clf.observe(&sv(&[1.5, 0.5]), Label::Pos).unwrap();
        assert_eq!(o.margin, Some(1.5));
        assert_eq!(o.update_kind, UpdateKind::None);
        assert_eq!(clf.state().w().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn mid_margin_replaces() {
        let mut clf = AggressiveRomma::<f64>::new(2);
        clf.observe(&sv(&[2.0, 0.0]), Label::Pos).unwrap(); // u = (0.5, 0)
        let o = clf.observe(&sv(&[1.0, 1.0]), Label::Pos).unwrap();
        // y(u·a) = 0.5, ‖a‖²‖u‖² = 2·0.25 = 0.5: replace with (y/‖a‖²)·a.
        assert_eq!(o.update_kind, UpdateKind::Replace);
        assert_eq!(clf.state().w().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn low_margin_takes_affine_step() {
        let mut clf = AggressiveRomma::<f64>::new(2);
        clf.observe(&sv(&[1.0, 0.0]), Label::Pos).unwrap(); // u = (1, 0)
        let o = clf.observe(&sv(&[0.0, 1.0]), Label::Pos).unwrap();
        // y(u·a) = 0: c = 1, d = 1 → u = (1, 1).
        assert_eq!(o.update_kind, UpdateKind::Additive);
        assert_eq!(o.lambda, 1.0);
        assert_eq!(clf.state().w().as_slice(), &[1.0, 1.0]);
        assert!((clf.state().ell() - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mistake_rescales_retained_hypothesis() {
        let mut clf = AggressiveRomma::<f64>::new(2);
        clf.observe(&sv(&[1.0, 0.0]), Label::Pos).unwrap(); // u = (1, 0)
        let o = clf.observe(&sv(&[1.0, 1.0]), Label::Neg).unwrap();
        // y(u·a) = −1: c = 3, d = −2 → u = (1, −2).
        assert_eq!(o.update_kind, UpdateKind::Additive);
        assert_eq!(o.lambda, 2.0);
        assert_eq!(clf.state().w().as_slice(), &[1.0, -2.0]);
        assert!((clf.state().norm_sq_w() - 5.0).abs() < 1e-12);
    }
}
