//! Non-aggressive relaxed maximum-margin classifier, certificate form.

use crate::cast;
use crate::linalg::{norm_sq, SparseVector};
use crate::Scalar;

use super::{
    ClassifierError, HypothesisState, Label, OnlineClassifier, SkipReason, TrialOutcome, UpdateKind,
    DEPENDENCE_TOL,
};

/// Three-way rule driven by the projection γ = y(w·a)/‖w‖ against the
/// certificate ℓ:
///
/// * γ ≥ 1/ℓ — the example is already held with enough margin: no change.
/// * 1/ℓ > γ ≥ ‖a‖²·ℓ — the example alone is a better hypothesis:
///   w ← y·a, ℓ ← 1/‖a‖ (replace).
/// * γ < min(ℓ‖a‖², 1/ℓ) — additive step λ = (1 − ℓγ)‖w‖ / (ℓ‖a‖² − γ)
///   with ℓ² ← ℓ² + (ℓγ − 1)²/(‖a‖² − γ²).
///
/// Examples (anti)parallel to the hypothesis are skipped: the additive
/// denominators vanish there and the example carries no new direction.
#[derive(Debug, Clone)]
pub struct Naromma<T> {
    state: HypothesisState<T>,
}

impl<T: Scalar> Naromma<T> {
    pub fn new(dim: usize) -> Self {
        Self { state: HypothesisState::new(dim) }
    }
}

impl<T: Scalar> OnlineClassifier<T> for Naromma<T> {
    fn name(&self) -> &'static str {
        "naromma"
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
            let ell = T::one() / norm_sq(a).sqrt();
            self.state.assign(T::one(), y, a, ell)?;
            return Ok(TrialOutcome::init(trial, T::one(), ell));
        }

        let score = self.state.score(a)?;
        let margin = y.sign::<T>() * score;
        let ell = self.state.ell();
        let mut outcome = TrialOutcome {
            predicted: Some(Label::from_score(score)),
            margin: Some(margin),
            ell_after: ell,
            ..TrialOutcome::new(trial)
        };
        if a.is_zero() {
            outcome.skip = Some(SkipReason::ZeroNorm);
            return Ok(outcome);
        }
        let norm_w = self.state.norm_w();
        let norm_a_sq = norm_sq(a);
        let gamma = margin / norm_w;
        outcome.gamma = Some(gamma);
        if self.state.linearly_dependent(score, norm_a_sq) {
            outcome.skip = Some(SkipReason::LinearDependence);
            return Ok(outcome);
        }

        if gamma >= T::one() / ell {
            // Held with margin already.
        } else if gamma >= norm_a_sq * ell {
            let new_ell = T::one() / norm_a_sq.sqrt();
            self.state.assign(T::one(), y, a, new_ell)?;
            outcome.update_kind = UpdateKind::Replace;
            outcome.lambda = T::one();
            outcome.ell_after = new_ell;
        } else {
            let step_denom = ell * norm_a_sq - gamma;
            assert!(
                step_denom > T::zero(),
                "additive branch requires ell*|a|^2 > gamma (got {step_denom:?} at trial {trial})",
            );
            let lambda = (T::one() - ell * gamma) * norm_w / step_denom;
            assert!(lambda > T::zero(), "additive step must be positive (got {lambda:?} at trial {trial})");
            // The dependence guard keeps ‖a‖² − γ² bounded away from zero.
            let cert_denom = norm_a_sq - gamma * gamma;
            debug_assert!(cert_denom > norm_a_sq * cast::<T>(DEPENDENCE_TOL));
            let gain = ell * gamma - T::one();
            let new_ell = (ell * ell + gain * gain / cert_denom).sqrt();
            self.state.additive(lambda, y, a, new_ell)?;
            outcome.update_kind = UpdateKind::Additive;
            outcome.lambda = lambda;
            outcome.ell_after = new_ell;
        }
        Ok(outcome)
    }
}
