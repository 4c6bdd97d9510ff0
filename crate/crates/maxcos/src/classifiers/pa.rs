//! Passive-aggressive baseline: hinge-loss step, no aggressiveness cap.

use crate::linalg::{norm_sq, SparseVector};
use crate::Scalar;

use super::{
    ClassifierError, HypothesisState, Label, OnlineClassifier, SkipReason, TrialOutcome, UpdateKind,
};

/// λ = max(0, 1 − y(w·a)) / ‖a‖²; the post-update margin on the current
/// example is exactly 1. The unbounded variant (no C cap) is used, which is
/// a caveat when comparing against capped implementations.
///
/// Convention starts from w = 0; to keep prediction streams aligned with the
/// other algorithms, the first usable example is consumed as an update from
/// the zero hypothesis (λ = 1/‖a₀‖², so w₁ = y₀·a₀/‖a₀‖²) without a
/// prediction, recorded as `Init`.
#[derive(Debug, Clone)]
pub struct Pa<T> {
    state: HypothesisState<T>,
}

impl<T: Scalar> Pa<T> {
    pub fn new(dim: usize) -> Self {
        Self { state: HypothesisState::new(dim) }
    }
}

impl<T: Scalar> OnlineClassifier<T> for Pa<T> {
    fn name(&self) -> &'static str {
        "pa"
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
            let lambda = T::one() / norm_sq(a);
            self.state.assign(lambda, y, a, T::zero())?;
            return Ok(TrialOutcome::init(trial, lambda, T::zero()));
        }

        let score = self.state.score(a)?;
        let margin = y.sign::<T>() * score;
        let mut outcome = TrialOutcome {
            predicted: Some(Label::from_score(score)),
            margin: Some(margin),
            ..TrialOutcome::new(trial)
        };
        if a.is_zero() {
            outcome.skip = Some(SkipReason::ZeroNorm);
            return Ok(outcome);
        }
        let loss = T::one() - margin;
        if loss > T::zero() {
            let lambda = loss / norm_sq(a);
            self.state.additive(lambda, y, a, T::zero())?;
            outcome.update_kind = UpdateKind::Additive;
            outcome.lambda = lambda;
        }
        Ok(outcome)
    }
}
