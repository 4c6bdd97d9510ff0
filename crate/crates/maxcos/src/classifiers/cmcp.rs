//! Conservative maximum-cosine perceptron.

use crate::linalg::{norm_sq, SparseVector};
use crate::Scalar;

use super::{
    ClassifierError, HypothesisState, Label, OnlineClassifier, SkipReason, TrialOutcome, UpdateKind,
};

/// Updates only on mistakes (y(w·a) ≤ 0) with the step that maximizes the
/// worst-case hypothesis–target cosine: λ = ‖w‖/(ℓ‖a‖²). Each update grows
/// the certificate by ℓ² ← ℓ² + 1/‖a‖², so ℓ² counts mistakes in units of
/// 1/‖a‖² and the (R/γ)² mistake bound follows from ℓ ≤ 1/γ.
#[derive(Debug, Clone)]
pub struct Cmcp<T> {
    state: HypothesisState<T>,
}

impl<T: Scalar> Cmcp<T> {
    pub fn new(dim: usize) -> Self {
        Self { state: HypothesisState::new(dim) }
    }
}

impl<T: Scalar> OnlineClassifier<T> for Cmcp<T> {
    fn name(&self) -> &'static str {
        "cmcp"
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
            mu: Some(0),
            ..TrialOutcome::new(trial)
        };
        if a.is_zero() {
            outcome.skip = Some(SkipReason::ZeroNorm);
            return Ok(outcome);
        }
        if margin <= T::zero() {
            let norm_a_sq = norm_sq(a);
            let lambda = self.state.norm_w() / (ell * norm_a_sq);
            let new_ell = (ell * ell + T::one() / norm_a_sq).sqrt();
            self.state.additive(lambda, y, a, new_ell)?;
            outcome.update_kind = UpdateKind::Additive;
            outcome.lambda = lambda;
            outcome.ell_after = new_ell;
            outcome.mu = Some(1);
        }
        Ok(outcome)
    }
}
