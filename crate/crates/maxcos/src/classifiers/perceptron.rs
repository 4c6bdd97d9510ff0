//! Classic perceptron: unit step on every non-positive margin.

use crate::linalg::{norm_sq, SparseVector};
use crate::Scalar;

use super::{
    ClassifierError, HypothesisState, Label, OnlineClassifier, SkipReason, TrialOutcome, UpdateKind,
};

/// Conservative baseline: `w ← w + y·a` whenever y(w·a) ≤ 0. Maintains no
/// certificate (ℓ stays 0), but obeys the same (R/γ)² mistake bound on
/// separable streams.
#[derive(Debug, Clone)]
pub struct Perceptron<T> {
    state: HypothesisState<T>,
}

impl<T: Scalar> Perceptron<T> {
    pub fn new(dim: usize) -> Self {
        Self { state: HypothesisState::new(dim) }
    }
}

impl<T: Scalar> OnlineClassifier<T> for Perceptron<T> {
    fn name(&self) -> &'static str {
        "perceptron"
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
            // Same as one update from the zero hypothesis: w₁ = y₀·a₀.
            self.state.assign(T::one(), y, a, T::zero())?;
            return Ok(TrialOutcome::init(trial, T::one(), T::zero()));
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
        if margin <= T::zero() {
            debug_assert!(norm_sq(a) > T::zero());
            self.state.additive(T::one(), y, a, T::zero())?;
            outcome.update_kind = UpdateKind::Additive;
            outcome.lambda = T::one();
        }
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::run_stream;
    use crate::linalg::SparseVector;

    fn sv(entries: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(entries)
    }

    fn initialized(w: &[f64]) -> Perceptron<f64> {
        let mut clf = Perceptron::new(w.len());
        clf.observe(&sv(w), Label::Pos).unwrap();
        clf
    }

    #[test]
    fn positive_margin_no_update() {
        let mut clf = initialized(&[1.0, 0.0]);
        let o = clf.observe(&sv(&[1.0, 0.0]), Label::Pos).unwrap();
        assert_eq!(o.update_kind, UpdateKind::None);
        assert_eq!(o.margin, Some(1.0));
        assert_eq!(clf.state().w().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn mistake_triggers_unit_step() {
        let mut clf = initialized(&[1.0, 0.0]);
        let o = clf.observe(&sv(&[1.0, 0.0]), Label::Neg).unwrap();
        assert_eq!(o.update_kind, UpdateKind::Additive);
        assert_eq!(o.lambda, 1.0);
        assert_eq!(o.margin, Some(-1.0));
        // Full cancellation: hypothesis back to zero.
        assert_eq!(clf.state().w().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn zero_margin_counts_as_mistake_condition() {
        let mut clf = initialized(&[0.0, 1.0]);
        // Score 0 against an orthogonal example: predicted +1, update fires.
        let o = clf.observe(&sv(&[2.0, 0.0]), Label::Pos).unwrap();
        assert_eq!(o.predicted, Some(Label::Pos));
        assert_eq!(o.update_kind, UpdateKind::Additive);
        assert_eq!(clf.state().w().as_slice(), &[2.0, 1.0]);
    }

    #[test]
    fn conservative_on_positive_margins() {
        let stream = [
            (sv(&[1.0, 0.0]), Label::Pos),
            (sv(&[0.9, 0.1]), Label::Pos),
            (sv(&[0.8, -0.1]), Label::Pos),
        ];
        let mut clf = Perceptron::new(2);
        let summary =
            run_stream(&mut clf, stream.iter().map(|(a, y)| (a, *y)), false).unwrap();
        assert_eq!(summary.updates, 0);
        assert_eq!(summary.mistakes, 0);
    }
}
