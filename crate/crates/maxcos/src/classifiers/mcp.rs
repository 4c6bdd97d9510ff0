//! Maximum-cosine perceptron (non-conservative).

use crate::linalg::{norm_sq, SparseVector};
use crate::Scalar;

use super::{
    ClassifierError, HypothesisState, Label, OnlineClassifier, SkipReason, TrialOutcome, UpdateKind,
};

/// Fires not only on mistakes but whenever the margin is small:
/// y(w·a) ≤ ‖w‖/(2ℓ). The step is the same λ = ‖w‖/(ℓ‖a‖²) as the
/// conservative variant; the certificate grows by (1 − 2η)/‖a‖² where
/// η = max(0, y(w·a))·ℓ/‖w‖ discounts the part of the margin already in
/// hand. Under the firing condition η ∈ [0, 1/2], so ℓ never decreases.
#[derive(Debug, Clone)]
pub struct Mcp<T> {
    state: HypothesisState<T>,
}

impl<T: Scalar> Mcp<T> {
    pub fn new(dim: usize) -> Self {
        Self { state: HypothesisState::new(dim) }
    }

    /// Firing threshold ‖w‖/(2ℓ) for the current state.
    pub fn margin_threshold(&self) -> T {
        let two = T::one() + T::one();
        self.state.norm_w() / (two * self.state.ell())
    }
}

impl<T: Scalar> OnlineClassifier<T> for Mcp<T> {
    fn name(&self) -> &'static str {
        "mcp"
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
        let two = T::one() + T::one();
        if margin <= norm_w / (two * ell) {
            let eta = if margin <= T::zero() { T::zero() } else { margin * ell / norm_w };
            let norm_a_sq = norm_sq(a);
            let lambda = norm_w / (ell * norm_a_sq);
            let new_ell = (ell * ell + (T::one() - two * eta) / norm_a_sq).sqrt();
            self.state.additive(lambda, y, a, new_ell)?;
            outcome.update_kind = UpdateKind::Additive;
            outcome.lambda = lambda;
            outcome.ell_after = new_ell;
            outcome.eta = Some(eta);
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

    fn unit_state() -> Mcp<f64> {
        let mut clf = Mcp::new(2);
        clf.observe(&sv(&[1.0, 0.0]), Label::Pos).unwrap(); // w = (1,0), ℓ = 1
        clf
    }

    #[test]
    fn zero_margin_update_matches_conservative_step() {
        let mut clf = unit_state();
        let o = clf.observe(&sv(&[0.0, 1.0]), Label::Pos).unwrap();
        assert_eq!(o.update_kind, UpdateKind::Additive);
        assert_eq!(o.eta, Some(0.0));
        assert_eq!(o.lambda, 1.0);
        assert_eq!(clf.state().w().as_slice(), &[1.0, 1.0]);
        assert!((o.ell_after - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn small_positive_margin_fires_discounted_update() {
        let mut clf = unit_state();
        let o = clf.observe(&sv(&[0.4, 0.3]), Label::Pos).unwrap();
        // margin 0.4 ≤ threshold 0.5; η = 0.4; λ = 1/0.25 = 4.
        assert_eq!(o.update_kind, UpdateKind::Additive);
        assert_eq!(o.eta, Some(0.4));
        assert_eq!(o.lambda, 4.0);
        let w = clf.state().w().as_slice();
        assert!((w[0] - 2.6).abs() < 1e-15);
        assert!((w[1] - 1.2).abs() < 1e-15);
        assert!((o.ell_after - 1.8_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn comfortable_margin_is_left_alone() {
        let mut clf = unit_state();
        let o = clf.observe(&sv(&[0.9, 0.0]), Label::Pos).unwrap();
        assert_eq!(o.update_kind, UpdateKind::None);
        assert_eq!(o.eta, None);
        assert_eq!(o.ell_after, 1.0);
        assert_eq!(clf.state().w().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn threshold_boundary_fires() {
        let mut clf = unit_state();
        assert_eq!(clf.margin_threshold(), 0.5);
        let o = clf.observe(&sv(&[0.5, 0.0]), Label::Pos).unwrap();
        assert_eq!(o.update_kind, UpdateKind::Additive);
        assert_eq!(o.eta, Some(0.5));
        // η = 1/2: certificate unchanged, hypothesis still moves.
        assert_eq!(o.ell_after, 1.0);
        assert_eq!(clf.state().w().as_slice(), &[3.0, 0.0]);
    }
}
