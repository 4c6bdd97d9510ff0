//! Target-aware replay verification.
//!
//! Classifiers only ever see examples; the quantity their certificate ℓ
//! bounds — the cosine α between hypothesis and separating target, divided by
//! the target's margin — needs the target itself. Given a [`KnownTarget`]
//! (available for synthetic data), [`verify_run`] replays a recorded trial
//! trace from scratch and checks everything the trial loop asserts:
//!
//! * cosine lower bound α ≥ γ·ℓ after every trial,
//! * the per-update cosine recurrence (see [`recurrence_check`]),
//! * ℓ re-derived independently from (a, y, update kind) matches the
//!   reported sequence,
//! * final mistakes ≤ (R/γ)².
//!
//! The replay recomputes hypothesis norms from scratch each trial, so drift
//! in the incremental norm tracking shows up here as well.

use std::fmt;

use thiserror::Error;

use crate::classifiers::{Label, TrialOutcome, UpdateKind};
use crate::linalg::{dot, norm_sq, DenseVector, LinalgError, SparseVector};
use crate::{cast, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("target vector must be unit norm within 1e-12 (got ‖w‖² = {norm_sq})")]
    TargetNotUnit { norm_sq: f64 },
    #[error("target margin and radius must be positive (gamma = {gamma}, radius = {radius})")]
    NonPositiveTarget { gamma: f64, radius: f64 },
    #[error("trace length {trace} does not match stream length {stream}")]
    LengthMismatch { stream: usize, trace: usize },
    #[error("example at trial {trial} violates the target margin (y(w·a) = {margin}, needs ≥ {gamma})")]
    MarginViolation { trial: usize, margin: f64, gamma: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A unit separating hyperplane with the margin γ and example-norm radius R
/// it realizes on the associated example set.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownTarget<T> {
    w: DenseVector<T>,
    gamma: T,
    radius: T,
}

impl<T: Scalar> KnownTarget<T> {
    pub fn new(w: DenseVector<T>, gamma: T, radius: T) -> Result<Self, CertificateError> {
        let ns = w.norm_sq();
        if (ns - T::one()).abs() > cast::<T>(1e-12) {
            return Err(CertificateError::TargetNotUnit { norm_sq: ns.to_f64().unwrap_or(f64::NAN) });
        }
        if gamma <= T::zero() || radius <= T::zero() {
            return Err(CertificateError::NonPositiveTarget {
                gamma: gamma.to_f64().unwrap_or(f64::NAN),
                radius: radius.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { w, gamma, radius })
    }

    pub fn w(&self) -> &DenseVector<T> {
        &self.w
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// (R/γ)², the mistake budget every certified run must respect.
    pub fn mistake_bound(&self) -> T {
        let ratio = self.radius / self.gamma;
        ratio * ratio
    }
}

/// Which certificate recursion to re-derive during replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameworkKind {
    Mcp,
    Cmcp,
    Naromma,
}

/// Per-trial view of the replayed run (defined once the hypothesis exists).
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRecord<T> {
    pub trial: usize,
    /// (w_target · w_i) / ‖w_i‖.
    pub alpha: T,
    /// Independently re-derived certificate.
    pub ell: T,
    /// α/γ — the target-relative form of the certificate bound.
    pub delta: T,
    /// Mistakes among predicted trials so far.
    pub mistake_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    CosineLowerBound,
    Recurrence,
    EllRederivation,
    MistakeBound,
    TraceMismatch,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::CosineLowerBound => "cosine-lower-bound",
            CheckKind::Recurrence => "recurrence",
            CheckKind::EllRederivation => "ell-rederivation",
            CheckKind::MistakeBound => "mistake-bound",
            CheckKind::TraceMismatch => "trace-mismatch",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckFailure {
    pub trial: usize,
    pub check: CheckKind,
    pub detail: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trial {}: {} failed: {}", self.trial, self.check, self.detail)
    }
}

/// Replay result: per-trial records plus every failed assertion
/// (one displayed line each).
#[derive(Debug, Clone)]
pub struct CertificateReport<T> {
    pub records: Vec<CertificateRecord<T>>,
    pub failures: Vec<CheckFailure>,
    pub mistakes: usize,
    pub bound: T,
}

impl<T: Scalar> CertificateReport<T> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl<T: Scalar> fmt::Display for CertificateReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return writeln!(
                f,
                "certificate ok: {} trials, {} mistakes (bound {})",
                self.records.len(),
                self.mistakes,
                self.bound
            );
        }
        for failure in &self.failures {
            writeln!(f, "{failure}")?;
        }
        Ok(())
    }
}

/// Inputs for one application of the per-update cosine recurrence
/// α' ≥ (α + γx) / √(1 + ‖a‖²x² + 2·γ_proj·x), where x = λ/‖w‖ is the
/// normalized step and γ_proj = y(w·a)/‖w‖ the example's projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrencePoint<T> {
    pub alpha_before: T,
    pub alpha_after: T,
    /// Target margin γ.
    pub gamma: T,
    /// Normalized step x = λ/‖w‖ ≥ 0.
    pub x: T,
    pub norm_sq_a: T,
    pub gamma_proj: T,
}

/// Checks the recurrence at tolerance `tol`; λ = 0 degenerates to α' ≥ α.
pub fn recurrence_check<T: Scalar>(pt: &RecurrencePoint<T>, tol: T) -> bool {
    let two = T::one() + T::one();
    let denom_sq = T::one() + pt.norm_sq_a * pt.x * pt.x + two * pt.gamma_proj * pt.x;
    // Guarded by the callers (x comes from a real update), but stay total.
    if denom_sq <= T::zero() {
        return false;
    }
    let rhs = (pt.alpha_before + pt.gamma * pt.x) / denom_sq.sqrt();
    pt.alpha_after >= rhs - tol
}

const CHECK_TOL: f64 = 1e-9;

/// Replays `trace` over the stream and re-checks every certified claim.
///
/// `examples`/`labels` must be the exact stream the classifier saw, in
/// order, with one trace entry per trial. Margin-violating examples are a
/// data error (the certificate's hypotheses do not cover them), not a check
/// failure.
pub fn verify_run<T: Scalar>(
    target: &KnownTarget<T>,
    examples: &[SparseVector<T>],
    labels: &[Label],
    trace: &[TrialOutcome<T>],
    kind: FrameworkKind,
) -> Result<CertificateReport<T>, CertificateError> {
    if examples.len() != labels.len() || examples.len() != trace.len() {
        return Err(CertificateError::LengthMismatch {
            stream: examples.len().min(labels.len()),
            trace: trace.len(),
        });
    }
    let tol = cast::<T>(CHECK_TOL);
    let gamma = target.gamma();
    let bound = target.mistake_bound();
    let two = T::one() + T::one();

    let mut report = CertificateReport {
        records: Vec::with_capacity(trace.len()),
        failures: Vec::new(),
        mistakes: 0,
        bound,
    };
    let dim = examples.first().map_or(0, |a| a.dim());
    let mut w = DenseVector::<T>::zeros(dim);
    let mut ell = T::zero();
    let mut initialized = false;
    let mut alpha_prev = T::zero();

    for (trial, ((a, &y), outcome)) in examples.iter().zip(labels).zip(trace).enumerate() {
        // The certified bounds assume every example respects the target
        // margin; a violating stream is a data error, not a check failure.
        if !a.is_zero() {
            let target_margin = y.sign::<T>() * dot(target.w(), a)?;
            if target_margin < gamma {
                return Err(CertificateError::MarginViolation {
                    trial,
                    margin: target_margin.to_f64().unwrap_or(f64::NAN),
                    gamma: gamma.to_f64().unwrap_or(f64::NAN),
                });
            }
        }

        // Prediction cross-check against the replayed hypothesis.
        if initialized {
            let predicted = Label::from_score(dot(&w, a)?);
            if predicted != y {
                report.mistakes += 1;
            }
            if outcome.predicted != Some(predicted) {
                report.failures.push(CheckFailure {
                    trial,
                    check: CheckKind::TraceMismatch,
                    detail: format!(
                        "trace predicted {:?}, replay predicts {predicted:?}",
                        outcome.predicted
                    ),
                });
            }
        }

        // Re-derive the update's effect using only (a, y, kind, λ).
        let mut recurrence: Option<RecurrencePoint<T>> = None;
        match outcome.update_kind {
            UpdateKind::Init => {
                w.assign_scaled(outcome.lambda, y, a)?;
                ell = T::one() / norm_sq(a).sqrt();
                initialized = true;
            }
            UpdateKind::None => {}
            UpdateKind::Replace => {
                w.assign_scaled(outcome.lambda, y, a)?;
                ell = T::one() / norm_sq(a).sqrt();
            }
            UpdateKind::Additive => {
                let norm_w_sq = w.norm_sq();
                let norm_w = norm_w_sq.sqrt();
                let norm_a_sq = norm_sq(a);
                let margin = y.sign::<T>() * dot(&w, a)?;
                let proj = margin / norm_w;
                let increment = match kind {
                    FrameworkKind::Cmcp => T::one() / norm_a_sq,
                    FrameworkKind::Mcp => {
                        let eta = if margin <= T::zero() { T::zero() } else { margin * ell / norm_w };
                        (T::one() - two * eta) / norm_a_sq
                    }
                    FrameworkKind::Naromma => {
                        let gain = ell * proj - T::one();
                        gain * gain / (norm_a_sq - proj * proj)
                    }
                };
                ell = (ell * ell + increment).sqrt();
                recurrence = Some(RecurrencePoint {
                    alpha_before: alpha_prev,
                    alpha_after: T::zero(), // filled in below
                    gamma,
                    x: outcome.lambda / norm_w,
                    norm_sq_a: norm_a_sq,
                    gamma_proj: proj,
                });
                let _ = crate::linalg::axpy_update(&mut w, norm_w_sq, outcome.lambda, y, a)?;
            }
        }

        if !initialized {
            continue;
        }

        let alpha = crate::linalg::dot_dense(target.w(), &w)? / w.norm_sq().sqrt();
        if let Some(mut pt) = recurrence {
            pt.alpha_after = alpha;
            if !recurrence_check(&pt, tol) {
                report.failures.push(CheckFailure {
                    trial,
                    check: CheckKind::Recurrence,
                    detail: format!("alpha {} fell below the recurrence bound (x = {})", alpha, pt.x),
                });
            }
        }
        if alpha < gamma * ell - tol {
            report.failures.push(CheckFailure {
                trial,
                check: CheckKind::CosineLowerBound,
                detail: format!("alpha = {} < gamma*ell = {}", alpha, gamma * ell),
            });
        }
        let reported = outcome.ell_after;
        if (reported - ell).abs() > tol * ell.max(T::one()) {
            report.failures.push(CheckFailure {
                trial,
                check: CheckKind::EllRederivation,
                detail: format!("reported ell = {reported}, re-derived ell = {ell}"),
            });
        }
        report.records.push(CertificateRecord {
            trial,
            alpha,
            ell,
            delta: alpha / gamma,
            mistake_count: report.mistakes,
        });
        alpha_prev = alpha;
    }

    if cast::<T>(report.mistakes as f64) > bound {
        report.failures.push(CheckFailure {
            trial: trace.len().saturating_sub(1),
            check: CheckKind::MistakeBound,
            detail: format!("{} mistakes exceed the budget {}", report.mistakes, bound),
        });
    }
    Ok(report)
}

/// Lockstep comparison report for the two relaxation rules on one stream.
#[derive(Debug, Clone)]
pub struct EquivalenceReport<T> {
    pub trials: usize,
    /// max over trials of 1 − cos(angle between the two hypotheses).
    pub max_cosine_gap: T,
    /// max over trials of |‖u‖ − ℓ| / ℓ.
    pub max_norm_gap: T,
    pub first_kind_mismatch: Option<usize>,
}

impl<T: Scalar> EquivalenceReport<T> {
    pub fn passed(&self, tol: T) -> bool {
        self.first_kind_mismatch.is_none() && self.max_cosine_gap <= tol && self.max_norm_gap <= tol
    }
}

/// Runs the normalized and aggressive relaxation rules side by side on one
/// stream and measures how far apart they drift: they should pick the same
/// update kind every trial, keep parallel hypotheses, and keep ‖u‖ equal to
/// the other's certificate ℓ.
pub fn check_equivalence<'a, T, I>(dim: usize, stream: I) -> Result<EquivalenceReport<T>, crate::classifiers::ClassifierError>
where
    T: Scalar,
    I: IntoIterator<Item = (&'a SparseVector<T>, Label)>,
{
    use crate::classifiers::{AggressiveRomma, Naromma, OnlineClassifier};

    let mut reference = Naromma::<T>::new(dim);
    let mut aggressive = AggressiveRomma::<T>::new(dim);
    let mut report = EquivalenceReport {
        trials: 0,
        max_cosine_gap: T::zero(),
        max_norm_gap: T::zero(),
        first_kind_mismatch: None,
    };
    for (a, y) in stream {
        let o1 = reference.observe(a, y)?;
        let o2 = aggressive.observe(a, y)?;
        report.trials += 1;
        if o1.update_kind != o2.update_kind {
            report.first_kind_mismatch = Some(o1.trial);
            break;
        }
        if !reference.state().initialized() {
            continue;
        }
        let w = reference.state().w();
        let u = aggressive.state().w();
        let norm_w = w.norm_sq().sqrt();
        let norm_u = u.norm_sq().sqrt();
        let cos = crate::linalg::dot_dense(w, u)? / (norm_w * norm_u);
        let cos_gap = T::one() - cos;
        if cos_gap > report.max_cosine_gap {
            report.max_cosine_gap = cos_gap;
        }
        let ell = reference.state().ell();
        let norm_gap = (norm_u - ell).abs() / ell;
        if norm_gap > report.max_norm_gap {
            report.max_norm_gap = norm_gap;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{run_stream, Mcp};

    fn sv(entries: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(entries)
    }

    fn unit_target(entries: &[f64], gamma: f64, radius: f64) -> KnownTarget<f64> {
        KnownTarget::new(DenseVector::from_vec(entries.to_vec()), gamma, radius).unwrap()
    }

    #[test]
    fn target_validation() {
        assert!(matches!(
            KnownTarget::new(DenseVector::from_vec(vec![1.0, 1.0]), 0.1, 1.0),
            Err(CertificateError::TargetNotUnit { .. })
        ));
        assert!(matches!(
            KnownTarget::new(DenseVector::from_vec(vec![1.0, 0.0]), 0.0, 1.0),
            Err(CertificateError::NonPositiveTarget { .. })
        ));
        let t = unit_target(&[0.6, 0.8], 0.5, 2.0);
        assert_eq!(t.mistake_bound(), 16.0);
    }

    #[test]
    fn single_trial_run_certifies_base_case() {
        // α₁ = |w·a₀|/‖a₀‖ ≥ γ/‖a₀‖ = γ·ℓ₁ for any in-margin example.
        let target = unit_target(&[1.0, 0.0], 0.5, 2.0);
        let a = sv(&[0.8, 0.6]);
        let mut clf = Mcp::<f64>::new(2);
        let summary = run_stream(&mut clf, [(&a, Label::Pos)], true).unwrap();
        let report = verify_run(
            &target,
            std::slice::from_ref(&a),
            &[Label::Pos],
            &summary.trace.unwrap(),
            FrameworkKind::Mcp,
        )
        .unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.records.len(), 1);
        let rec = &report.records[0];
        assert!((rec.alpha - 0.8).abs() < 1e-15);
        assert!(rec.alpha >= 0.5 * rec.ell - 1e-9);
    }

    #[test]
    fn margin_violation_is_a_data_error() {
        let target = unit_target(&[1.0, 0.0], 0.5, 2.0);
        let good = sv(&[0.8, 0.6]);
        let bad = sv(&[0.1, 0.9]); // |w·a| = 0.1 < γ
        let mut clf = Mcp::<f64>::new(2);
        let stream = [(&good, Label::Pos), (&bad, Label::Pos)];
        let summary = run_stream(&mut clf, stream, true).unwrap();
        let err = verify_run(
            &target,
            &[good, bad],
            &[Label::Pos, Label::Pos],
            &summary.trace.unwrap(),
            FrameworkKind::Mcp,
        )
        .unwrap_err();
        assert!(matches!(err, CertificateError::MarginViolation { trial: 1, .. }));
    }

    #[test]
    fn corrupted_ell_is_reported_with_trial_index() {
        let target = unit_target(&[1.0, 0.0], 0.4, 2.0);
        let examples = vec![sv(&[0.9, 0.1]), sv(&[0.5, 0.5]), sv(&[0.6, -0.3])];
        let labels = vec![Label::Pos, Label::Pos, Label::Pos];
        let mut clf = Mcp::<f64>::new(2);
        let stream = examples.iter().zip(&labels).map(|(a, &y)| (a, y));
        let mut trace = run_stream(&mut clf, stream, true).unwrap().trace.unwrap();
        trace[1].ell_after *= 1.5;
        let report = verify_run(&target, &examples, &labels, &trace, FrameworkKind::Mcp).unwrap();
        assert!(!report.passed());
        assert!(report
            .failures
            .iter()
            .any(|f| f.trial == 1 && f.check == CheckKind::EllRederivation));
    }

    #[test]
    fn recurrence_zero_step_degenerates_to_monotonicity() {
        let pt = RecurrencePoint {
            alpha_before: 0.3,
            alpha_after: 0.3,
            gamma: 0.1,
            x: 0.0,
            norm_sq_a: 2.0,
            gamma_proj: -0.5,
        };
        assert!(recurrence_check(&pt, 1e-9));
        let worse = RecurrencePoint { alpha_after: 0.29, ..pt };
        assert!(!recurrence_check(&worse, 1e-9));
    }
}
