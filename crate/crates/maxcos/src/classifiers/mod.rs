//! The online trial contract and its six implementations.
//!
//! All classifiers follow the same protocol: the first usable example is
//! consumed to initialize the hypothesis (no prediction is made on it, and it
//! is excluded from mistake counts), every later example is predicted with
//! `sign(w·a)` — `sign(0)` is `+1` — and then fed to the update rule. Update
//! rules never mutate state when their firing condition is false, so each
//! trial is fully described by a [`TrialOutcome`].
//!
//! [`Mcp`], [`Cmcp`] and [`Naromma`] additionally maintain the certificate
//! value ℓ: a running lower bound on cos θ / γ against any unit target that
//! separates the stream with margin γ. ℓ is computable without knowing the
//! target; the `certificate` module checks the bound when a target is known.
//! [`Perceptron`] and [`Pa`] are baselines and leave ℓ at zero;
//! [`AggressiveRomma`]'s certificate is the norm of its own hypothesis.
//!
//! Zero-norm examples carry no signal and every rule divides by ‖a‖², so they
//! are skipped with [`SkipReason::ZeroNorm`]. The two relaxation algorithms
//! also skip examples (anti)parallel to the current hypothesis, where their
//! update denominators vanish ([`SkipReason::LinearDependence`]).

mod aromma;
mod cmcp;
mod mcp;
mod naromma;
mod pa;
mod perceptron;

pub use aromma::AggressiveRomma;
pub use cmcp::Cmcp;
pub use mcp::Mcp;
pub use naromma::Naromma;
pub use pa::Pa;
pub use perceptron::Perceptron;

use thiserror::Error;

use crate::linalg::{axpy_update, dot, norm_sq, DenseVector, LinalgError, SparseVector};
use crate::Scalar;

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// −1 or +1 in the working scalar type.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Neg => T::zero() - T::one(),
            Label::Pos => T::one(),
        }
    }

    /// `sign(score)` with the 0-goes-positive convention.
    pub fn from_score<T: Scalar>(score: T) -> Self {
        if score < T::zero() {
            Label::Neg
        } else {
            Label::Pos
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Neg => "-1",
            Label::Pos => "+1",
        })
    }
}

/// A sparse feature vector with its binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample<T> {
    pub features: SparseVector<T>,
    pub label: Label,
}

impl<T: Scalar> LabeledExample<T> {
    pub fn new(features: SparseVector<T>, label: Label) -> Self {
        Self { features, label }
    }

    pub fn as_pair(&self) -> (&SparseVector<T>, Label) {
        (&self.features, self.label)
    }
}

/// What an update did to the hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateKind {
    /// First usable example consumed; hypothesis created from it.
    Init,
    /// Firing condition false (or example skipped): state untouched.
    None,
    /// Hypothesis replaced by a multiple of the current example.
    Replace,
    /// Rank-one step `w ← w + λ·y·a` (aggressive ROMMA also rescales the
    /// retained hypothesis in the same trial).
    Additive,
}

impl UpdateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateKind::Init => "init",
            UpdateKind::None => "none",
            UpdateKind::Replace => "replace",
            UpdateKind::Additive => "additive",
        }
    }
}

/// Why an example was passed over without an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// ‖a‖ = 0: no signal, and every rule divides by ‖a‖².
    ZeroNorm,
    /// Example (anti)parallel to the hypothesis: relaxation denominators vanish.
    LinearDependence,
}

/// Per-trial record. `predicted`/`margin` are `None` exactly on
/// initialization trials (including zero-norm examples seen before
/// initialization), where no prediction is issued.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome<T> {
    pub trial: usize,
    pub predicted: Option<Label>,
    /// y·(w·a) against the pre-update hypothesis.
    pub margin: Option<T>,
    pub update_kind: UpdateKind,
    pub skip: Option<SkipReason>,
    /// Step length. For `Init`/`Replace` this is the scale s in `w = s·y·a`,
    /// so a trace replays with `lambda` and `update_kind` alone; 0 for `None`.
    pub lambda: T,
    /// Certificate ℓ after the trial (0 for the baselines).
    pub ell_after: T,
    /// Projection y(w·a)/‖w‖ (relaxation algorithms).
    pub gamma: Option<T>,
    /// Margin fraction in [0, 1/2] (MCP, on firing updates).
    pub eta: Option<T>,
    /// Certificate increment indicator (CMCP): 1 on update, 0 otherwise.
    pub mu: Option<u8>,
}

impl<T: Scalar> TrialOutcome<T> {
    fn new(trial: usize) -> Self {
        Self {
            trial,
            predicted: None,
            margin: None,
            update_kind: UpdateKind::None,
            skip: None,
            lambda: T::zero(),
            ell_after: T::zero(),
            gamma: None,
            eta: None,
            mu: None,
        }
    }

    /// Zero-norm example before any initialization: nothing to predict or learn.
    fn preinit_skip(trial: usize) -> Self {
        Self { skip: Some(SkipReason::ZeroNorm), ..Self::new(trial) }
    }

    fn init(trial: usize, lambda: T, ell_after: T) -> Self {
        Self { update_kind: UpdateKind::Init, lambda, ell_after, ..Self::new(trial) }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("stream held no nonzero example to initialize from ({trials} trials seen)")]
    NoUsableExamples { trials: usize },
}

/// Tolerance for the linear-dependence skip: |w·a|/(‖w‖‖a‖) ≥ 1 − this.
pub(crate) const DEPENDENCE_TOL: f64 = 1e-12;

/// Recompute the tracked hypothesis norm from scratch after this many
/// incremental updates, bounding drift of the closed-form norm identity.
const NORM_REFRESH_INTERVAL: u32 = 1024;

/// Mutable per-classifier state: hypothesis, tracked squared norm,
/// certificate ℓ, and trial bookkeeping.
#[derive(Debug, Clone)]
pub struct HypothesisState<T> {
    w: DenseVector<T>,
    norm_sq_w: T,
    ell: T,
    initialized: bool,
    trial_index: usize,
    updates_since_refresh: u32,
}

impl<T: Scalar> HypothesisState<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            w: DenseVector::zeros(dim),
            norm_sq_w: T::zero(),
            ell: T::zero(),
            initialized: false,
            trial_index: 0,
            updates_since_refresh: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn w(&self) -> &DenseVector<T> {
        &self.w
    }

    pub fn norm_sq_w(&self) -> T {
        self.norm_sq_w
    }

    pub fn norm_w(&self) -> T {
        self.norm_sq_w.sqrt()
    }

    pub fn ell(&self) -> T {
        self.ell
    }

    pub fn initialized(&self) -> bool {
        self.initialized
    }

    pub fn trial_index(&self) -> usize {
        self.trial_index
    }

    pub fn score(&self, a: &SparseVector<T>) -> Result<T, LinalgError> {
        dot(&self.w, a)
    }

    pub fn predict(&self, a: &SparseVector<T>) -> Result<Label, LinalgError> {
        Ok(Label::from_score(self.score(a)?))
    }

    fn next_trial(&mut self) -> usize {
        let t = self.trial_index;
        self.trial_index += 1;
        t
    }

    /// `w ← scale·y·a`, used for both initialization and replace moves.
    fn assign(&mut self, scale: T, y: Label, a: &SparseVector<T>, ell: T) -> Result<(), LinalgError> {
        self.w.assign_scaled(scale, y, a)?;
        self.norm_sq_w = scale * scale * norm_sq(a);
        self.ell = ell;
        self.initialized = true;
        self.updates_since_refresh = 0;
        Ok(())
    }

    /// `w ← w + λ·y·a` with incremental norm tracking and periodic
    /// from-scratch refresh.
    fn additive(&mut self, lambda: T, y: Label, a: &SparseVector<T>, ell: T) -> Result<(), LinalgError> {
        self.norm_sq_w = axpy_update(&mut self.w, self.norm_sq_w, lambda, y, a)?;
        self.ell = ell;
        self.updates_since_refresh += 1;
        if self.updates_since_refresh >= NORM_REFRESH_INTERVAL {
            self.norm_sq_w = self.w.norm_sq();
            self.updates_since_refresh = 0;
        }
        Ok(())
    }

    /// `w ← c·w + λ·y·a` (aggressive ROMMA's general move). Sets ℓ to the
    /// resulting norm — for that algorithm the certificate is the hypothesis
    /// norm itself.
    fn affine(&mut self, c: T, lambda: T, y: Label, a: &SparseVector<T>) -> Result<(), LinalgError> {
        self.w.scale_in_place(c);
        self.norm_sq_w = self.norm_sq_w * c * c;
        self.additive(lambda, y, a, T::zero())?;
        self.ell = self.norm_sq_w.sqrt();
        Ok(())
    }

    /// |w·a| / (‖w‖‖a‖) ≥ 1 − tolerance, given the precomputed score.
    fn linearly_dependent(&self, score: T, norm_sq_a: T) -> bool {
        let denom = (self.norm_sq_w * norm_sq_a).sqrt();
        score.abs() >= (T::one() - crate::cast::<T>(DEPENDENCE_TOL)) * denom
    }
}

/// The shared trial contract. `observe` consumes one labeled example:
/// initialization on the first usable example, predict-then-update on the
/// rest. State is mutated only when the rule's firing condition holds.
pub trait OnlineClassifier<T: Scalar> {
    fn name(&self) -> &'static str;
    fn state(&self) -> &HypothesisState<T>;
    fn observe(&mut self, a: &SparseVector<T>, y: Label) -> Result<TrialOutcome<T>, ClassifierError>;

    fn dim(&self) -> usize {
        self.state().dim()
    }

    fn predict(&self, a: &SparseVector<T>) -> Result<Label, ClassifierError> {
        Ok(self.state().predict(a)?)
    }
}

/// Aggregate counts for one pass over a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary<T> {
    pub trials: usize,
    /// Trials on which a prediction was issued (everything after init).
    pub predictions: usize,
    /// Predictions that disagreed with the label.
    pub mistakes: usize,
    /// Replace + Additive updates (initialization not counted).
    pub updates: usize,
    pub skips: usize,
    pub trace: Option<Vec<TrialOutcome<T>>>,
}

/// Feeds a stream through a classifier once. Errors if the stream holds no
/// usable (nonzero) example to initialize from.
pub fn run_stream<'a, T, C, I>(
    classifier: &mut C,
    stream: I,
    keep_trace: bool,
) -> Result<RunSummary<T>, ClassifierError>
where
    T: Scalar,
    C: OnlineClassifier<T> + ?Sized,
    I: IntoIterator<Item = (&'a SparseVector<T>, Label)>,
{
    let mut summary = RunSummary {
        trials: 0,
        predictions: 0,
        mistakes: 0,
        updates: 0,
        skips: 0,
        trace: keep_trace.then(Vec::new),
    };
    for (a, y) in stream {
        let outcome = classifier.observe(a, y)?;
        summary.trials += 1;
        if let Some(predicted) = outcome.predicted {
            summary.predictions += 1;
            if predicted != y {
                summary.mistakes += 1;
            }
        }
        match outcome.update_kind {
            UpdateKind::Replace | UpdateKind::Additive => summary.updates += 1,
            UpdateKind::Init | UpdateKind::None => {}
        }
        if outcome.skip.is_some() {
            summary.skips += 1;
        }
        if let Some(trace) = summary.trace.as_mut() {
            trace.push(outcome);
        }
    }
    if !classifier.state().initialized() {
        return Err(ClassifierError::NoUsableExamples { trials: summary.trials });
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_zero_is_positive() {
        assert_eq!(Label::from_score(0.0), Label::Pos);
        assert_eq!(Label::from_score(-0.0), Label::Pos);
        assert_eq!(Label::from_score(-1e-300), Label::Neg);
        assert_eq!(Label::from_score(3.0), Label::Pos);
    }

    #[test]
    fn single_example_stream_initializes_without_predicting() {
        let a = SparseVector::from_dense(&[1.0, 2.0]);
        let mut clf = Perceptron::<f64>::new(2);
        let summary = run_stream(&mut clf, [(&a, Label::Pos)], true).unwrap();
        assert_eq!(summary.trials, 1);
        assert_eq!(summary.predictions, 0);
        assert_eq!(summary.mistakes, 0);
        let trace = summary.trace.unwrap();
        assert_eq!(trace[0].update_kind, UpdateKind::Init);
        assert_eq!(trace[0].predicted, None);
    }

    #[test]
    fn all_zero_stream_errors() {
        let z = SparseVector::<f64>::zeros(3);
        let mut clf = Perceptron::<f64>::new(3);
        let err = run_stream(&mut clf, [(&z, Label::Pos), (&z, Label::Neg)], false).unwrap_err();
        assert_eq!(err, ClassifierError::NoUsableExamples { trials: 2 });
    }

    #[test]
    fn zero_example_before_init_is_skipped_then_init_happens() {
        let z = SparseVector::<f64>::zeros(2);
        let a = SparseVector::from_dense(&[1.0, 0.0]);
        let mut clf = Cmcp::<f64>::new(2);
        let summary = run_stream(&mut clf, [(&z, Label::Neg), (&a, Label::Pos)], true).unwrap();
        let trace = summary.trace.unwrap();
        assert_eq!(trace[0].skip, Some(SkipReason::ZeroNorm));
        assert_eq!(trace[0].predicted, None);
        assert_eq!(trace[1].update_kind, UpdateKind::Init);
        assert_eq!(summary.skips, 1);
    }
}
