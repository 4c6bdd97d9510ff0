//! Online linear classification with cosine-bound certificates.
//!
//! Six single-pass classifiers over sparse features share one trial contract
//! ([`classifiers::OnlineClassifier`]): predict with `sign(w·a)`, then update
//! per the algorithm's rule. Three of them — MCP, CMCP and NAROMMA — maintain
//! a *certificate* value ℓ alongside the hypothesis: a running lower bound on
//! the cosine between the hypothesis and any separating target, divided by
//! that target's margin. The bound is maintainable without knowing the target
//! and yields the (R/γ)² mistake bound directly. Perceptron and PA are
//! included as baselines.
//!
//! The per-trial step lengths come from closed-form maximization of two
//! one-dimensional ratio objectives ([`optimizer`]); [`certificate`] replays
//! recorded runs against a known target and checks every bound the
//! classifiers assert; [`data`] handles IDX ingestion, one-vs-rest
//! relabeling, bucket-permutation streams and a synthetic separable
//! generator; [`bench`] runs the single-pass train/test protocol and renders
//! deterministic CSV.
//!
//! Everything numeric is generic over [`Scalar`]; the `*64` aliases at the
//! crate root fix the concrete `f64` types used by the CLI and the
//! verification suites.

pub mod bench;
pub mod certificate;
pub mod classifiers;
pub mod data;
pub mod linalg;
pub mod optimizer;

use std::fmt;

use num_traits::Float;

/// Floating-point scalar the whole crate is generic over.
///
/// Blanket-implemented for anything `Float`-like that can cross thread
/// boundaries; in practice `f32` and `f64`.
pub trait Scalar: Float + fmt::Debug + fmt::Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + fmt::Debug + fmt::Display + Send + Sync + 'static {}

/// Lossy cast from `f64` constants into the working scalar type.
pub(crate) fn cast<T: Scalar>(x: f64) -> T {
    T::from(x).expect("f64 constant representable in scalar type")
}

pub type SparseVector64 = linalg::SparseVector<f64>;
pub type DenseVector64 = linalg::DenseVector<f64>;
pub type LabeledExample64 = classifiers::LabeledExample<f64>;
pub type TrialOutcome64 = classifiers::TrialOutcome<f64>;
pub type HypothesisState64 = classifiers::HypothesisState<f64>;
pub type Dataset64 = data::Dataset<f64>;
pub type KnownTarget64 = certificate::KnownTarget<f64>;

pub type Perceptron64 = classifiers::Perceptron<f64>;
pub type Pa64 = classifiers::Pa<f64>;
pub type Cmcp64 = classifiers::Cmcp<f64>;
pub type Mcp64 = classifiers::Mcp<f64>;
pub type Naromma64 = classifiers::Naromma<f64>;
pub type AggressiveRomma64 = classifiers::AggressiveRomma<f64>;
