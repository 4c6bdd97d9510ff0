//! Dataset ingestion, relabeling, permuted streaming, and the synthetic
//! separable generator.
//!
//! Datasets are immutable after construction; examples live behind an `Arc`
//! so one-vs-rest relabeling and parallel benchmark tasks share storage.
//! Streams are plain iterators over `(features, label)` pairs and are safe
//! to consume concurrently from independent clones.
//!
//! Randomness is ChaCha8 throughout, seeded explicitly; bucket permutations
//! use the Fisher–Yates shuffle (`rand`'s `shuffle`) over bucket indices, so
//! a seed fully determines a stream.

mod idx;

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::certificate::{CertificateError, KnownTarget};
use crate::classifiers::Label;
use crate::linalg::{dot, DenseVector, LinalgError, SparseVector};
use crate::{cast, Scalar};

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic at byte {offset}: expected {expected}, found {found}")]
    BadMagic { offset: usize, expected: u32, found: u32 },
    #[error("truncated file: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("{extra} trailing bytes after offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("zero image dimensions in header at byte {offset}")]
    ZeroDimensions { offset: usize },
    #[error("label {value} out of range 0–9 at record {index}")]
    LabelOutOfRange { index: usize, value: u8 },
    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("dataset size {size} does not fill {bucket_count} buckets of {bucket_size}")]
    PlanSizeMismatch { size: usize, bucket_count: usize, bucket_size: usize },
    #[error("labels are already one-vs-rest (positive class {existing:?}); cannot relabel to {requested}")]
    AlreadyRelabeled { existing: Option<u8>, requested: u8 },
    #[error("raw 0–9 labels required, but labels are already one-vs-rest")]
    RawLabelsRequired,
    #[error("binary labels required; relabel one-vs-rest first")]
    BinaryLabelsRequired,
    #[error("invalid parameters: {reason}")]
    InvalidParameters { reason: String },
    #[error(
        "rejection rate above 99.9% over {window} draws: margin {gamma} is too demanding for radius {radius} in dimension {dim}"
    )]
    RejectionRate { window: u64, gamma: f64, radius: f64, dim: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
}

/// Which side of the train/test protocol a dataset plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Class labels: raw digits 0–9 as loaded, or one-vs-rest ±1. Binary labels
/// remember the positive class they came from (None for generated data) so
/// relabeling is idempotent.
#[derive(Debug, Clone)]
pub enum Labels {
    Raw(Vec<u8>),
    Binary { labels: Vec<Label>, positive_class: Option<u8> },
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Raw(v) => v.len(),
            Labels::Binary { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable example/label store.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    examples: Arc<Vec<SparseVector<T>>>,
    labels: Labels,
    dim: usize,
    split: Option<Split>,
}

impl<T: Scalar> Dataset<T> {
    pub fn from_parts(examples: Vec<SparseVector<T>>, labels: Labels) -> Result<Self, DataError> {
        if examples.len() != labels.len() {
            return Err(DataError::CountMismatch { images: examples.len(), labels: labels.len() });
        }
        let dim = examples.first().map_or(0, |a| a.dim());
        if let Some(off) = examples.iter().position(|a| a.dim() != dim) {
            return Err(DataError::InvalidParameters {
                reason: format!("example {off} has dimension {}, expected {dim}", examples[off].dim()),
            });
        }
        Ok(Self { examples: Arc::new(examples), labels, dim, split: None })
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = Some(split);
        self
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> Option<Split> {
        self.split
    }

    pub fn examples(&self) -> &[SparseVector<T>] {
        &self.examples
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn raw_labels(&self) -> Option<&[u8]> {
        match &self.labels {
            Labels::Raw(v) => Some(v),
            Labels::Binary { .. } => None,
        }
    }

    pub fn binary_labels(&self) -> Option<&[Label]> {
        match &self.labels {
            Labels::Raw(_) => None,
            Labels::Binary { labels, .. } => Some(labels),
        }
    }

    /// In-order `(features, label)` pairs; requires binary labels.
    pub fn binary_pairs(&self) -> Result<impl Iterator<Item = (&SparseVector<T>, Label)> + '_, DataError> {
        let labels = self.binary_labels().ok_or(DataError::BinaryLabelsRequired)?;
        Ok(self.examples.iter().zip(labels.iter().copied()))
    }

    /// Serializes to the on-disk image/label pair (images must be
    /// byte-valued, i.e. k/255). Raw labels only.
    pub fn save_idx(&self, images_path: &Path, labels_path: &Path, rows: usize, cols: usize) -> Result<(), DataError> {
        if rows * cols != self.dim {
            return Err(DataError::InvalidParameters {
                reason: format!("{rows}×{cols} does not match dimension {}", self.dim),
            });
        }
        let raw = self.raw_labels().ok_or(DataError::RawLabelsRequired)?;
        idx::write_images(images_path, &self.examples, rows, cols)?;
        idx::write_labels(labels_path, raw)
    }
}

/// Loads an images/labels file pair (gzip accepted) into a raw-labeled
/// dataset. Pixels are scaled by 1/255 and stored sparse.
pub fn load_idx<T: Scalar>(images_path: &Path, labels_path: &Path) -> Result<Dataset<T>, DataError> {
    let (examples, _dim) = idx::read_images::<T>(images_path)?;
    let labels = idx::read_labels(labels_path)?;
    if examples.len() != labels.len() {
        return Err(DataError::CountMismatch { images: examples.len(), labels: labels.len() });
    }
    Dataset::from_parts(examples, Labels::Raw(labels))
}

/// Maps raw digits to ±1 against `positive`: +1 iff the label equals it.
/// Relabeling an already-binary dataset with the same positive class is the
/// identity; any other relabeling of binary labels is an error.
pub fn relabel_one_vs_rest<T: Scalar>(dataset: &Dataset<T>, positive: u8) -> Result<Dataset<T>, DataError> {
    if positive > 9 {
        return Err(DataError::InvalidParameters { reason: format!("positive class {positive} out of range 0–9") });
    }
    match &dataset.labels {
        Labels::Raw(raw) => {
            let labels = raw
                .iter()
                .map(|&l| if l == positive { Label::Pos } else { Label::Neg })
                .collect();
            Ok(Dataset {
                examples: Arc::clone(&dataset.examples),
                labels: Labels::Binary { labels, positive_class: Some(positive) },
                dim: dataset.dim,
                split: dataset.split,
            })
        }
        Labels::Binary { positive_class: Some(existing), .. } if *existing == positive => {
            Ok(dataset.clone())
        }
        Labels::Binary { positive_class, .. } => {
            Err(DataError::AlreadyRelabeled { existing: *positive_class, requested: positive })
        }
    }
}

/// A seeded permutation of equally sized, contiguous example buckets.
/// Within-bucket order is preserved; only bucket order is randomized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketPermutationPlan {
    bucket_count: usize,
    bucket_size: usize,
    permutation: Vec<u32>,
    seed: u64,
}

impl BucketPermutationPlan {
    /// Standard protocol shape: 60 buckets of 1000.
    pub const MNIST_BUCKET_COUNT: usize = 60;
    pub const MNIST_BUCKET_SIZE: usize = 1000;

    /// Fisher–Yates permutation of bucket indices from the seed.
    pub fn new(bucket_count: usize, bucket_size: usize, seed: u64) -> Self {
        use rand::seq::SliceRandom;
        let mut permutation: Vec<u32> = (0..bucket_count as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        permutation.shuffle(&mut rng);
        Self { bucket_count, bucket_size, permutation, seed }
    }

    /// Buckets in their original order (test helper; seed recorded as 0).
    pub fn identity(bucket_count: usize, bucket_size: usize) -> Self {
        Self {
            bucket_count,
            bucket_size,
            permutation: (0..bucket_count as u32).collect(),
            seed: 0,
        }
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_count
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    pub fn total(&self) -> usize {
        self.bucket_count * self.bucket_size
    }
}

/// Streams the dataset in the plan's bucket order. The dataset must fill the
/// plan exactly and carry binary labels.
pub fn permuted_stream<'a, T: Scalar>(
    dataset: &'a Dataset<T>,
    plan: &'a BucketPermutationPlan,
) -> Result<impl Iterator<Item = (&'a SparseVector<T>, Label)> + 'a, DataError> {
    if dataset.len() != plan.total() {
        return Err(DataError::PlanSizeMismatch {
            size: dataset.len(),
            bucket_count: plan.bucket_count,
            bucket_size: plan.bucket_size,
        });
    }
    let labels = dataset.binary_labels().ok_or(DataError::BinaryLabelsRequired)?;
    let examples = dataset.examples();
    let size = plan.bucket_size;
    Ok(plan.permutation.iter().flat_map(move |&b| {
        let start = b as usize * size;
        (start..start + size).map(move |i| (&examples[i], labels[i]))
    }))
}

/// How many consecutive draws the generator inspects before declaring the
/// accept region too small.
const REJECTION_WINDOW: u64 = 1_000_000;
/// Minimum accepted draws per window (0.1%).
const REJECTION_MIN_ACCEPTS: u64 = REJECTION_WINDOW / 1000;

/// Draws a linearly separable set with an explicit certificate: a uniform
/// unit target w, points uniform in the radius ball with |w·a| ≥ gamma
/// enforced by rejection, labels y = sign(w·a). The returned target carries
/// the *realized* minimum margin and maximum norm of the emitted set, so
/// downstream bound checks are exact for this data.
pub fn synthesize_separable<T: Scalar>(
    n: usize,
    dim: usize,
    gamma: f64,
    radius: f64,
    seed: u64,
) -> Result<(Dataset<T>, KnownTarget<T>), DataError> {
    if n == 0 || dim == 0 {
        return Err(DataError::InvalidParameters { reason: format!("need n ≥ 1 and dim ≥ 1 (got n = {n}, dim = {dim})") });
    }
    if !(gamma > 0.0 && gamma < radius) {
        return Err(DataError::InvalidParameters {
            reason: format!("need 0 < gamma < radius (got gamma = {gamma}, radius = {radius})"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Uniform unit target via normalized Gaussian draws.
    let target_w: DenseVector<T> = loop {
        let g = gaussian_vec(&mut rng, dim);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-6 {
            let w: Vec<T> = g.iter().map(|&v| cast::<T>(v / norm)).collect();
            // Renormalize in T so the unit invariant holds in the working type.
            let ns = w.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
            break DenseVector::from_vec(w.into_iter().map(|v| v / ns).collect());
        }
    };

    let mut examples = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut min_margin = T::infinity();
    let mut max_norm_sq = T::zero();
    let mut window_draws: u64 = 0;
    let mut window_accepts: u64 = 0;
    let inv_dim = 1.0 / dim as f64;
    while examples.len() < n {
        window_draws += 1;
        // Uniform in the radius ball: Gaussian direction, radius ~ U^(1/dim).
        let g = gaussian_vec(&mut rng, dim);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let r = radius * rng.gen::<f64>().powf(inv_dim);
        let dense: Vec<T> = g.iter().map(|&v| cast::<T>(v / norm * r)).collect();
        let a = SparseVector::from_dense(&dense);
        let signed = dot(&target_w, &a)?;
        if signed.abs() >= cast::<T>(gamma) {
            window_accepts += 1;
            if signed.abs() < min_margin {
                min_margin = signed.abs();
            }
            let ns = crate::linalg::norm_sq(&a);
            if ns > max_norm_sq {
                max_norm_sq = ns;
            }
            labels.push(Label::from_score(signed));
            examples.push(a);
        }
        if window_draws == REJECTION_WINDOW {
            if window_accepts < REJECTION_MIN_ACCEPTS {
                return Err(DataError::RejectionRate { window: REJECTION_WINDOW, gamma, radius, dim });
            }
            window_draws = 0;
            window_accepts = 0;
        }
    }

    let dataset = Dataset::from_parts(examples, Labels::Binary { labels, positive_class: None })?;
    let target = KnownTarget::new(target_w, min_margin, max_norm_sq.sqrt())?;
    Ok((dataset, target))
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    // Box–Muller; one pair per iteration, spare discarded for simplicity.
    (0..dim)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabel_maps_target_to_positive() {
        let examples = vec![SparseVector::from_dense(&[1.0]), SparseVector::from_dense(&[2.0])];
        let ds = Dataset::<f64>::from_parts(examples, Labels::Raw(vec![3, 7])).unwrap();
        let bin = relabel_one_vs_rest(&ds, 3).unwrap();
        assert_eq!(bin.binary_labels().unwrap(), &[Label::Pos, Label::Neg]);
    }

    #[test]
    fn relabel_is_idempotent_for_same_class_only() {
        let examples = vec![SparseVector::from_dense(&[1.0])];
        let ds = Dataset::<f64>::from_parts(examples, Labels::Raw(vec![3])).unwrap();
        let bin = relabel_one_vs_rest(&ds, 3).unwrap();
        let again = relabel_one_vs_rest(&bin, 3).unwrap();
        assert_eq!(again.binary_labels().unwrap(), bin.binary_labels().unwrap());
        assert!(matches!(
            relabel_one_vs_rest(&bin, 4),
            Err(DataError::AlreadyRelabeled { existing: Some(3), requested: 4 })
        ));
    }

    #[test]
    fn identity_plan_preserves_order() {
        let examples: Vec<_> = (0..6).map(|i| SparseVector::from_dense(&[i as f64 + 1.0])).collect();
        let labels = vec![Label::Pos; 6];
        let ds = Dataset::<f64>::from_parts(examples, Labels::Binary { labels, positive_class: None }).unwrap();
        let plan = BucketPermutationPlan::identity(3, 2);
        let order: Vec<f64> = permuted_stream(&ds, &plan)
            .unwrap()
            .map(|(a, _)| a.iter().next().unwrap().1)
            .collect();
        assert_eq!(order, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn plan_is_deterministic_and_bijective() {
        let p1 = BucketPermutationPlan::new(60, 1000, 42);
        let p2 = BucketPermutationPlan::new(60, 1000, 42);
        assert_eq!(p1, p2);
        let mut seen = [false; 60];
        for &b in p1.permutation() {
            assert!(!seen[b as usize]);
            seen[b as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert_ne!(p1.permutation(), BucketPermutationPlan::new(60, 1000, 43).permutation());
    }

    #[test]
    fn plan_size_mismatch_rejected() {
        let examples = vec![SparseVector::from_dense(&[1.0]); 5];
        let labels = vec![Label::Pos; 5];
        let ds = Dataset::<f64>::from_parts(examples, Labels::Binary { labels, positive_class: None }).unwrap();
        let plan = BucketPermutationPlan::new(3, 2, 0);
        assert!(matches!(
            permuted_stream(&ds, &plan).map(|_| ()),
            Err(DataError::PlanSizeMismatch { size: 5, bucket_count: 3, bucket_size: 2 })
        ));
    }

    #[test]
    fn synthesis_honors_margin_by_construction() {
        let (ds, target) = synthesize_separable::<f64>(200, 8, 0.2, 1.0, 7).unwrap();
        assert_eq!(ds.len(), 200);
        assert!(target.gamma() >= 0.2);
        assert!(target.radius() <= 1.0 + 1e-12);
        for (a, y) in ds.binary_pairs().unwrap() {
            let m = y.sign::<f64>() * dot(target.w(), a).unwrap();
            assert!(m >= target.gamma() - 1e-15, "margin {m} below realized {}", target.gamma());
        }
    }

    #[test]
    fn synthesis_rejects_hopeless_margin() {
        // Accept region ~|cos| ≥ 0.9999 in dim 3: far below the 0.1% floor.
        let err = synthesize_separable::<f64>(10, 3, 0.9999, 1.0, 1).unwrap_err();
        assert!(matches!(err, DataError::RejectionRate { .. }));
    }

    #[test]
    fn generator_parameter_validation() {
        assert!(synthesize_separable::<f64>(0, 5, 0.1, 1.0, 0).is_err());
        assert!(synthesize_separable::<f64>(10, 5, 0.0, 1.0, 0).is_err());
        assert!(synthesize_separable::<f64>(10, 5, 1.0, 1.0, 0).is_err());
    }
}
