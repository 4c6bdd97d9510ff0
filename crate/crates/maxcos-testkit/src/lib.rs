//! Test-only helpers shared across the workspace's verification suites:
//! a brute-force grid oracle for the ratio maximizers, stratified problem
//! samplers, byte-level image/label file builders (independent of the
//! library's writer), and synthetic example generators.
//!
//! Everything here recomputes from first principles in plain `f64` so the
//! suites never certify the library against itself.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maxcos::classifiers::Label;
use maxcos::linalg::SparseVector;

/// Direct evaluation of (r + p·x) / √(s + q·x²).
pub fn phi_simple(r: f64, p: f64, s: f64, q: f64, x: f64) -> f64 {
    (r + p * x) / (s + q * x * x).sqrt()
}

/// Direct evaluation of (r + p·x) / √(s + q·x² + 2·t·q·x).
pub fn phi_shifted(r: f64, p: f64, s: f64, q: f64, t: f64, x: f64) -> f64 {
    (r + p * x) / (s + q * x * x + 2.0 * t * q * x).sqrt()
}

/// Grid points for the brute-force maximizer: x = 0 plus a log-spaced sweep
/// of 10^k for k from −9 to 6.
pub const GRID_POINTS: usize = 100_000;

/// The log-spaced sweep itself. Build it once and reuse it across problems;
/// the points are what matters, not their exact placement.
pub fn log_grid() -> Vec<f64> {
    let step = 10f64.powf(15.0 / (GRID_POINTS - 1) as f64);
    let mut xs = Vec::with_capacity(GRID_POINTS + 1);
    xs.push(0.0);
    let mut x = 1e-9;
    for _ in 0..GRID_POINTS {
        xs.push(x);
        x *= step;
    }
    xs
}

/// Evaluates `f` over `xs` and returns (argmax, max). NaN evaluations are
/// skipped so callers can probe slightly outside a problem's domain.
pub fn grid_max_on(xs: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best_x = 0.0;
    let mut best = f64::NEG_INFINITY;
    for &x in xs {
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    (best_x, best)
}

/// One-shot convenience over the standard grid.
pub fn grid_max(f: impl Fn(f64) -> f64) -> (f64, f64) {
    grid_max_on(&log_grid(), f)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Coefficients for (r + p·x)/√(s + q·x²), s and q kept away from zero.
/// r and p are pinned to exactly 0 on a fraction of draws so the sign-case
/// boundaries get real coverage.
pub fn sample_simple(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    let r = if rng.gen_ratio(1, 6) { 0.0 } else { uniform(rng, -8.0, 8.0) };
    let p = if rng.gen_ratio(1, 6) { 0.0 } else { uniform(rng, -8.0, 8.0) };
    let s = uniform(rng, 0.2, 8.0);
    let q = uniform(rng, 0.2, 8.0);
    (r, p, s, q)
}

/// The qualitative outcomes of the shifted maximizer, used to stratify
/// sampling so no branch rides along untested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftedStratum {
    /// r = p·t exactly with p > 0: monotone increase toward the limit.
    MonotoneUp,
    /// r = p·t exactly with p ≤ 0: monotone decrease from x = 0.
    MonotoneDown,
    /// Interior critical point is the maximum.
    InteriorMax,
    /// Supremum sits at x = 0.
    MaxAtZero,
    /// Supremum is the x → ∞ limit.
    MaxAtInfinity,
    /// Both endpoints compete; the larger one wins.
    BoundaryMax,
}

impl ShiftedStratum {
    pub const ALL: [ShiftedStratum; 6] = [
        ShiftedStratum::MonotoneUp,
        ShiftedStratum::MonotoneDown,
        ShiftedStratum::InteriorMax,
        ShiftedStratum::MaxAtZero,
        ShiftedStratum::MaxAtInfinity,
        ShiftedStratum::BoundaryMax,
    ];
}

/// Coefficients (r, p, s, q, t) for (r + p·x)/√(s + q·x² + 2·t·q·x) drawn
/// from the requested stratum. Always satisfies q > 0 and s > q·t²; t is
/// pinned to exactly 0 on a fraction of draws. For the monotone strata the
/// returned r is the float product p·t, so the boundary holds exactly.
pub fn sample_shifted(rng: &mut ChaCha8Rng, stratum: ShiftedStratum) -> (f64, f64, f64, f64, f64) {
    loop {
        let s = uniform(rng, 0.2, 8.0);
        let q = uniform(rng, 0.2, 8.0);
        let t_max = 0.9 * (s / q).sqrt();
        let t = if rng.gen_ratio(1, 8) { 0.0 } else { uniform(rng, -t_max, t_max) };
        let p = uniform(rng, -8.0, 8.0);
        let r = uniform(rng, -8.0, 8.0);
        match stratum {
            ShiftedStratum::MonotoneUp => {
                let p = p.abs().max(1e-3);
                return (p * t, p, s, q, t);
            }
            ShiftedStratum::MonotoneDown => {
                let p = if rng.gen_ratio(1, 10) { 0.0 } else { -p.abs() };
                return (p * t, p, s, q, t);
            }
            ShiftedStratum::InteriorMax => {
                if r - p * t > 0.0 && p * s - r * t * q >= 0.0 {
                    return (r, p, s, q, t);
                }
            }
            ShiftedStratum::MaxAtZero => {
                if r - p * t > 0.0 && p * s - r * t * q < 0.0 {
                    return (r, p, s, q, t);
                }
            }
            ShiftedStratum::MaxAtInfinity => {
                if r - p * t < 0.0 && p * s - r * t * q >= 0.0 {
                    return (r, p, s, q, t);
                }
            }
            ShiftedStratum::BoundaryMax => {
                if r - p * t < 0.0 && p * s - r * t * q < 0.0 {
                    return (r, p, s, q, t);
                }
            }
        }
    }
}

/// Raw big-endian image-file bytes (magic 2051), assembled by hand.
pub fn idx_images_bytes(images: &[Vec<u8>], rows: u32, cols: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * (rows * cols) as usize);
    out.extend_from_slice(&2051u32.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&rows.to_be_bytes());
    out.extend_from_slice(&cols.to_be_bytes());
    for img in images {
        assert_eq!(img.len(), (rows * cols) as usize, "image size must match header");
        out.extend_from_slice(img);
    }
    out
}

/// Raw big-endian label-file bytes (magic 2049).
pub fn idx_labels_bytes(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&2049u32.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Gzip-compresses a byte buffer (for exercising the transparent
/// decompression path).
pub fn gzip_bytes(raw: &[u8]) -> Vec<u8> {
    let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::fast());
    enc.write_all(raw).expect("in-memory gzip");
    enc.finish().expect("in-memory gzip")
}

/// Paths of a generated stand-in for the digit-image corpus.
pub struct FakeMnist {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

/// Writes a deterministic 28×28 image corpus under `dir` using the standard
/// file names. Each image carries a label-dependent stroke pattern plus
/// noise pixels, so the classes are meaningfully learnable while the files
/// stay small and sparse.
pub fn write_fake_mnist(dir: &Path, n_train: usize, n_test: usize, seed: u64) -> std::io::Result<FakeMnist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut render = |n: usize| {
        let mut images = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let label = rng.gen_range(0..10u8);
            let mut img = vec![0u8; 28 * 28];
            // A label-specific diagonal band of bright pixels.
            for j in 0..24usize {
                let pos = (usize::from(label) * 67 + j * 29) % (28 * 28);
                img[pos] = 160 + (label % 4) * 20 + (j as u8 % 16);
            }
            // Plus a handful of noise pixels anywhere.
            for _ in 0..6 {
                let pos = rng.gen_range(0..28 * 28);
                img[pos] = rng.gen_range(1..=255u8);
            }
            images.push(img);
            labels.push(label);
        }
        (images, labels)
    };
    let (train_imgs, train_lbls) = render(n_train);
    let (test_imgs, test_lbls) = render(n_test);
    let paths = FakeMnist {
        train_images: dir.join("train-images-idx3-ubyte"),
        train_labels: dir.join("train-labels-idx1-ubyte"),
        test_images: dir.join("t10k-images-idx3-ubyte"),
        test_labels: dir.join("t10k-labels-idx1-ubyte"),
    };
    std::fs::write(&paths.train_images, idx_images_bytes(&train_imgs, 28, 28))?;
    std::fs::write(&paths.train_labels, idx_labels_bytes(&train_lbls))?;
    std::fs::write(&paths.test_images, idx_images_bytes(&test_imgs, 28, 28))?;
    std::fs::write(&paths.test_labels, idx_labels_bytes(&test_lbls))?;
    Ok(paths)
}

/// A sparse vector with up to `max_nnz` nonzeros at distinct indices and
/// values in [−1, −10⁻³] ∪ [10⁻³, 1].
pub fn random_sparse(rng: &mut ChaCha8Rng, dim: usize, max_nnz: usize) -> SparseVector<f64> {
    let nnz = rng.gen_range(0..=max_nnz.min(dim));
    let mut positions = rand::seq::index::sample(rng, dim, nnz).into_vec();
    positions.sort_unstable();
    let indices: Vec<u32> = positions.iter().map(|&i| i as u32).collect();
    let values: Vec<f64> = positions
        .iter()
        .map(|_| {
            let magnitude = uniform(rng, 1e-3, 1.0);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            sign * magnitude
        })
        .collect();
    SparseVector::new(dim, indices, values).expect("generated entries are sorted, in range, and nonzero")
}

/// A labeled stream of random sparse examples with occasional all-zero
/// vectors mixed in to exercise skip handling.
pub fn random_labeled_stream(
    rng: &mut ChaCha8Rng,
    n: usize,
    dim: usize,
    max_nnz: usize,
) -> Vec<(SparseVector<f64>, Label)> {
    (0..n)
        .map(|_| {
            let a = if rng.gen_ratio(1, 64) {
                SparseVector::zeros(dim)
            } else {
                let mut a = random_sparse(rng, dim, max_nnz);
                while a.is_zero() {
                    a = random_sparse(rng, dim, max_nnz);
                }
                a
            };
            let y = if rng.gen::<bool>() { Label::Pos } else { Label::Neg };
            (a, y)
        })
        .collect()
}
