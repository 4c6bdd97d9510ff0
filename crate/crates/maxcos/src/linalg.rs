//! Sparse/dense vector primitives for the hot trial loop.
//!
//! Examples are [`SparseVector`]s (sorted index/value pairs, zeros omitted);
//! hypotheses are [`DenseVector`]s. Every per-trial operation — dot product,
//! squared norm, the rank-one update — costs O(nnz of the example), and
//! [`axpy_update`] maintains the hypothesis norm incrementally via
//! ‖w + λya‖² = ‖w‖² + λ²‖a‖² + 2λy(w·a) instead of rescanning the dense
//! vector.

use thiserror::Error;

use crate::classifiers::Label;
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("sparse index {index} out of bounds for dimension {dim}")]
    IndexOutOfBounds { index: u32, dim: usize },
    #[error("sparse indices must be strictly increasing (violated at position {position})")]
    UnsortedIndices { position: usize },
    #[error("sparse entry at index {index} is exactly zero; zeros must be omitted")]
    StoredZero { index: u32 },
}

/// Sparse feature vector: strictly increasing indices, no stored zeros.
///
/// Indices and values live in parallel arrays; `u32` indices are plenty for
/// pixel features and halve the per-entry footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector<T> {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<T>,
}

impl<T: Scalar> SparseVector<T> {
    /// Builds from parallel index/value arrays, validating the invariants:
    /// indices strictly increasing and in range, no value exactly zero.
    pub fn new(dim: usize, indices: Vec<u32>, values: Vec<T>) -> Result<Self, LinalgError> {
        if indices.len() != values.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: indices.len(),
                actual: values.len(),
            });
        }
        for (pos, &idx) in indices.iter().enumerate() {
            if idx as usize >= dim {
                return Err(LinalgError::IndexOutOfBounds { index: idx, dim });
            }
            if pos > 0 && indices[pos - 1] >= idx {
                return Err(LinalgError::UnsortedIndices { position: pos });
            }
            if values[pos] == T::zero() {
                return Err(LinalgError::StoredZero { index: idx });
            }
        }
        Ok(Self { dim, indices, values })
    }

    /// Builds from a dense slice, dropping exact zeros.
    pub fn from_dense(dense: &[T]) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, &v) in dense.iter().enumerate() {
            if v != T::zero() {
                indices.push(i as u32);
                values.push(v);
            }
        }
        Self { dim: dense.len(), indices, values }
    }

    /// The all-zero vector: no stored entries.
    pub fn zeros(dim: usize) -> Self {
        Self { dim, indices: Vec::new(), values: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    /// Stored entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i as usize, v))
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Dense hypothesis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> DenseVector<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { values: vec![T::zero(); dim] }
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// Σ over entries of the squared value, computed from scratch.
    pub fn norm_sq(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    /// Overwrites with `scale · y · a`, zeroing everything else.
    pub fn assign_scaled(&mut self, scale: T, y: Label, a: &SparseVector<T>) -> Result<(), LinalgError> {
        check_dims(self.dim(), a)?;
        self.values.iter_mut().for_each(|v| *v = T::zero());
        let s = scale * y.sign::<T>();
        for (i, v) in a.iter() {
            self.values[i] = s * v;
        }
        Ok(())
    }

    /// Rescales every entry in place (aggressive-ROMMA retained-hypothesis factor).
    pub fn scale_in_place(&mut self, factor: T) {
        self.values.iter_mut().for_each(|v| *v = *v * factor);
    }
}

fn check_dims<T: Scalar>(dim: usize, a: &SparseVector<T>) -> Result<(), LinalgError> {
    if a.dim() != dim {
        return Err(LinalgError::DimensionMismatch { expected: dim, actual: a.dim() });
    }
    Ok(())
}

/// Inner product w·a; cost proportional to the stored entries of `a`.
pub fn dot<T: Scalar>(w: &DenseVector<T>, a: &SparseVector<T>) -> Result<T, LinalgError> {
    check_dims(w.dim(), a)?;
    let ws = w.as_slice();
    Ok(a.iter().fold(T::zero(), |acc, (i, v)| acc + ws[i] * v))
}

/// Dense-dense inner product (used by the replay verifier, not the trial loop).
pub fn dot_dense<T: Scalar>(u: &DenseVector<T>, v: &DenseVector<T>) -> Result<T, LinalgError> {
    if u.dim() != v.dim() {
        return Err(LinalgError::DimensionMismatch { expected: u.dim(), actual: v.dim() });
    }
    Ok(u.as_slice()
        .iter()
        .zip(v.as_slice())
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b))
}

/// Σ value² of a sparse vector; strictly positive iff it has entries.
pub fn norm_sq<T: Scalar>(a: &SparseVector<T>) -> T {
    a.iter().fold(T::zero(), |acc, (_, v)| acc + v * v)
}

/// In-place rank-one update `w ← w + λ·y·a`, touching only the stored
/// entries of `a`. Returns the updated squared norm via the closed-form
/// identity ‖w‖² + λ²‖a‖² + 2λy(w·a); `norm_sq_w` must be ‖w‖² on entry.
pub fn axpy_update<T: Scalar>(
    w: &mut DenseVector<T>,
    norm_sq_w: T,
    lambda: T,
    y: Label,
    a: &SparseVector<T>,
) -> Result<T, LinalgError> {
    let w_dot_a = dot(w, a)?;
    let ys = y.sign::<T>();
    let step = lambda * ys;
    let ws = &mut w.values;
    for (i, v) in a.iter() {
        ws[i] = ws[i] + step * v;
    }
    let two = T::one() + T::one();
    Ok(norm_sq_w + lambda * lambda * norm_sq(a) + two * lambda * ys * w_dot_a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(dim: usize, entries: &[(u32, f64)]) -> SparseVector<f64> {
        let (idx, val): (Vec<_>, Vec<_>) = entries.iter().copied().unzip();
        SparseVector::new(dim, idx, val).unwrap()
    }

    #[test]
    fn dot_single_entry_projects() {
        let w = DenseVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(dot(&w, &sv(3, &[(1, 1.0)])).unwrap(), 2.0);
    }

    #[test]
    fn dot_with_zero_hypothesis() {
        let w = DenseVector::zeros(3);
        assert_eq!(dot(&w, &sv(3, &[(0, 5.0), (2, -1.0)])).unwrap(), 0.0);
    }

    #[test]
    fn dot_two_entry_example() {
        let w = DenseVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(dot(&w, &sv(2, &[(0, 0.4), (1, 0.3)])).unwrap(), 0.4);
    }

    #[test]
    fn dot_rejects_dimension_mismatch() {
        let w = DenseVector::zeros(3);
        assert!(matches!(
            dot(&w, &sv(4, &[(3, 1.0)])),
            Err(LinalgError::DimensionMismatch { expected: 3, actual: 4 })
        ));
    }

    #[test]
    fn norm_sq_cases() {
        assert_eq!(norm_sq(&SparseVector::<f64>::zeros(7)), 0.0);
        assert_eq!(norm_sq(&sv(2, &[(0, 3.0), (1, 4.0)])), 25.0);
        assert_eq!(norm_sq(&sv(2, &[(0, 0.4), (1, 0.3)])), 0.25);
    }

    #[test]
    fn axpy_adds_and_tracks_norm() {
        let mut w = DenseVector::from_vec(vec![1.0, 0.0]);
        let ns = axpy_update(&mut w, 1.0, 1.0, Label::Pos, &sv(2, &[(1, 1.0)])).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 1.0]);
        assert_eq!(ns, 2.0);
    }

    #[test]
    fn axpy_zero_lambda_is_identity() {
        let mut w = DenseVector::from_vec(vec![1.0, 1.0]);
        let ns = axpy_update(&mut w, 2.0, 0.0, Label::Neg, &sv(2, &[(0, 9.0)])).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 1.0]);
        assert_eq!(ns, 2.0);
    }

    #[test]
    fn axpy_negative_label_cancels() {
        let mut w = DenseVector::from_vec(vec![2.0, 0.0]);
        let ns = axpy_update(&mut w, 4.0, 0.5, Label::Neg, &sv(2, &[(0, 2.0)])).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
        assert_eq!(ns, 1.0);
    }

    #[test]
    fn constructor_enforces_invariants() {
        assert!(matches!(
            SparseVector::new(3, vec![1, 1], vec![1.0, 2.0]),
            Err(LinalgError::UnsortedIndices { position: 1 })
        ));
        assert!(matches!(
            SparseVector::new(3, vec![2, 1], vec![1.0, 2.0]),
            Err(LinalgError::UnsortedIndices { position: 1 })
        ));
        assert!(matches!(
            SparseVector::new(3, vec![0], vec![0.0]),
            Err(LinalgError::StoredZero { index: 0 })
        ));
        assert!(matches!(
            SparseVector::new(3, vec![3], vec![1.0]),
            Err(LinalgError::IndexOutOfBounds { index: 3, dim: 3 })
        ));
    }

    #[test]
    fn from_dense_drops_zeros_and_round_trips() {
        let dense = vec![0.0, 1.5, 0.0, -2.0];
        let s = SparseVector::from_dense(&dense);
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.to_dense(), dense);
    }
}
