//! Dense row-major tensors, last axis varying fastest.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "tensor of shape {shape:?} needs {expected} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self { shape, data: vec![T::zero(); len] }
    }

    /// Rank-0 tensor holding a single value.
    pub fn scalar(value: T) -> Self {
        Self { shape: Vec::new(), data: vec![value] }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        for_each_index(&shape, |idx| data.push(f(idx)));
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        index
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn get(&self, index: &[usize]) -> &T {
        &self.data[self.flat_index(index)]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Tensor<U> {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(f).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "cannot combine shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// Fix `axis` at `idx`, dropping that axis.
    pub fn slice_axis(&self, axis: usize, idx: usize) -> Self {
        assert!(axis < self.rank() && idx < self.shape[axis]);
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let dim = self.shape[axis];
        let mut data = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * dim * inner + idx * inner;
            data.extend_from_slice(&self.data[base..base + inner]);
        }
        let mut shape = self.shape.clone();
        shape.remove(axis);
        Self { shape, data }
    }

    /// Contract `axis` against `v`, dropping that axis.
    pub fn contract_axis(&self, axis: usize, v: &[T]) -> Result<Self> {
        if axis >= self.rank() {
            return Err(Error::InvalidIndex(format!("axis {axis} of rank-{} tensor", self.rank())));
        }
        let dim = self.shape[axis];
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut data = vec![T::zero(); outer * inner];
        for o in 0..outer {
            for (a, va) in v.iter().enumerate() {
                if va.is_zero() {
                    continue;
                }
                let base = o * dim * inner + a * inner;
                let out = &mut data[o * inner..(o + 1) * inner];
                for (slot, x) in out.iter_mut().zip(&self.data[base..base + inner]) {
                    let mut term = va.clone();
                    term *= x;
                    if slot.is_zero() {
                        *slot = term;
                    } else {
                        *slot += &term;
                    }
                }
            }
        }
        let mut shape = self.shape.clone();
        shape.remove(axis);
        Ok(Self { shape, data })
    }

    /// Replace the entries along `axis` by `new[.., r, ..] = Σ_c mat[r][c] old[.., c, ..]`.
    /// `mat` has one row per new index and `shape[axis]` columns.
    pub fn transform_axis(&self, axis: usize, mat: &[Vec<T>]) -> Result<Self> {
        let dim = self.shape[axis];
        if mat.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mat.first().map_or(0, Vec::len),
            });
        }
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let new_dim = mat.len();
        let mut data = vec![T::zero(); outer * new_dim * inner];
        for o in 0..outer {
            for (r, row) in mat.iter().enumerate() {
                let out_base = o * new_dim * inner + r * inner;
                for (c, coef) in row.iter().enumerate() {
                    if coef.is_zero() {
                        continue;
                    }
                    let in_base = o * dim * inner + c * inner;
                    for t in 0..inner {
                        data[out_base + t] =
                            data[out_base + t].clone() + coef.clone() * self.data[in_base + t].clone();
                    }
                }
            }
        }
        let mut shape = self.shape.clone();
        shape[axis] = new_dim;
        Ok(Self { shape, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.as_f64().abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}

pub fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Visit every multi-index of `shape` in row-major order.
pub fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut axis = shape.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < shape[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}
