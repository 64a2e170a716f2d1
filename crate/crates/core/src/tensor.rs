//! Dense N-dimensional tensors, dense matrices and tensor circular unfoldings.
//!
//! Storage is colexicographic throughout: the first index varies fastest. A
//! tensor of shape `(I_1, ..., I_N)` stores element `(i_1, ..., i_N)` (0-based)
//! at flat offset `i_1 + I_1 * (i_2 + I_2 * (i_3 + ...))`. [`DenseMatrix`] is
//! column-major, which is the same convention specialised to order two, so a
//! mode-1 unfolding of an order-2 tensor is the tensor read as a matrix.
//!
//! A circular unfolding `X<k,d>` places the `d` cyclically consecutive modes
//! `t, t+1, ..., k` on the rows and the remaining `N - d` modes
//! `k+1, ..., t-1` on the columns, where `t = k - d + 1` wrapped into `1..=N`.
//! Inside each group the first listed mode varies fastest.

use crate::error::{Error, Result};

/// Dense real tensor of order at least two.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = checked_len(&shape)?;
        if data.len() != len {
            return Err(Error::Shape(format!(
                "data length {} does not match shape {:?} ({} elements)",
                data.len(),
                shape,
                len
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = checked_len(&shape)?;
        Ok(Self {
            shape,
            data: vec![0.0; len],
        })
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        let len = checked_len(&shape)?;
        Ok(Self {
            shape,
            data: vec![value; len],
        })
    }

    /// Builds a tensor by evaluating `f` at every 0-based multi-index.
    pub fn from_fn<F>(shape: Vec<usize>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> f64,
    {
        let len = checked_len(&shape)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, &shape);
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &DenseTensor) -> bool {
        self.shape == other.shape
    }

    /// Flat offset of a 0-based multi-index.
    pub fn flat_index(&self, index: &[usize]) -> usize {
        flat_index(&self.shape, index)
    }

    /// 0-based multi-index of a flat offset.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        multi_index(&self.shape, flat)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.flat_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let at = self.flat_index(index);
        self.data[at] = value;
    }

    /// Replaces the shape while keeping the flat data untouched.
    pub fn reshape(&self, new_shape: Vec<usize>) -> Result<DenseTensor> {
        let len = checked_len(&new_shape)?;
        if len != self.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} ({} elements) into {:?} ({} elements)",
                self.shape,
                self.len(),
                new_shape,
                len
            )));
        }
        Ok(DenseTensor {
            shape: new_shape,
            data: self.data.clone(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// `‖self − other‖_F`; shapes must agree.
    pub fn distance(&self, other: &DenseTensor) -> f64 {
        assert!(self.same_shape(other), "shape mismatch in distance");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseTensor) {
        assert!(self.same_shape(other), "shape mismatch in add_scaled");
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += alpha * b);
    }
}

pub fn frobenius_norm(x: &DenseTensor) -> f64 {
    x.frobenius_norm()
}

pub fn reshape(x: &DenseTensor, new_shape: Vec<usize>) -> Result<DenseTensor> {
    x.reshape(new_shape)
}

fn checked_len(shape: &[usize]) -> Result<usize> {
    if shape.len() < 2 {
        return Err(Error::Shape(format!(
            "tensor order must be at least 2, got shape {shape:?}"
        )));
    }
    if shape.contains(&0) {
        return Err(Error::Shape(format!(
            "tensor dimensions must be positive, got {shape:?}"
        )));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::Shape(format!("shape {shape:?} overflows usize")))
}

pub(crate) fn norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Colexicographic odometer step.
#[inline]
pub(crate) fn advance(idx: &mut [usize], shape: &[usize]) {
    for (i, &n) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < n {
            return;
        }
        *i = 0;
    }
}

pub fn flat_index(shape: &[usize], index: &[usize]) -> usize {
    debug_assert_eq!(shape.len(), index.len());
    index
        .iter()
        .zip(shape)
        .rev()
        .fold(0, |acc, (&i, &n)| {
            debug_assert!(i < n);
            acc * n + i
        })
}

pub fn multi_index(shape: &[usize], mut flat: usize) -> Vec<usize> {
    shape
        .iter()
        .map(|&n| {
            let i = flat % n;
            flat /= n;
            i
        })
        .collect()
}

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; convenient in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Shape("empty matrix".into()));
        }
        Ok(Self::from_fn(n_rows, n_cols, |r, c| rows[r][c]))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn from_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        Self::from_fn(rows, cols, |r, c| {
            if r == c && r < diag.len() {
                diag[r]
            } else {
                0.0
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r + self.rows * c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r + self.rows * c] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn distance(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Mode grouping for the circular unfolding `X<k,d>` of an order-`N` tensor.
///
/// `k` and `t` are 1-based in the public accessors; everything is stored
/// 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircularUnfolding {
    order: usize,
    mode: usize,
    step: usize,
    start: usize,
}

impl CircularUnfolding {
    /// `k` is the 1-based mode ending the row group, `d` the step-length.
    pub fn new(k: usize, d: usize, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidSpec(format!(
                "tensor order must be at least 2, got {order}"
            )));
        }
        if k == 0 || k > order {
            return Err(Error::InvalidSpec(format!(
                "mode k={k} outside 1..={order}"
            )));
        }
        if d == 0 || d >= order {
            return Err(Error::InvalidSpec(format!(
                "step-length d={d} must satisfy 1 <= d < {order}"
            )));
        }
        let t = if d <= k { k - d + 1 } else { k + order + 1 - d };
        Ok(Self {
            order,
            mode: k - 1,
            step: d,
            start: t - 1,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn k(&self) -> usize {
        self.mode + 1
    }

    pub fn d(&self) -> usize {
        self.step
    }

    pub fn t(&self) -> usize {
        self.start + 1
    }

    /// 0-based modes `t, ..., k` in row order (first varies fastest).
    pub fn row_modes(&self) -> Vec<usize> {
        (0..self.step)
            .map(|j| (self.start + j) % self.order)
            .collect()
    }

    /// 0-based modes `k+1, ..., t-1` in column order (first varies fastest).
    pub fn col_modes(&self) -> Vec<usize> {
        (0..self.order - self.step)
            .map(|j| (self.mode + 1 + j) % self.order)
            .collect()
    }

    /// `(rows, cols)` of the unfolding for a tensor of the given shape.
    pub fn matrix_dims(&self, shape: &[usize]) -> Result<(usize, usize)> {
        self.check_order(shape.len())?;
        let rows = self.row_modes().iter().map(|&m| shape[m]).product();
        let cols = self.col_modes().iter().map(|&m| shape[m]).product();
        Ok((rows, cols))
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order != self.order {
            return Err(Error::InvalidSpec(format!(
                "spec is for order {} but tensor has order {order}",
                self.order
            )));
        }
        Ok(())
    }

    /// Offset in the column-major unfolding contributed by a unit step
    /// along each tensor mode.
    fn matrix_strides(&self, shape: &[usize]) -> (usize, Vec<usize>) {
        let mut strides = vec![0usize; self.order];
        let mut s = 1;
        for m in self.row_modes() {
            strides[m] = s;
            s *= shape[m];
        }
        let rows = s;
        for m in self.col_modes() {
            strides[m] = s;
            s *= shape[m];
        }
        (rows, strides)
    }
}

/// Scatters tensor offsets onto matrix offsets (or back) in a single pass.
fn permute(shape: &[usize], strides: &[usize], src: &[f64], dst: &mut [f64], to_matrix: bool) {
    let mut idx = vec![0usize; shape.len()];
    let mut target = 0usize;
    for flat in 0..src.len() {
        if to_matrix {
            dst[target] = src[flat];
        } else {
            dst[flat] = src[target];
        }
        // odometer with incremental target offset
        for (m, i) in idx.iter_mut().enumerate() {
            *i += 1;
            target += strides[m];
            if *i < shape[m] {
                break;
            }
            target -= strides[m] * shape[m];
            *i = 0;
        }
    }
}

/// `X<k,d>` as a column-major matrix.
pub fn circular_unfold(x: &DenseTensor, spec: &CircularUnfolding) -> Result<DenseMatrix> {
    spec.check_order(x.order())?;
    let (rows, strides) = spec.matrix_strides(x.shape());
    let cols = x.len() / rows;
    let mut data = vec![0.0; x.len()];
    permute(x.shape(), &strides, x.data(), &mut data, true);
    Ok(DenseMatrix { rows, cols, data })
}

/// Inverse of [`circular_unfold`].
pub fn circular_fold(
    m: &DenseMatrix,
    spec: &CircularUnfolding,
    shape: &[usize],
) -> Result<DenseTensor> {
    let (rows, cols) = spec.matrix_dims(shape)?;
    if (m.rows(), m.cols()) != (rows, cols) {
        return Err(Error::Shape(format!(
            "matrix is {}x{} but unfolding <{},{}> of {:?} is {rows}x{cols}",
            m.rows(),
            m.cols(),
            spec.k(),
            spec.d(),
            shape
        )));
    }
    let (_, strides) = spec.matrix_strides(shape);
    let mut data = vec![0.0; m.data().len()];
    permute(shape, &strides, m.data(), &mut data, false);
    DenseTensor::new(shape.to_vec(), data)
}
