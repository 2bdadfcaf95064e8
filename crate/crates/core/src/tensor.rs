//! Dense row-major tensors, trainable parameters, and the latent feature
//! matrix handed from the encoder to the clusterers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// N-dimensional array of reals in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<E: Scalar = f64> {
    shape: Vec<usize>,
    data: Vec<E>,
}

impl<E: Scalar> Tensor<E> {
    pub fn new(shape: impl Into<Vec<usize>>, data: Vec<E>) -> Result<Self> {
        let shape = shape.into();
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::dim(format!("zero dimension in shape {shape:?}")));
        }
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::dim(format!(
                "shape {shape:?} wants {numel} elements, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: impl Into<Vec<usize>>) -> Self {
        let shape = shape.into();
        let numel: usize = shape.iter().product();
        Tensor {
            shape,
            data: alloc::vec![E::ZERO; numel],
        }
    }

    pub fn filled(shape: impl Into<Vec<usize>>, value: E) -> Self {
        let shape = shape.into();
        let numel: usize = shape.iter().product();
        Tensor {
            shape,
            data: alloc::vec![value; numel],
        }
    }

    pub fn scalar(value: E) -> Self {
        Tensor {
            shape: alloc::vec![1],
            data: alloc::vec![value],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [E] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<E> {
        self.data
    }

    /// Scalar extraction; contract-errors unless the tensor has one element.
    pub fn item(&self) -> Result<E> {
        if self.data.len() == 1 {
            Ok(self.data[0])
        } else {
            Err(Error::contract(format!(
                "expected scalar tensor, shape is {:?}",
                self.shape
            )))
        }
    }

    pub fn reshape(mut self, shape: impl Into<Vec<usize>>) -> Result<Self> {
        let shape = shape.into();
        let numel: usize = shape.iter().product();
        if numel != self.data.len() {
            return Err(Error::dim(format!(
                "cannot reshape {:?} ({} elements) to {shape:?} ({numel})",
                self.shape,
                self.data.len()
            )));
        }
        self.shape = shape;
        Ok(self)
    }

    /// NaN/Inf detection; `what` names the tensor in the error message.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::numeric(format!(
                "non-finite value at flat index {i} of {what} (shape {:?})",
                self.shape
            ))),
        }
    }

    pub fn map(&self, f: impl Fn(E) -> E) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise accumulate: `self += other`. Shapes must match.
    pub fn add_assign(&mut self, other: &Tensor<E>) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::dim(format!(
                "add_assign shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        Ok(())
    }

    pub fn fill(&mut self, value: E) {
        for v in self.data.iter_mut() {
            *v = value;
        }
    }

    /// Lossy element-type conversion (used to switch precision modes).
    pub fn cast<T: Scalar>(&self) -> Tensor<T> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| T::from_f64(v.to_f64())).collect(),
        }
    }
}

/// Trainable value: tensor plus an accumulated gradient of the same shape.
///
/// The gradient starts out absent and is materialized by the first backward
/// pass that reaches the parameter; an absent gradient reads as zero.
#[derive(Debug, Clone)]
pub struct Parameter<E: Scalar = f64> {
    pub name: String,
    pub value: Tensor<E>,
    grad: Option<Tensor<E>>,
}

impl<E: Scalar> Parameter<E> {
    pub fn new(name: impl Into<String>, value: Tensor<E>) -> Self {
        Parameter {
            name: name.into(),
            value,
            grad: None,
        }
    }

    pub fn grad(&self) -> Option<&Tensor<E>> {
        self.grad.as_ref()
    }

    /// Gradient view, materializing zeros on first access.
    pub fn grad_mut(&mut self) -> &mut Tensor<E> {
        if self.grad.is_none() {
            self.grad = Some(Tensor::zeros(self.value.shape().to_vec()));
        }
        self.grad.as_mut().unwrap()
    }

    pub fn accumulate_grad(&mut self, g: &Tensor<E>) -> Result<()> {
        if g.shape() != self.value.shape() {
            return Err(Error::dim(format!(
                "gradient shape {:?} does not match parameter '{}' shape {:?}",
                g.shape(),
                self.name,
                self.value.shape()
            )));
        }
        self.grad_mut().add_assign(g)
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.fill(E::ZERO);
        }
    }
}

/// M x N matrix of encoded feature vectors, one row per sample. Always 64-bit:
/// clustering and evaluation run in full precision regardless of how the
/// model was trained.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LatentMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::dim(format!(
                "latent matrix {rows}x{cols} wants {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(LatentMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        LatentMatrix {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::numeric(format!(
                "non-finite latent value at flat index {i}"
            ))),
        }
    }

    /// Per-column z-scoring; constant columns are left untouched.
    pub fn standardized(&self) -> LatentMatrix {
        let (m, n) = (self.rows, self.cols);
        let mut mean = alloc::vec![0.0; n];
        let mut var = alloc::vec![0.0; n];
        for i in 0..m {
            for (j, &v) in self.row(i).iter().enumerate() {
                mean[j] += v;
            }
        }
        for v in mean.iter_mut() {
            *v /= m as f64;
        }
        for i in 0..m {
            for (j, &v) in self.row(i).iter().enumerate() {
                let d = v - mean[j];
                var[j] += d * d;
            }
        }
        let mut out = self.clone();
        for j in 0..n {
            let sd = crate::num::sqrt(var[j] / m as f64);
            if sd > 0.0 {
                for i in 0..m {
                    out.row_mut(i)[j] = (self.row(i)[j] - mean[j]) / sd;
                }
            }
        }
        out
    }
}

/// Squared Euclidean distance between two equal-length slices.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        let d = x - y;
        s += d * d;
    }
    s
}
