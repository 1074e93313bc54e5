use std::ops::Index;

use nalgebra::DMatrix;

use super::Shape;
use crate::error::{Error, Result};
use crate::linalg;

/// A dense real tensor stored in the column-major linearization of [`Shape`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self> {
        let expected = shape.num_entries();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(DenseTensor { shape, values })
    }

    pub fn zeros(shape: Shape) -> Self {
        let n = shape.num_entries();
        DenseTensor {
            shape,
            values: vec![0.0; n],
        }
    }

    /// Builds a tensor from a function of the 0-based multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let values = shape.indices().map(|x| f(&x)).collect();
        DenseTensor { shape, values }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.shape
            .linear_index(index)
            .ok()
            .map(|k| self.values[k])
    }

    pub fn set(&mut self, index: &[usize], value: f64) -> Result<()> {
        let k = self.shape.linear_index(index)?;
        self.values[k] = value;
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        linalg::frobenius(&self.values)
    }

    /// ‖self − other‖ / ‖other‖ (absolute when `other` is zero).
    pub fn relative_error(&self, other: &DenseTensor) -> f64 {
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = other.norm();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    /// The `mode`-th unfolding `Ũ_(i)`, an `N_i × N̄_i` matrix with rows indexed
    /// by `(x_1, …, x_i)` and columns by `(x_{i+1}, …, x_d)`, both column-major.
    ///
    /// `mode` is 1-based and must lie in `1..=d-1`.
    pub fn unfold(&self, mode: usize) -> Result<DMatrix<f64>> {
        let d = self.shape.order();
        self.shape.check_mode(mode, d - 1)?;
        let rows = self.shape.leading_product(mode);
        let cols = self.shape.trailing_product(mode);
        // Column-major storage makes the unfolding a pure reshape.
        Ok(DMatrix::from_column_slice(rows, cols, &self.values))
    }

    /// Inverse of [`DenseTensor::unfold`].
    pub fn refold(shape: Shape, mode: usize, m: &DMatrix<f64>) -> Result<Self> {
        let d = shape.order();
        shape.check_mode(mode, d - 1)?;
        let rows = shape.leading_product(mode);
        let cols = shape.trailing_product(mode);
        if m.nrows() != rows || m.ncols() != cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: m.len(),
            });
        }
        DenseTensor::new(shape, m.as_slice().to_vec())
    }

    /// The `mode`-th matricization `U_(i)`: `n_i` rows, and one column per
    /// assignment of the remaining indices in their column-major order.
    ///
    /// `mode` is 1-based in `1..=d`; `matricize(1) == unfold(1)`.
    pub fn matricize(&self, mode: usize) -> Result<DMatrix<f64>> {
        let d = self.shape.order();
        self.shape.check_mode(mode, d)?;
        let (lower, n, upper) = self.split(mode);
        Ok(DMatrix::from_fn(n, lower * upper, |x, col| {
            let (a, b) = (col % lower, col / lower);
            self.values[a + lower * (x + n * b)]
        }))
    }

    /// Inverse of [`DenseTensor::matricize`].
    pub fn dematricize(shape: Shape, mode: usize, m: &DMatrix<f64>) -> Result<Self> {
        let d = shape.order();
        shape.check_mode(mode, d)?;
        let lower = shape.leading_product(mode - 1);
        let n = shape.dims()[mode - 1];
        let upper = shape.trailing_product(mode);
        if m.nrows() != n || m.ncols() != lower * upper {
            return Err(Error::LengthMismatch {
                expected: shape.num_entries(),
                got: m.len(),
            });
        }
        let mut values = vec![0.0; shape.num_entries()];
        for b in 0..upper {
            for x in 0..n {
                for a in 0..lower {
                    values[a + lower * (x + n * b)] = m[(x, a + lower * b)];
                }
            }
        }
        DenseTensor::new(shape, values)
    }

    fn split(&self, mode: usize) -> (usize, usize, usize) {
        (
            self.shape.leading_product(mode - 1),
            self.shape.dims()[mode - 1],
            self.shape.trailing_product(mode),
        )
    }
}

impl Index<&[usize]> for DenseTensor {
    type Output = f64;

    fn index(&self, index: &[usize]) -> &f64 {
        let k = self
            .shape
            .linear_index(index)
            .unwrap_or_else(|e| panic!("{e}"));
        &self.values[k]
    }
}
