//! Rectangular grids and the discrete differential operators used by every
//! solver.
//!
//! Indexing follows the image convention `(i, j)` with `i` the row index and
//! `j` the column index. The "x" component of a [`VectorField`] is the
//! difference along rows (the `i` axis) and the "y" component is the
//! difference along columns (the `j` axis).
//!
//! The gradient uses forward differences and the divergence backward
//! differences, both with Neumann boundary handling, so that
//! `<grad u, v> = -<u, div v>` holds exactly in exact arithmetic.

use ndarray::{Array2, Zip};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {rows}x{cols}")]
    EmptyDimensions { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("expected {expected} values for the requested shape, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// An `M x N` array of real values: images, `h`, and the multiplier `lambda3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid(Array2<f64>);

impl ScalarGrid {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, GridError> {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self, GridError> {
        check_dims(rows, cols)?;
        Ok(Self(Array2::from_elem((rows, cols), value)))
    }

    /// Builds a grid from row-major values.
    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, GridError> {
        check_dims(rows, cols)?;
        if values.len() != rows * cols {
            return Err(GridError::LengthMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        let data = Array2::from_shape_vec((rows, cols), values)
            .expect("length checked against shape");
        Ok(Self(data))
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        f: impl FnMut((usize, usize)) -> f64,
    ) -> Result<Self, GridError> {
        check_dims(rows, cols)?;
        Ok(Self(Array2::from_shape_fn((rows, cols), f)))
    }

    pub fn from_array(data: Array2<f64>) -> Result<Self, GridError> {
        let (rows, cols) = data.dim();
        check_dims(rows, cols)?;
        Ok(Self(data))
    }

    pub(crate) fn from_raw(data: Array2<f64>) -> Self {
        debug_assert!(data.nrows() > 0 && data.ncols() > 0);
        Self(data)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.0.dim()
    }

    /// Number of pixels `J = M * N`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; grids have strictly positive dimensions.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[[i, j]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    /// Row-major copy of the values.
    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    /// Row-major iterator over the values.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl FnMut(&f64) -> f64) -> Self {
        Self(self.0.map(f))
    }

    /// Pointwise combination of two grids of the same shape.
    pub fn zip_map(
        &self,
        other: &Self,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        self.ensure_same_dim(other)?;
        let out = Zip::from(&self.0)
            .and(&other.0)
            .map_collect(|&a, &b| f(a, b));
        Ok(Self(out))
    }

    pub(crate) fn ensure_same_dim(&self, other: &Self) -> Result<(), GridError> {
        if self.dim() != other.dim() {
            return Err(GridError::ShapeMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Euclidean norm over all pixels.
    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A pair of grids `(x, y)` of identical shape: `p`, `n`, `lambda1`, `lambda2`
/// and gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    x: ScalarGrid,
    y: ScalarGrid,
}

impl VectorField {
    pub fn new(x: ScalarGrid, y: ScalarGrid) -> Result<Self, GridError> {
        x.ensure_same_dim(&y)?;
        Ok(Self { x, y })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, GridError> {
        Ok(Self {
            x: ScalarGrid::zeros(rows, cols)?,
            y: ScalarGrid::zeros(rows, cols)?,
        })
    }

    pub fn x(&self) -> &ScalarGrid {
        &self.x
    }

    pub fn y(&self) -> &ScalarGrid {
        &self.y
    }

    pub fn into_parts(self) -> (ScalarGrid, ScalarGrid) {
        (self.x, self.y)
    }

    pub fn dim(&self) -> (usize, usize) {
        self.x.dim()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Per-pixel Euclidean magnitude `sqrt(x^2 + y^2)`.
    pub fn magnitude(&self) -> ScalarGrid {
        ScalarGrid(
            Zip::from(&self.x.0)
                .and(&self.y.0)
                .map_collect(|&a, &b| (a * a + b * b).sqrt()),
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x.map(|v| v * factor),
            y: self.y.map(|v| v * factor),
        }
    }

    pub(crate) fn ensure_grid_dim(&self, grid: &ScalarGrid) -> Result<(), GridError> {
        self.x.ensure_same_dim(grid)
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<(), GridError> {
    if rows == 0 || cols == 0 {
        return Err(GridError::EmptyDimensions { rows, cols });
    }
    Ok(())
}

/// Forward-difference gradient with a zero last row (x) and last column (y).
pub fn grad_forward(u: &ScalarGrid) -> VectorField {
    let (rows, cols) = u.dim();
    let a = &u.0;
    let x = Array2::from_shape_fn((rows, cols), |(i, j)| {
        if i + 1 < rows {
            a[[i + 1, j]] - a[[i, j]]
        } else {
            0.0
        }
    });
    let y = Array2::from_shape_fn((rows, cols), |(i, j)| {
        if j + 1 < cols {
            a[[i, j + 1]] - a[[i, j]]
        } else {
            0.0
        }
    });
    VectorField {
        x: ScalarGrid(x),
        y: ScalarGrid(y),
    }
}

/// Backward-difference divergence, the negative adjoint of [`grad_forward`].
///
/// Along each axis the value at the first index is `v(1)`, interior values
/// are `v(i) - v(i-1)` and the last index gives `-v(M-1)`. A single-row (or
/// single-column) axis contributes nothing, matching the zero gradient there.
pub fn div_backward(v: &VectorField) -> ScalarGrid {
    let (rows, cols) = v.dim();
    let vx = &v.x.0;
    let vy = &v.y.0;
    let out = Array2::from_shape_fn((rows, cols), |(i, j)| {
        let mut dx = if i + 1 < rows { vx[[i, j]] } else { 0.0 };
        if i > 0 {
            dx -= vx[[i - 1, j]];
        }
        let mut dy = if j + 1 < cols { vy[[i, j]] } else { 0.0 };
        if j > 0 {
            dy -= vy[[i, j - 1]];
        }
        dx + dy
    });
    ScalarGrid(out)
}

/// `div_backward(grad_forward(u))`.
pub fn laplacian(u: &ScalarGrid) -> ScalarGrid {
    div_backward(&grad_forward(u))
}

/// Sum of pointwise products, accumulated in row-major order.
pub trait InnerProduct {
    fn inner(&self, other: &Self) -> Result<f64, GridError>;
}

impl InnerProduct for ScalarGrid {
    fn inner(&self, other: &Self) -> Result<f64, GridError> {
        self.ensure_same_dim(other)?;
        Ok(self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum())
    }
}

impl InnerProduct for VectorField {
    fn inner(&self, other: &Self) -> Result<f64, GridError> {
        Ok(self.x.inner(&other.x)? + self.y.inner(&other.y)?)
    }
}

pub fn inner_product<T: InnerProduct>(a: &T, b: &T) -> Result<f64, GridError> {
    a.inner(b)
}
