//! Dense third-order tensors and the t-product algebra.
//!
//! A [`Tensor3`] stores its `n1 x n2 x n3` entries slice-major: the frontal
//! slice index is outermost and each frontal slice is column-major, so entry
//! `(i, j, k)` lives at `k * n1 * n2 + j * n1 + i`.

mod algebra;
pub(crate) mod freq;
pub mod io;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TubalError};

pub use algebra::{
    bcirc, bcirc_oracle_tprod, fold, fro_norm, identity_tensor, inner, spectral_norm, tprod,
    ttranspose, unfold,
};
pub use freq::{from_freq, to_freq, CMatrix, FreqTensor, IMAG_RESIDUAL_TOL};

/// Shape of a third-order tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Dims {
    pub const fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Dims { n1, n2, n3 }
    }

    pub const fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn slice_len(&self) -> usize {
        self.n1 * self.n2
    }

    /// Shape of the conjugate transpose.
    pub const fn transposed(&self) -> Self {
        Dims::new(self.n2, self.n1, self.n3)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n1, self.n2, self.n3)
    }
}

/// Storage order of tensor entries. Only one layout exists; it is written into
/// every tensor file header so readers can reject anything else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceOrdering {
    SliceMajor,
}

/// Fixed storage and transform conventions of the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceLayoutDescriptor {
    pub ordering: SliceOrdering,
    /// Forward DFT is unnormalized; the inverse is scaled by `1/n3`.
    pub forward_unnormalized: bool,
}

impl SliceLayoutDescriptor {
    pub const CURRENT: SliceLayoutDescriptor = SliceLayoutDescriptor {
        ordering: SliceOrdering::SliceMajor,
        forward_unnormalized: true,
    };
}

/// Dense real third-order tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        let dims = Dims::new(n1, n2, n3);
        Tensor3 {
            dims,
            data: vec![0.0; dims.len()],
        }
    }

    pub fn zeros_like(dims: Dims) -> Self {
        Self::zeros(dims.n1, dims.n2, dims.n3)
    }

    /// Builds a tensor from slice-major data. All dimensions must be positive
    /// and every entry finite.
    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        if dims.n1 == 0 || dims.n2 == 0 || dims.n3 == 0 {
            return Err(TubalError::InvalidData(format!("zero dimension in {dims}")));
        }
        if data.len() != dims.len() {
            return Err(TubalError::InvalidData(format!(
                "{} entries supplied for a {dims} tensor",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(TubalError::InvalidData(format!(
                "non-finite entry at flat index {pos}"
            )));
        }
        Ok(Tensor3 { dims, data })
    }

    /// Builds without the finiteness check; used by kernels whose inputs are
    /// already validated and by solvers that must observe divergence.
    pub(crate) fn from_raw(dims: Dims, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.len());
        Tensor3 { dims, data }
    }

    pub fn from_fn(n1: usize, n2: usize, n3: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let dims = Dims::new(n1, n2, n3);
        let mut data = Vec::with_capacity(dims.len());
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { dims, data }
    }

    /// Stacks frontal slices; all slices must share a shape.
    pub fn from_slices(slices: &[DMatrix<f64>]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| TubalError::InvalidData("no frontal slices".into()))?;
        let (n1, n2) = first.shape();
        let dims = Dims::new(n1, n2, slices.len());
        let mut data = Vec::with_capacity(dims.len());
        for s in slices {
            if s.shape() != (n1, n2) {
                return Err(TubalError::dims(
                    "from_slices",
                    dims,
                    Dims::new(s.nrows(), s.ncols(), slices.len()),
                ));
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::from_vec(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn n1(&self) -> usize {
        self.dims.n1
    }

    pub fn n2(&self) -> usize {
        self.dims.n2
    }

    pub fn n3(&self) -> usize {
        self.dims.n3
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        k * self.dims.slice_len() + j * self.dims.n1 + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn frontal_slice(&self, k: usize) -> DMatrix<f64> {
        let len = self.dims.slice_len();
        DMatrix::from_column_slice(self.dims.n1, self.dims.n2, &self.data[k * len..(k + 1) * len])
    }

    pub fn frontal_slices(&self) -> Vec<DMatrix<f64>> {
        (0..self.dims.n3).map(|k| self.frontal_slice(k)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn scaled(&self, c: f64) -> Tensor3 {
        Tensor3::from_raw(self.dims, self.data.iter().map(|v| c * v).collect())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Tensor3) {
        assert_eq!(self.dims, other.dims, "axpy: dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// Relative Frobenius distance `||self - other|| / ||other||`, with the
    /// absolute distance returned when `other` is zero.
    pub fn rel_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "rel_diff: dimension mismatch");
        let num = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den = other.fro_norm();
        if den > 0.0 {
            num / den
        } else {
            num
        }
    }

    /// Stacks `self` on top of `other` along the first mode.
    pub fn vstack(&self, other: &Tensor3) -> Result<Tensor3> {
        if self.dims.n2 != other.dims.n2 || self.dims.n3 != other.dims.n3 {
            return Err(TubalError::dims("vstack", self.dims, other.dims));
        }
        let n1 = self.dims.n1 + other.dims.n1;
        Ok(Tensor3::from_fn(n1, self.dims.n2, self.dims.n3, |i, j, k| {
            if i < self.dims.n1 {
                self.get(i, j, k)
            } else {
                other.get(i - self.dims.n1, j, k)
            }
        }))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Tensor3> for &Tensor3 {
            type Output = Tensor3;
            fn $method(self, rhs: &Tensor3) -> Tensor3 {
                assert_eq!(self.dims, rhs.dims, concat!(stringify!($method), ": dimension mismatch"));
                let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect();
                Tensor3::from_raw(self.dims, data)
            }
        }
        impl $trait<Tensor3> for Tensor3 {
            type Output = Tensor3;
            fn $method(self, rhs: Tensor3) -> Tensor3 {
                &self $op &rhs
            }
        }
        impl $trait<&Tensor3> for Tensor3 {
            type Output = Tensor3;
            fn $method(self, rhs: &Tensor3) -> Tensor3 {
                &self $op rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl AddAssign<&Tensor3> for Tensor3 {
    fn add_assign(&mut self, rhs: &Tensor3) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Tensor3> for Tensor3 {
    fn sub_assign(&mut self, rhs: &Tensor3) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;
    fn mul(self, c: f64) -> Tensor3 {
        self.scaled(c)
    }
}

impl Mul<f64> for Tensor3 {
    type Output = Tensor3;
    fn mul(mut self, c: f64) -> Tensor3 {
        self.data.iter_mut().for_each(|v| *v *= c);
        self
    }
}

impl Neg for &Tensor3 {
    type Output = Tensor3;
    fn neg(self) -> Tensor3 {
        self.scaled(-1.0)
    }
}
