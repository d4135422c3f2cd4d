//! DFT along the third mode and the frequency-domain view of a tensor.

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use rustfft::{Fft, FftPlanner};

use super::{Dims, Tensor3};
use crate::error::{Result, TubalError};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest tolerated imaginary residual after an inverse transform, relative to
/// the Frobenius norm of the real result.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Frequency-domain image of a third-order tensor: `n3` complex frontal
/// slices, slice `k` being the `k`-th DFT coefficient of every tube.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqTensor {
    dims: Dims,
    slices: Vec<CMatrix>,
}

/// Slices `k` in `0..=n3/2` determine the rest: for a real tensor slice
/// `n3 - k` is the conjugate of slice `k`.
#[inline]
pub(crate) fn independent_slices(n3: usize) -> std::ops::RangeInclusive<usize> {
    0..=n3 / 2
}

/// Slice 0, and slice `n3/2` when `n3` is even, are real for real tensors.
#[inline]
pub(crate) fn is_self_conjugate(k: usize, n3: usize) -> bool {
    k == 0 || 2 * k == n3
}

/// Fills a full set of `n3` per-slice results from the independent half,
/// conjugating into the mirrored positions.
pub(crate) fn mirror_slices<T: Conjugate>(half: Vec<T>, n3: usize) -> Vec<T> {
    debug_assert_eq!(half.len(), n3 / 2 + 1);
    let mut out = half;
    for k in n3 / 2 + 1..n3 {
        let mirrored = out[n3 - k].conjugate();
        out.push(mirrored);
    }
    out
}

pub(crate) trait Conjugate {
    fn conjugate(&self) -> Self;
}

impl Conjugate for CMatrix {
    fn conjugate(&self) -> Self {
        self.map(|z| z.conj())
    }
}

impl Conjugate for Vec<f64> {
    fn conjugate(&self) -> Self {
        self.clone()
    }
}

impl<A: Conjugate, B: Conjugate> Conjugate for (A, B) {
    fn conjugate(&self) -> Self {
        (self.0.conjugate(), self.1.conjugate())
    }
}

impl<A: Conjugate, B: Conjugate, C: Conjugate> Conjugate for (A, B, C) {
    fn conjugate(&self) -> Self {
        (self.0.conjugate(), self.1.conjugate(), self.2.conjugate())
    }
}

impl FreqTensor {
    pub fn zeros(dims: Dims) -> Self {
        FreqTensor {
            dims,
            slices: (0..dims.n3).map(|_| CMatrix::zeros(dims.n1, dims.n2)).collect(),
        }
    }

    pub fn from_slices(slices: Vec<CMatrix>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| TubalError::InvalidData("no frequency slices".into()))?;
        let (n1, n2) = first.shape();
        let dims = Dims::new(n1, n2, slices.len());
        if let Some(bad) = slices.iter().find(|s| s.shape() != (n1, n2)) {
            return Err(TubalError::dims(
                "FreqTensor::from_slices",
                dims,
                Dims::new(bad.nrows(), bad.ncols(), slices.len()),
            ));
        }
        Ok(FreqTensor { dims, slices })
    }

    /// Builds a conjugate-symmetric tensor from its independent half
    /// (`n3/2 + 1` slices).
    pub fn from_half(half: Vec<CMatrix>, n3: usize) -> Result<Self> {
        if half.len() != n3 / 2 + 1 {
            return Err(TubalError::InvalidData(format!(
                "{} independent slices supplied for n3 = {n3}",
                half.len()
            )));
        }
        Self::from_slices(mirror_slices(half, n3))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn slices(&self) -> &[CMatrix] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &CMatrix {
        &self.slices[k]
    }

    pub fn into_slices(self) -> Vec<CMatrix> {
        self.slices
    }

    /// Applies `f` to the independent slices and mirrors the results, so the
    /// output stays conjugate-symmetric whenever `f` commutes with conjugation.
    pub fn map_paired(&self, mut f: impl FnMut(usize, &CMatrix) -> CMatrix) -> FreqTensor {
        let n3 = self.dims.n3;
        let half = independent_slices(n3).map(|k| f(k, &self.slices[k])).collect();
        FreqTensor::from_half(half, n3).expect("map_paired: inconsistent slice shapes")
    }

    /// Slicewise matrix product: the t-product in the frequency domain.
    pub fn tprod(&self, other: &FreqTensor) -> Result<FreqTensor> {
        if self.dims.n2 != other.dims.n1 || self.dims.n3 != other.dims.n3 {
            return Err(TubalError::dims("tprod", self.dims, other.dims));
        }
        let n3 = self.dims.n3;
        let half = independent_slices(n3)
            .map(|k| &self.slices[k] * &other.slices[k])
            .collect();
        FreqTensor::from_half(half, n3)
    }

    /// `self^H * other` slicewise, without forming the transpose.
    pub fn tprod_adjoint_left(&self, other: &FreqTensor) -> Result<FreqTensor> {
        if self.dims.n1 != other.dims.n1 || self.dims.n3 != other.dims.n3 {
            return Err(TubalError::dims("tprod_adjoint_left", self.dims, other.dims));
        }
        let n3 = self.dims.n3;
        let half = independent_slices(n3)
            .map(|k| self.slices[k].ad_mul(&other.slices[k]))
            .collect();
        FreqTensor::from_half(half, n3)
    }

    /// `self * other^H` slicewise.
    pub fn tprod_adjoint_right(&self, other: &FreqTensor) -> Result<FreqTensor> {
        if self.dims.n2 != other.dims.n2 || self.dims.n3 != other.dims.n3 {
            return Err(TubalError::dims("tprod_adjoint_right", self.dims, other.dims));
        }
        let n3 = self.dims.n3;
        let half = independent_slices(n3)
            .map(|k| &self.slices[k] * other.slices[k].adjoint())
            .collect();
        FreqTensor::from_half(half, n3)
    }

    /// Slicewise conjugate transpose: the frequency image of `ttranspose`.
    pub fn conj_transpose(&self) -> FreqTensor {
        FreqTensor {
            dims: self.dims.transposed(),
            slices: self.slices.iter().map(|s| s.adjoint()).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> FreqTensor {
        FreqTensor {
            dims: self.dims,
            slices: self.slices.iter().map(|s| s * C64::new(c, 0.0)).collect(),
        }
    }

    pub fn sub(&self, other: &FreqTensor) -> Result<FreqTensor> {
        if self.dims != other.dims {
            return Err(TubalError::dims("FreqTensor::sub", self.dims, other.dims));
        }
        Ok(FreqTensor {
            dims: self.dims,
            slices: self.slices.iter().zip(&other.slices).map(|(a, b)| a - b).collect(),
        })
    }

    /// Frobenius norm of all slices stacked; equals `sqrt(n3)` times the norm of
    /// the spatial tensor.
    pub fn fro_norm(&self) -> f64 {
        self.slices
            .iter()
            .map(|s| s.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise deviation from conjugate symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let n3 = self.dims.n3;
        let mut worst = 0.0_f64;
        for k in 0..n3 {
            let mate = (n3 - k) % n3;
            for (a, b) in self.slices[k].iter().zip(self.slices[mate].iter()) {
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// The block-diagonal matrix `diag(slice_1, ..., slice_n3)`.
    pub fn block_diag(&self) -> CMatrix {
        let Dims { n1, n2, n3 } = self.dims;
        let mut out = CMatrix::zeros(n1 * n3, n2 * n3);
        for (k, s) in self.slices.iter().enumerate() {
            out.view_mut((k * n1, k * n2), (n1, n2)).copy_from(s);
        }
        out
    }
}

/// DFT of every tube `x(i, j, :)`, forward and unnormalized.
pub fn to_freq(x: &Tensor3) -> FreqTensor {
    let dims = x.dims();
    let (n3, len) = (dims.n3, dims.slice_len());
    let data = x.as_slice();
    // tube-major buffer: tube t occupies buf[t*n3 .. (t+1)*n3]
    let mut buf: Vec<C64> = Vec::with_capacity(dims.len());
    for t in 0..len {
        for k in 0..n3 {
            buf.push(C64::new(data[k * len + t], 0.0));
        }
    }
    if n3 > 1 {
        plan(n3, false).process(&mut buf);
    }
    let slices = (0..n3)
        .map(|k| CMatrix::from_iterator(dims.n1, dims.n2, (0..len).map(|t| buf[t * n3 + k])))
        .collect();
    FreqTensor { dims, slices }
}

/// Inverse DFT with `1/n3` scaling. The imaginary residual is checked against
/// [`IMAG_RESIDUAL_TOL`] times the Frobenius norm of the result, then dropped.
pub fn from_freq(f: &FreqTensor) -> Result<Tensor3> {
    let dims = f.dims();
    let (n3, len) = (dims.n3, dims.slice_len());
    let mut buf: Vec<C64> = Vec::with_capacity(dims.len());
    for t in 0..len {
        for s in f.slices() {
            buf.push(s.as_slice()[t]);
        }
    }
    if n3 > 1 {
        plan(n3, true).process(&mut buf);
    }
    let scale = 1.0 / n3 as f64;
    let mut data = vec![0.0; dims.len()];
    let mut max_imag = 0.0_f64;
    for t in 0..len {
        for k in 0..n3 {
            let z = buf[t * n3 + k] * scale;
            data[k * len + t] = z.re;
            max_imag = max_imag.max(z.im.abs());
        }
    }
    if !max_imag.is_finite() || data.iter().any(|v| !v.is_finite()) {
        return Err(TubalError::NumericalFailure(
            "non-finite entries in inverse transform".into(),
        ));
    }
    let norm = data.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = IMAG_RESIDUAL_TOL * norm;
    if max_imag > threshold {
        return Err(TubalError::SymmetryViolation {
            residual: max_imag,
            threshold,
        });
    }
    Ok(Tensor3::from_raw(dims, data))
}

impl Tensor3 {
    pub fn to_freq(&self) -> FreqTensor {
        to_freq(self)
    }
}

impl FreqTensor {
    pub fn to_spatial(&self) -> Result<Tensor3> {
        from_freq(self)
    }
}
