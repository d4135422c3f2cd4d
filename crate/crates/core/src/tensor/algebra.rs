use nalgebra::DMatrix;

use super::freq::{from_freq, to_freq};
use super::{Dims, Tensor3};
use crate::error::{Result, TubalError};

/// t-product `a * b`, computed as slicewise products in the frequency domain.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n2() != b.n1() || a.n3() != b.n3() {
        return Err(TubalError::dims("tprod", a.dims(), b.dims()));
    }
    from_freq(&to_freq(a).tprod(&to_freq(b))?)
}

/// Tensor transpose: every frontal slice transposed, slices `2..n3` reversed.
pub fn ttranspose(a: &Tensor3) -> Tensor3 {
    let n3 = a.n3();
    Tensor3::from_fn(a.n2(), a.n1(), n3, |i, j, k| a.get(j, i, (n3 - k) % n3))
}

/// Identity under the t-product: first frontal slice `I_n`, the rest zero.
pub fn identity_tensor(n: usize, n3: usize) -> Tensor3 {
    Tensor3::from_fn(n, n, n3, |i, j, k| if k == 0 && i == j { 1.0 } else { 0.0 })
}

pub fn inner(a: &Tensor3, b: &Tensor3) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(TubalError::dims("inner", a.dims(), b.dims()));
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum())
}

pub fn fro_norm(a: &Tensor3) -> f64 {
    a.fro_norm()
}

/// Largest singular value over all frequency slices, i.e. `||bcirc(a)||_2`.
pub fn spectral_norm(a: &Tensor3) -> f64 {
    to_freq(a)
        .slices()
        .iter()
        .map(|s| crate::dense::singular_values_c(s).first().copied().unwrap_or(0.0))
        .fold(0.0, f64::max)
}

/// Block-circulant matrix of `a`: block `(i, j)` is frontal slice `(i - j) mod n3`.
pub fn bcirc(a: &Tensor3) -> DMatrix<f64> {
    let Dims { n1, n2, n3 } = a.dims();
    let slices = a.frontal_slices();
    let mut out = DMatrix::zeros(n1 * n3, n2 * n3);
    for bi in 0..n3 {
        for bj in 0..n3 {
            let s = &slices[(bi + n3 - bj) % n3];
            out.view_mut((bi * n1, bj * n2), (n1, n2)).copy_from(s);
        }
    }
    out
}

/// Frontal slices stacked vertically into an `n1*n3 x n2` matrix.
pub fn unfold(a: &Tensor3) -> DMatrix<f64> {
    let Dims { n1, n2, n3 } = a.dims();
    let mut out = DMatrix::zeros(n1 * n3, n2);
    for k in 0..n3 {
        out.view_mut((k * n1, 0), (n1, n2)).copy_from(&a.frontal_slice(k));
    }
    out
}

/// Inverse of [`unfold`] for a given number of frontal slices.
pub fn fold(m: &DMatrix<f64>, n3: usize) -> Result<Tensor3> {
    if n3 == 0 || m.nrows() % n3 != 0 {
        return Err(TubalError::InvalidData(format!(
            "cannot fold {} rows into {n3} slices",
            m.nrows()
        )));
    }
    let n1 = m.nrows() / n3;
    Ok(Tensor3::from_fn(n1, m.ncols(), n3, |i, j, k| m[(k * n1 + i, j)]))
}

/// Reference t-product `fold(bcirc(a) * unfold(b))`. Materializes the full
/// block-circulant matrix, so it costs `O(n3^2)` more than [`tprod`]; meant
/// for cross-checking.
pub fn bcirc_oracle_tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n2() != b.n1() || a.n3() != b.n3() {
        return Err(TubalError::dims("bcirc_oracle_tprod", a.dims(), b.dims()));
    }
    fold(&(bcirc(a) * unfold(b)), a.n3())
}
