//! Small dense decompositions.
//!
//! SVDs go through faer and are checked against the input; a factorization
//! that does not reconstruct its matrix is recomputed with nalgebra. Both
//! libraries have shipped SVDs that return wrong factors on nearly
//! rank-deficient inputs (nalgebra through absolute-epsilon deflation, older
//! faer on blocks with exact zero rows), and rebalancing feeds exactly such
//! cores once the iterates have converged.

use faer::{c64, Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Result, TubalError};
use crate::tensor::freq::C64;
use crate::tensor::CMatrix;

/// Reconstruction slack, in units of `eps * max(m, n) * ||a||`.
const RECONSTRUCTION_SLACK: f64 = 64.0;

fn to_faer_c(a: &CMatrix) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        c64::new(z.re, z.im)
    })
}

fn to_faer_r(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Indices that sort `s` non-increasingly.
fn descending(s: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    idx
}

fn tolerance(norm: f64, m: usize, n: usize) -> f64 {
    RECONSTRUCTION_SLACK * f64::EPSILON * m.max(n) as f64 * norm
}

fn reconstructs_c(a: &CMatrix, u: &CMatrix, s: &[f64], v: &CMatrix) -> bool {
    let mut us = u.clone();
    for (j, &sj) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(sj);
    }
    let defect = (us * v.adjoint() - a).norm();
    defect <= tolerance(a.norm(), a.nrows(), a.ncols())
}

fn reconstructs_r(a: &DMatrix<f64>, u: &DMatrix<f64>, s: &[f64], v: &DMatrix<f64>) -> bool {
    let mut us = u.clone();
    for (j, &sj) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(sj);
    }
    let defect = (us * v.transpose() - a).norm();
    defect <= tolerance(a.norm(), a.nrows(), a.ncols())
}

fn faer_svd_c(a: &CMatrix) -> Option<(CMatrix, Vec<f64>, CMatrix)> {
    let k = a.nrows().min(a.ncols());
    let svd = to_faer_c(a).thin_svd().ok()?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let vals: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    let order = descending(&vals);
    let get = |m: faer::MatRef<'_, c64>, i: usize, j: usize| {
        let z = m[(i, order[j])];
        C64::new(z.re, z.im)
    };
    Some((
        CMatrix::from_fn(a.nrows(), k, |i, j| get(u, i, j)),
        order.iter().map(|&j| vals[j]).collect(),
        CMatrix::from_fn(a.ncols(), k, |i, j| get(v, i, j)),
    ))
}

fn faer_svd_r(a: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let k = a.nrows().min(a.ncols());
    let svd = to_faer_r(a).thin_svd().ok()?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let vals: Vec<f64> = (0..k).map(|i| s[i]).collect();
    let order = descending(&vals);
    Some((
        DMatrix::from_fn(a.nrows(), k, |i, j| u[(i, order[j])]),
        order.iter().map(|&j| vals[j]).collect(),
        DMatrix::from_fn(a.ncols(), k, |i, j| v[(i, order[j])]),
    ))
}

fn nalgebra_svd_c(a: &CMatrix) -> Option<(CMatrix, Vec<f64>, CMatrix)> {
    let svd = a.clone().try_svd(true, true, f64::EPSILON, 0)?;
    let (u, vt) = (svd.u?, svd.v_t?);
    let vals: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = descending(&vals);
    Some((
        CMatrix::from_fn(a.nrows(), vals.len(), |i, j| u[(i, order[j])]),
        order.iter().map(|&j| vals[j]).collect(),
        CMatrix::from_fn(a.ncols(), vals.len(), |i, j| vt[(order[j], i)].conj()),
    ))
}

fn nalgebra_svd_r(a: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = a.clone().try_svd(true, true, f64::EPSILON, 0)?;
    let (u, vt) = (svd.u?, svd.v_t?);
    let vals: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = descending(&vals);
    Some((
        DMatrix::from_fn(a.nrows(), vals.len(), |i, j| u[(i, order[j])]),
        order.iter().map(|&j| vals[j]).collect(),
        DMatrix::from_fn(a.ncols(), vals.len(), |i, j| vt[(order[j], i)]),
    ))
}

fn failure(m: usize, n: usize) -> TubalError {
    TubalError::NumericalFailure(format!("no SVD of a {m}x{n} block reconstructs it"))
}

/// Thin SVD `a = u diag(s) v^H`, singular values non-increasing.
pub(crate) fn svd_c(a: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    if a.nrows().min(a.ncols()) == 0 {
        return Ok((CMatrix::zeros(a.nrows(), 0), Vec::new(), CMatrix::zeros(a.ncols(), 0)));
    }
    [faer_svd_c, nalgebra_svd_c]
        .iter()
        .filter_map(|f| f(a))
        .find(|(u, s, v)| reconstructs_c(a, u, s, v))
        .ok_or_else(|| failure(a.nrows(), a.ncols()))
}

/// Thin SVD of a real matrix, singular values non-increasing.
pub(crate) fn svd_r(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    if a.nrows().min(a.ncols()) == 0 {
        return Ok((DMatrix::zeros(a.nrows(), 0), Vec::new(), DMatrix::zeros(a.ncols(), 0)));
    }
    [faer_svd_r, nalgebra_svd_r]
        .iter()
        .filter_map(|f| f(a))
        .find(|(u, s, v)| reconstructs_r(a, u, s, v))
        .ok_or_else(|| failure(a.nrows(), a.ncols()))
}

/// Singular values, non-increasing.
pub(crate) fn singular_values_c(a: &CMatrix) -> Vec<f64> {
    if a.nrows().min(a.ncols()) == 0 {
        return Vec::new();
    }
    let mut s = to_faer_c(a)
        .singular_values()
        .unwrap_or_else(|_| a.singular_values().iter().copied().collect());
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Eigenvalues of a Hermitian matrix, read from its lower triangle.
pub(crate) fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    to_faer_c(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .unwrap_or_else(|_| a.clone().symmetric_eigenvalues().iter().copied().collect())
}
