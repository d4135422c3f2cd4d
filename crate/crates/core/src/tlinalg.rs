//! Frequency-domain factorizations: t-SVD, t-QR, rank profiles and the damped
//! preconditioner solve.
//!
//! Every routine works slice by slice on the DFT image. Only the independent
//! half of the slices is factored; mirrored slices are filled in by
//! conjugation, and self-conjugate slices are factored in real arithmetic, so
//! the spatial factors come out real.

use nalgebra::{Cholesky, DMatrix};

use crate::dense;

use crate::error::{Result, TubalError};
use crate::tensor::freq::{independent_slices, is_self_conjugate, mirror_slices, C64};
use crate::tensor::{from_freq, to_freq, CMatrix, Dims, FreqTensor, Tensor3};

/// Default relative tolerance deciding which singular values count as nonzero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Gram matrices whose condition number exceeds this are treated as singular
/// by the undamped preconditioner.
pub const SINGULAR_GRAM_CONDITION: f64 = 1.0 / (100.0 * f64::EPSILON);

/// `x = u * s * v^T` with orthogonal-column `u`, `v` and f-diagonal `s`.
#[derive(Clone, Debug)]
pub struct TsvdFactors {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
}

impl TsvdFactors {
    pub fn rank(&self) -> usize {
        self.s.n1()
    }

    pub fn reconstruct(&self) -> Result<Tensor3> {
        let u = to_freq(&self.u);
        let s = to_freq(&self.s);
        let v = to_freq(&self.v);
        from_freq(&u.tprod(&s)?.tprod_adjoint_right(&v)?)
    }
}

/// Frequency-domain SVD: per slice `x_k = u_k diag(sigma_k) v_k^H`.
#[derive(Clone, Debug)]
pub struct FreqSvd {
    pub u: FreqTensor,
    pub sigma: Vec<Vec<f64>>,
    pub v: FreqTensor,
}

impl FreqSvd {
    /// The f-diagonal tensor of singular values, in the frequency domain.
    pub fn sigma_tensor(&self) -> FreqTensor {
        diag_freq(&self.sigma, |s| s)
    }

    pub fn into_factors(self) -> Result<TsvdFactors> {
        let s = from_freq(&self.sigma_tensor())?;
        Ok(TsvdFactors {
            u: from_freq(&self.u)?,
            s,
            v: from_freq(&self.v)?,
        })
    }
}

pub(crate) fn diag_freq(sigma: &[Vec<f64>], f: impl Fn(f64) -> f64) -> FreqTensor {
    let slices = sigma
        .iter()
        .map(|s| CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            s.len(),
            s.iter().map(|&v| C64::new(f(v), 0.0)),
        )))
        .collect();
    FreqTensor::from_slices(slices).expect("diag_freq: ragged singular values")
}

fn to_real(a: &CMatrix) -> DMatrix<f64> {
    a.map(|z| z.re)
}

fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|v| C64::new(v, 0.0))
}

/// Rotates each column of `u` (and the matching column of `v`) so that its
/// first non-negligible entry is real and positive. `u v^H` is unchanged.
fn normalize_phases(u: &mut CMatrix, v: &mut CMatrix) {
    for j in 0..u.ncols() {
        let col_norm = u.column(j).norm();
        let cutoff = 1e-8 * col_norm;
        if let Some(z) = u.column(j).iter().copied().find(|z| z.norm() > cutoff) {
            let phase = z.conj() / z.norm();
            u.column_mut(j).scale_mut_c(phase);
            v.column_mut(j).scale_mut_c(phase);
        }
    }
}

trait ScaleComplex {
    fn scale_mut_c(&mut self, c: C64);
}

impl<S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>> ScaleComplex
    for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_c(&mut self, c: C64) {
        for z in self.iter_mut() {
            *z *= c;
        }
    }
}

/// Thin SVD of one frequency slice, truncated to `k` triplets.
fn slice_svd(a: &CMatrix, real: bool, k: usize) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    if !a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(TubalError::NumericalFailure("SVD of a non-finite slice".into()));
    }
    let (mut u, sigma, mut v) = if real {
        let (u, s, v) = dense::svd_r(&to_real(a))?;
        (to_complex(&u), s, to_complex(&v))
    } else {
        dense::svd_c(a)?
    };
    normalize_phases(&mut u, &mut v);
    Ok((
        u.columns(0, k).into_owned(),
        sigma[..k].to_vec(),
        v.columns(0, k).into_owned(),
    ))
}

/// SVD of every frequency slice, keeping the top `k` triplets per slice.
pub fn svd_freq(x: &FreqTensor, k: usize) -> Result<FreqSvd> {
    let Dims { n1, n2, n3 } = x.dims();
    let max = n1.min(n2);
    if k == 0 || k > max {
        return Err(TubalError::BadRank { rank: k, max });
    }
    let half = independent_slices(n3)
        .map(|i| slice_svd(x.slice(i), is_self_conjugate(i, n3), k))
        .collect::<Result<Vec<_>>>()?;
    let full = mirror_slices(half, n3);
    let mut us = Vec::with_capacity(n3);
    let mut sigma = Vec::with_capacity(n3);
    let mut vs = Vec::with_capacity(n3);
    for (u, s, v) in full {
        us.push(u);
        sigma.push(s);
        vs.push(v);
    }
    Ok(FreqSvd {
        u: FreqTensor::from_slices(us)?,
        sigma,
        v: FreqTensor::from_slices(vs)?,
    })
}

/// Full t-SVD with `k = min(n1, n2)` singular tubes.
pub fn tsvd(x: &Tensor3) -> Result<TsvdFactors> {
    svd_freq(&to_freq(x), x.n1().min(x.n2()))?.into_factors()
}

/// Keeps the top `r` singular triplets of every frequency slice.
pub fn truncated_tsvd(x: &Tensor3, r: usize) -> Result<TsvdFactors> {
    svd_freq(&to_freq(x), r)?.into_factors()
}

/// Singular values of the block-diagonal DFT matrix, sorted non-increasing.
pub fn singular_values(x: &Tensor3) -> Vec<f64> {
    let mut all: Vec<f64> = to_freq(x)
        .slices()
        .iter()
        .flat_map(dense::singular_values_c)
        .collect();
    all.sort_by(|a, b| b.total_cmp(a));
    all
}

/// Tubal rank, multi-rank and the nonzero spectrum of a tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct RankProfile {
    pub tubal_rank: usize,
    pub multi_rank: Vec<usize>,
    /// `sum(multi_rank)`.
    pub s_r_m: usize,
    pub tol: f64,
    /// Nonzero singular values of the block-diagonal DFT matrix, non-increasing.
    pub singular_values: Vec<f64>,
    /// Largest over smallest nonzero singular value; `None` for a zero tensor.
    pub condition_number: Option<f64>,
}

/// Counts, per frequency slice, singular values above `tol * sigma_max`.
pub fn rank_profile(x: &Tensor3, tol: f64) -> RankProfile {
    let per_slice: Vec<Vec<f64>> = to_freq(x)
        .slices()
        .iter()
        .map(dense::singular_values_c)
        .collect();
    let sigma_max = per_slice.iter().flatten().copied().fold(0.0, f64::max);
    let cutoff = tol * sigma_max;
    let keep = |v: f64| sigma_max > 0.0 && v > cutoff;
    let multi_rank: Vec<usize> = per_slice
        .iter()
        .map(|s| s.iter().filter(|&&v| keep(v)).count())
        .collect();
    let mut singular_values: Vec<f64> = per_slice.into_iter().flatten().filter(|&v| keep(v)).collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let condition_number = match (singular_values.first(), singular_values.last()) {
        (Some(&hi), Some(&lo)) => Some(hi / lo),
        _ => None,
    };
    RankProfile {
        tubal_rank: multi_rank.iter().copied().max().unwrap_or(0),
        s_r_m: multi_rank.iter().sum(),
        multi_rank,
        tol,
        singular_values,
        condition_number,
    }
}

fn slice_qr(a: &CMatrix, real: bool) -> (CMatrix, CMatrix) {
    let (mut q, mut w) = if real {
        let qr = to_real(a).qr();
        (to_complex(&qr.q()), to_complex(&qr.r()))
    } else {
        let qr = a.clone().qr();
        (qr.q(), qr.r())
    };
    for j in 0..w.nrows() {
        let d = w[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            q.column_mut(j).scale_mut_c(phase);
            for c in 0..w.ncols() {
                w[(j, c)] *= phase.conj();
            }
        }
        w[(j, j)] = C64::new(w[(j, j)].re.max(0.0), 0.0);
    }
    (q, w)
}

/// Thin t-QR in the frequency domain: `a = q * w`, `q` with orthonormal
/// columns, `w` upper triangular with real nonnegative diagonal per slice.
pub fn tqr_freq(a: &FreqTensor) -> Result<(FreqTensor, FreqTensor)> {
    let Dims { n1, n2, n3 } = a.dims();
    if n1 < n2 {
        return Err(TubalError::dims("tqr", a.dims(), Dims::new(n2, n2, n3)));
    }
    let half = independent_slices(n3)
        .map(|k| slice_qr(a.slice(k), is_self_conjugate(k, n3)))
        .collect();
    let (qs, ws): (Vec<_>, Vec<_>) = mirror_slices(half, n3).into_iter().unzip();
    Ok((FreqTensor::from_slices(qs)?, FreqTensor::from_slices(ws)?))
}

/// t-QR of an `n x r x n3` tensor with `n >= r`.
pub fn tqr(a: &Tensor3) -> Result<(Tensor3, Tensor3)> {
    let (q, w) = tqr_freq(&to_freq(a))?;
    Ok((from_freq(&q)?, from_freq(&w)?))
}

fn gram(m: &CMatrix, lambda: f64) -> CMatrix {
    let mut g = m.ad_mul(m);
    for i in 0..g.nrows() {
        g[(i, i)] += C64::new(lambda, 0.0);
    }
    g
}

fn hermitian_condition(g: &CMatrix) -> f64 {
    let eig = dense::hermitian_eigenvalues(g);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `g * (m^T * m + lambda I)^{-1}` in the frequency domain via per-slice
/// Cholesky solves.
pub fn precond_solve_freq(g: &FreqTensor, m: &FreqTensor, lambda: f64) -> Result<FreqTensor> {
    let (gd, md) = (g.dims(), m.dims());
    if gd.n2 != md.n2 || gd.n3 != md.n3 {
        return Err(TubalError::dims("precond_solve", gd, md));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(TubalError::InvalidData(format!("damping must be >= 0, got {lambda}")));
    }
    let n3 = gd.n3;
    let half = independent_slices(n3)
        .map(|k| {
            let gram = gram(m.slice(k), lambda);
            if lambda == 0.0 {
                let condition = hermitian_condition(&gram);
                if !(condition <= SINGULAR_GRAM_CONDITION) {
                    return Err(TubalError::SingularPreconditioner { slice: k, condition });
                }
            }
            let chol = Cholesky::new(gram.clone()).ok_or_else(|| TubalError::SingularPreconditioner {
                slice: k,
                condition: hermitian_condition(&gram),
            })?;
            // x * G = g  <=>  G x^H = g^H  (G Hermitian)
            Ok(chol.solve(&g.slice(k).adjoint()).adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    FreqTensor::from_half(half, n3)
}

pub fn precond_solve(g: &Tensor3, m: &Tensor3, lambda: f64) -> Result<Tensor3> {
    from_freq(&precond_solve_freq(&to_freq(g), &to_freq(m), lambda)?)
}

/// `m * (m^T * m + lambda I)^{-1}` in the frequency domain, through the SVD
/// `m = u diag(s) v^H` of every slice as `u diag(s / (s^2 + lambda)) v^H`.
///
/// Right-multiplying a gradient `g * m^T` by `m^{-T}`-like terms this way keeps
/// tiny singular values of `m` as exact factors instead of dividing rounded
/// inner products by them, which matters once `lambda` is near zero. With
/// `lambda = 0` a slice whose Gram condition exceeds
/// [`SINGULAR_GRAM_CONDITION`] is reported as singular.
pub fn damped_pinv_freq(m: &FreqTensor, lambda: f64) -> Result<FreqTensor> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(TubalError::InvalidData(format!("damping must be >= 0, got {lambda}")));
    }
    let Dims { n1, n2, n3 } = m.dims();
    let k = n1.min(n2);
    let half = independent_slices(n3)
        .map(|i| {
            let (u, s, v) = slice_svd(m.slice(i), is_self_conjugate(i, n3), k)?;
            if lambda == 0.0 {
                let hi = s.first().copied().unwrap_or(0.0);
                let lo = if k < n2 { 0.0 } else { s.last().copied().unwrap_or(0.0) };
                let condition = if lo > 0.0 { (hi / lo).powi(2) } else { f64::INFINITY };
                if !(condition <= SINGULAR_GRAM_CONDITION) {
                    return Err(TubalError::SingularPreconditioner { slice: i, condition });
                }
            }
            let mut us = u;
            for (j, &sj) in s.iter().enumerate() {
                let w = if sj > 0.0 { sj / (sj * sj + lambda) } else { 0.0 };
                us.column_mut(j).scale_mut_c(C64::new(w, 0.0));
            }
            Ok(us * v.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    FreqTensor::from_half(half, n3)
}

/// Smallest eigenvalue of `m^T * m` over all frequency slices.
pub fn gram_sigma_min(m: &FreqTensor) -> f64 {
    m.slices()
        .iter()
        .map(|s| {
            if s.ncols() > s.nrows() {
                0.0
            } else {
                let v = dense::singular_values_c(s).last().copied().unwrap_or(0.0);
                v * v
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn fdiag_check(s: &FreqTensor) -> Result<Vec<Vec<f64>>> {
    let scale = s.fro_norm().max(f64::MIN_POSITIVE);
    s.slices()
        .iter()
        .enumerate()
        .map(|(k, m)| {
            (0..m.nrows().min(m.ncols()))
                .map(|i| {
                    let v = m[(i, i)].re;
                    if v < -1e-12 * scale {
                        Err(TubalError::NegativeDiagonal { slice: k, value: v })
                    } else {
                        Ok(v.max(0.0))
                    }
                })
                .collect()
        })
        .collect()
}

/// Square root of an f-diagonal tensor with nonnegative frequency diagonals.
pub fn fdiag_sqrt_freq(s: &FreqTensor) -> Result<FreqTensor> {
    let d = fdiag_check(s)?;
    Ok(diag_freq(&d, f64::sqrt))
}

pub fn fdiag_sqrt(s: &Tensor3) -> Result<Tensor3> {
    from_freq(&fdiag_sqrt_freq(&to_freq(s))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{identity_tensor, tprod, ttranspose};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n1: usize, n2: usize, n3: usize, seed: u64) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::from_fn(n1, n2, n3, |_, _, _| rng.gen_range(-1.0..1.0))
    }

    fn orth_defect(q: &Tensor3) -> f64 {
        let qtq = tprod(&ttranspose(q), q).unwrap();
        (&qtq - &identity_tensor(q.n2(), q.n3())).fro_norm()
    }

    #[test]
    fn identity_tsvd() {
        let f = tsvd(&identity_tensor(3, 4)).unwrap();
        assert!(f.s.rel_diff(&identity_tensor(3, 4)) < 1e-14);
        assert!(f.reconstruct().unwrap().rel_diff(&identity_tensor(3, 4)) < 1e-14);
    }

    #[test]
    fn rank_one_outer_product() {
        let l = random(4, 1, 3, 1);
        let r = random(5, 1, 3, 2);
        let x = tprod(&l, &ttranspose(&r)).unwrap();
        let p = rank_profile(&x, DEFAULT_RANK_TOL);
        assert_eq!(p.tubal_rank, 1);
        let f = truncated_tsvd(&x, 1).unwrap();
        assert!(f.reconstruct().unwrap().rel_diff(&x) < 1e-12);
    }

    #[test]
    fn random_tsvd_invariants() {
        for (seed, (n1, n2, n3)) in [(5, 4, 3), (3, 6, 4), (4, 4, 2)].into_iter().enumerate() {
            let x = random(n1, n2, n3, seed as u64);
            let f = tsvd(&x).unwrap();
            let k = n1.min(n2) as f64;
            assert!(f.reconstruct().unwrap().rel_diff(&x) < 1e-10);
            assert!(orth_defect(&f.u) <= 1e-10 * k.sqrt());
            assert!(orth_defect(&f.v) <= 1e-10 * k.sqrt());
            let sf = to_freq(&f.s);
            for m in sf.slices() {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        if i != j {
                            assert!(m[(i, j)].norm() < 1e-12);
                        }
                    }
                    assert!(m[(i, i)].im.abs() < 1e-12 && m[(i, i)].re >= 0.0);
                    if i > 0 {
                        assert!(m[(i, i)].re <= m[(i - 1, i - 1)].re + 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn left_vectors_have_nonnegative_leading_entry() {
        let x = random(5, 4, 4, 12);
        let svd = svd_freq(&to_freq(&x), 4).unwrap();
        for s in svd.u.slices() {
            for j in 0..s.ncols() {
                let col = s.column(j);
                let first = col.iter().find(|z| z.norm() > 1e-8).unwrap();
                assert!(first.re >= 0.0 && first.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_residual_matches_tail() {
        let x = random(6, 6, 3, 21);
        let f = truncated_tsvd(&x, 2).unwrap();
        let resid = &x - &f.reconstruct().unwrap();
        let fr = to_freq(&resid);
        for (k, s) in to_freq(&x).slices().iter().enumerate() {
            let sv = s.singular_values();
            let mut sv: Vec<f64> = sv.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            let tail = sv[2..].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((fr.slice(k).norm() - tail).abs() < 1e-10 * sv[0]);
        }
        assert!(matches!(truncated_tsvd(&x, 0), Err(TubalError::BadRank { .. })));
        assert!(matches!(truncated_tsvd(&x, 7), Err(TubalError::BadRank { .. })));
        let full = truncated_tsvd(&x, 6).unwrap();
        let t = tsvd(&x).unwrap();
        assert!(full.u.rel_diff(&t.u) < 1e-14 && full.s.rel_diff(&t.s) < 1e-14);
    }

    #[test]
    fn rank_profile_identity() {
        let p = rank_profile(&identity_tensor(4, 3), DEFAULT_RANK_TOL);
        assert_eq!(p.multi_rank, vec![4, 4, 4]);
        assert_eq!(p.tubal_rank, 4);
        assert_eq!(p.s_r_m, 12);
        assert!((p.condition_number.unwrap() - 1.0).abs() < 1e-12);
        let z = rank_profile(&Tensor3::zeros(2, 2, 2), DEFAULT_RANK_TOL);
        assert_eq!(z.tubal_rank, 0);
        assert!(z.condition_number.is_none());
    }

    #[test]
    fn tqr_random_and_orthogonal() {
        let a = random(7, 3, 4, 3);
        let (q, w) = tqr(&a).unwrap();
        assert!(tprod(&q, &w).unwrap().rel_diff(&a) < 1e-10);
        assert!(orth_defect(&q) < 1e-10);
        for s in to_freq(&w).slices() {
            for i in 0..3 {
                assert!(s[(i, i)].re >= 0.0 && s[(i, i)].im.abs() < 1e-12);
                for j in 0..i {
                    assert!(s[(i, j)].norm() < 1e-12);
                }
            }
        }
        // idempotent on orthogonal input
        let (q2, w2) = tqr(&q).unwrap();
        assert!(q2.rel_diff(&q) < 1e-10);
        assert!(w2.rel_diff(&identity_tensor(3, 4)) < 1e-10);
        assert!(tqr(&random(2, 3, 2, 0)).is_err());
    }

    #[test]
    fn tqr_zero_column() {
        let base = random(6, 3, 3, 8);
        let a = Tensor3::from_fn(6, 3, 3, |i, j, k| if j == 1 { 0.0 } else { base.get(i, j, k) });
        let (q, w) = tqr(&a).unwrap();
        assert!(q.is_finite() && w.is_finite());
        assert!(orth_defect(&q) < 1e-10);
        assert!(tprod(&q, &w).unwrap().rel_diff(&a) < 1e-10);
        for s in to_freq(&w).slices() {
            assert!(s[(1, 1)].norm() < 1e-12);
        }
    }

    #[test]
    fn precond_solve_cases() {
        let g = random(5, 3, 4, 1);
        let (q, _) = tqr(&random(6, 3, 4, 2)).unwrap();
        let out = precond_solve(&g, &q, 0.0).unwrap();
        assert!(out.rel_diff(&g) < 1e-10);

        let m = random(6, 3, 4, 3);
        let big = 1e8;
        let out = precond_solve(&g, &m, big).unwrap();
        assert!(out.rel_diff(&g.scaled(1.0 / big)) < 1e-4);

        let out = precond_solve(&g, &m, 0.3).unwrap();
        let gram = &tprod(&ttranspose(&m), &m).unwrap() + &identity_tensor(3, 4).scaled(0.3);
        let back = tprod(&out, &gram).unwrap();
        assert!(back.rel_diff(&g) < 1e-9);
    }

    #[test]
    fn precond_solve_detects_singular_gram() {
        let g = random(5, 3, 2, 1);
        let base = random(6, 3, 2, 2);
        let m = Tensor3::from_fn(6, 3, 2, |i, j, k| if j == 2 { base.get(i, 0, k) } else { base.get(i, j, k) });
        assert!(matches!(
            precond_solve(&g, &m, 0.0),
            Err(TubalError::SingularPreconditioner { .. })
        ));
        assert!(precond_solve(&g, &m, 1e-3).is_ok());
        assert!(precond_solve(&g, &m, -1.0).is_err());
    }

    #[test]
    fn fdiag_sqrt_cases() {
        let id = identity_tensor(3, 4);
        assert!(fdiag_sqrt(&id).unwrap().rel_diff(&id) < 1e-15);
        let z = Tensor3::zeros(2, 2, 3);
        assert_eq!(fdiag_sqrt(&z).unwrap().fro_norm(), 0.0);
        let d = diag_freq(&vec![vec![4.0, 9.0]; 3], |v| v);
        let root = fdiag_sqrt_freq(&d).unwrap();
        for s in root.slices() {
            assert!((s[(0, 0)].re - 2.0).abs() < 1e-15 && (s[(1, 1)].re - 3.0).abs() < 1e-15);
        }
        let st = from_freq(&d).unwrap();
        let r = fdiag_sqrt(&st).unwrap();
        assert!(tprod(&r, &r).unwrap().rel_diff(&st) < 1e-12);
        let neg = diag_freq(&vec![vec![-1.0, 1.0]; 3], |v| v);
        assert!(matches!(fdiag_sqrt_freq(&neg), Err(TubalError::NegativeDiagonal { .. })));
    }
}
