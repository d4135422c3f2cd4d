//! Principal-angle diagnostics of an iterate against the ground truth.

use tubal::tensor::{tprod, ttranspose, FreqTensor};
use tubal::tlinalg::{svd_freq, tqr_freq};
use tubal::{Result, Tensor3, TubalError};

/// Singular values of the t-QR triangle below this fraction of the largest
/// one are treated as zero when forming the column-space projector.
pub const RANK_TOL: f64 = 1e-10;

/// `(sin theta_L, sin theta_R)` with
/// `sin theta_L = |(I - P_L) * X*| / |L * R^T - X*|` and `P_L` the orthogonal
/// projector onto the numerical column space of `L`; likewise for `R` and the
/// row space. Both lie in `[0, 1]`.
pub fn diag_angles(l: &Tensor3, r: &Tensor3, x_star: &Tensor3) -> Result<(f64, f64)> {
    let mut err = tprod(l, &ttranspose(r))?;
    if err.dims() != x_star.dims() {
        return Err(TubalError::DimMismatch { op: "diag_angles", left: err.dims(), right: x_star.dims() });
    }
    err.axpy(-1.0, x_star);
    let denom = err.fro_norm();
    if !(denom > 0.0) {
        return Err(TubalError::ZeroError);
    }
    // Parseval: frequency-domain norms carry an extra sqrt(n3).
    let scale = (x_star.n3() as f64).sqrt();
    let sin_l = outside_norm(l, &tubal::tensor::to_freq(x_star))? / scale / denom;
    let sin_r = outside_norm(r, &tubal::tensor::to_freq(&ttranspose(x_star)))? / scale / denom;
    Ok((sin_l, sin_r))
}

/// `|(I - P_A) * target|` in the frequency domain, `P_A` built from the t-QR
/// of `a` restricted to the directions its triangle actually reaches.
fn outside_norm(a: &Tensor3, target: &FreqTensor) -> Result<f64> {
    let (q, w) = tqr_freq(&tubal::tensor::to_freq(a))?;
    let k = w.dims().n1;
    let svd = svd_freq(&w, k)?;
    let top = svd.sigma.iter().flatten().copied().fold(0.0, f64::max);
    let mut total = 0.0;
    for (s, ((qs, us), ts)) in svd.sigma.iter().zip(q.slices().iter().zip(svd.u.slices()).zip(target.slices())) {
        let keep = s.iter().filter(|&&v| v > RANK_TOL * top).count();
        let basis = qs * us.columns(0, keep);
        let resid = ts - &basis * basis.ad_mul(ts);
        total += resid.norm_squared();
    }
    Ok(total.sqrt())
}
