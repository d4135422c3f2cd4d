use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{LossKind, LossModel};
use crate::error::{Result, TubalError};
use crate::factors::FactorPair;
use crate::tensor::{to_freq, Dims, Tensor3};
use crate::tlinalg::{diag_freq, svd_freq};

/// Variance scale of the "small random" initialization.
pub const SMALL_RANDOM_SCALE: f64 = 1e-10;

/// How a solver's starting factors are produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Init {
    /// Truncated t-SVD of `M^*(y)`; recovery models only.
    Spectral,
    /// Gaussian factors with variances `scale / n1` and `scale / n2`.
    Random { scale: f64 },
    /// `Random` with [`SMALL_RANDOM_SCALE`].
    SmallRandom,
}

impl Init {
    pub fn build(&self, model: &LossModel, r: usize, seed: u64) -> Result<FactorPair> {
        match *self {
            Init::Spectral => spectral_init(model, r),
            Init::Random { scale } => random_init(model.dims(), r, scale, seed),
            Init::SmallRandom => random_init(model.dims(), r, SMALL_RANDOM_SCALE, seed),
        }
    }
}

/// `L0 = U0 * S0^{1/2}`, `R0 = V0 * S0^{1/2}` from the rank-`r` truncated t-SVD
/// of `M^*(y)`. The pair is balanced by construction.
pub fn spectral_init(model: &LossModel, r: usize) -> Result<FactorPair> {
    if model.kind() != LossKind::Recovery {
        return Err(TubalError::BadSpec(
            "spectral initialization needs a sensing model".into(),
        ));
    }
    let d = model.dims();
    let max = d.n1.min(d.n2);
    if r == 0 || r > max {
        return Err(TubalError::BadRank { rank: r, max });
    }
    let op = model.operator().expect("recovery model has an operator");
    let y = model.observations().expect("recovery model has observations");
    let back = op.adjoint(y)?;
    let svd = svd_freq(&to_freq(&back), r)?;
    let root = diag_freq(&svd.sigma, f64::sqrt);
    FactorPair::from_freq(svd.u.tprod(&root)?, svd.v.tprod(&root)?)
}

/// I.i.d. Gaussian factors for an `n1 x n2 x n3` product with `r` columns:
/// standard deviations `sqrt(scale / n1)` for `L` and `sqrt(scale / n2)` for `R`.
pub fn random_init(dims: Dims, r: usize, scale: f64, seed: u64) -> Result<FactorPair> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(TubalError::InvalidData(format!("init scale must be positive, got {scale}")));
    }
    if r == 0 {
        return Err(TubalError::BadRank { rank: 0, max: dims.n1.min(dims.n2) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| {
        let dist = Normal::new(0.0, (scale / n as f64).sqrt()).expect("positive std");
        Tensor3::from_fn(n, r, dims.n3, |_, _, _| dist.sample(&mut rng))
    };
    let l = draw(dims.n1);
    let rr = draw(dims.n2);
    FactorPair::new(l, rr)
}
