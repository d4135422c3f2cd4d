//! Loss models over factor pairs and their initializations.
//!
//! Both losses are functions of the product `X = L * R^T`:
//!
//! * factorization: `f(X) = 1/2 ||X - X*||_F^2`, with `grad f(X) = X - X*`;
//! * recovery: `f(X) = 1/2 ||M(X) - y||^2`, with `grad f(X) = M^*(M(X) - y)`.
//!
//! Factor gradients follow from the chain rule: `grad_L = grad f * R` and
//! `grad_R = (grad f)^T * L`.

mod init;
mod sensing;

use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use init::{random_init, spectral_init, Init, SMALL_RANDOM_SCALE};
pub use sensing::{IdentitySensing, MeasurementOperator, OperatorSpec, SensingMap, ADJOINT_BLOCK};

use crate::error::{Result, TubalError};
use crate::factors::FactorPair;
use crate::tensor::{to_freq, Dims, FreqTensor, Tensor3};

/// Number of random probes used to estimate the restricted isometry constant.
const SMOOTHNESS_PROBES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Factorization,
    Recovery,
}

#[derive(Clone, Debug)]
enum Data {
    Factorization {
        target: Tensor3,
        target_freq: FreqTensor,
    },
    Recovery {
        op: Arc<dyn SensingMap>,
        y: Vec<f64>,
    },
}

/// A loss `f(L * R^T)` together with the ground truth, when known.
#[derive(Clone, Debug)]
pub struct LossModel {
    data: Data,
    x_star: Option<Tensor3>,
    x_star_norm: f64,
    smoothness: OnceLock<f64>,
}

/// Loss and full-tensor gradient at one product `X = L * R^T`.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub loss: f64,
    /// `X` itself, in the spatial domain.
    pub x: Tensor3,
    /// `grad f(X)` in the frequency domain.
    pub grad_freq: FreqTensor,
}

impl Evaluation {
    /// `grad f * R`.
    pub fn grad_l_freq(&self, pair: &FactorPair) -> FreqTensor {
        self.grad_freq.tprod(pair.r_freq()).expect("gradient shape matches factors")
    }

    /// `grad f^T * L`.
    pub fn grad_r_freq(&self, pair: &FactorPair) -> FreqTensor {
        self.grad_freq
            .tprod_adjoint_left(pair.l_freq())
            .expect("gradient shape matches factors")
    }
}

impl LossModel {
    /// `1/2 ||X - target||_F^2`.
    pub fn factorization(target: Tensor3) -> Self {
        let target_freq = to_freq(&target);
        LossModel {
            x_star_norm: target.fro_norm(),
            x_star: Some(target.clone()),
            data: Data::Factorization { target, target_freq },
            smoothness: OnceLock::from(1.0),
        }
    }

    /// Noiseless sensing: `y = M(x_star)`.
    pub fn recovery(op: Arc<dyn SensingMap>, x_star: Tensor3) -> Result<Self> {
        Self::recovery_with_noise(op, x_star, 0.0, 0)
    }

    /// `y = M(x_star) + e` with `e_i ~ N(0, noise_std^2)` drawn from `noise_seed`.
    pub fn recovery_with_noise(
        op: Arc<dyn SensingMap>,
        x_star: Tensor3,
        noise_std: f64,
        noise_seed: u64,
    ) -> Result<Self> {
        if !(noise_std >= 0.0) || !noise_std.is_finite() {
            return Err(TubalError::InvalidData(format!("noise level {noise_std}")));
        }
        let mut y = op.apply(&x_star)?;
        if noise_std > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            let dist = Normal::new(0.0, noise_std).expect("validated noise level");
            y.iter_mut().for_each(|v| *v += dist.sample(&mut rng));
        }
        let mut model = Self::from_observations(op, y)?;
        model.x_star_norm = x_star.fro_norm();
        model.x_star = Some(x_star);
        Ok(model)
    }

    /// Sensing loss from raw observations; relative errors are unavailable.
    pub fn from_observations(op: Arc<dyn SensingMap>, y: Vec<f64>) -> Result<Self> {
        if y.len() != op.num_measurements() {
            return Err(TubalError::InvalidData(format!(
                "{} observations for {} measurements",
                y.len(),
                op.num_measurements()
            )));
        }
        Ok(LossModel {
            data: Data::Recovery { op, y },
            x_star: None,
            x_star_norm: 0.0,
            smoothness: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> LossKind {
        match self.data {
            Data::Factorization { .. } => LossKind::Factorization,
            Data::Recovery { .. } => LossKind::Recovery,
        }
    }

    pub fn dims(&self) -> Dims {
        match &self.data {
            Data::Factorization { target, .. } => target.dims(),
            Data::Recovery { op, .. } => op.dims(),
        }
    }

    pub fn x_star(&self) -> Option<&Tensor3> {
        self.x_star.as_ref()
    }

    pub fn operator(&self) -> Option<&Arc<dyn SensingMap>> {
        match &self.data {
            Data::Recovery { op, .. } => Some(op),
            Data::Factorization { .. } => None,
        }
    }

    pub fn observations(&self) -> Option<&[f64]> {
        match &self.data {
            Data::Recovery { y, .. } => Some(y),
            Data::Factorization { .. } => None,
        }
    }

    fn check_pair(&self, pair: &FactorPair) -> Result<()> {
        let d = self.dims();
        if pair.product_dims() != d {
            return Err(TubalError::dims("loss", d, pair.product_dims()));
        }
        Ok(())
    }

    /// `f(X)` for an explicit tensor.
    pub fn value_at(&self, x: &Tensor3) -> Result<f64> {
        if x.dims() != self.dims() {
            return Err(TubalError::dims("loss", self.dims(), x.dims()));
        }
        Ok(match &self.data {
            Data::Factorization { target, .. } => 0.5 * (x - target).fro_norm_sq(),
            Data::Recovery { op, y } => {
                let mx = op.apply(x)?;
                0.5 * mx.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
        })
    }

    /// Loss and gradient at `L * R^T`, sharing one forward pass.
    pub fn eval(&self, pair: &FactorPair) -> Result<Evaluation> {
        self.check_pair(pair)?;
        let x_freq = pair.product_freq();
        let x = crate::tensor::from_freq(&x_freq)?;
        match &self.data {
            Data::Factorization { target, target_freq } => {
                let loss = 0.5 * (&x - target).fro_norm_sq();
                let grad_freq = x_freq.sub(target_freq)?;
                Ok(Evaluation { loss, x, grad_freq })
            }
            Data::Recovery { op, y } => {
                let mut resid = op.apply(&x)?;
                resid.iter_mut().zip(y).for_each(|(r, b)| *r -= b);
                let loss = 0.5 * resid.iter().map(|r| r * r).sum::<f64>();
                let grad = op.adjoint(&resid)?;
                Ok(Evaluation {
                    loss,
                    x,
                    grad_freq: to_freq(&grad),
                })
            }
        }
    }

    pub fn loss_value(&self, pair: &FactorPair) -> Result<f64> {
        self.check_pair(pair)?;
        self.value_at(&pair.product()?)
    }

    pub fn grad_l(&self, pair: &FactorPair) -> Result<Tensor3> {
        let ev = self.eval(pair)?;
        crate::tensor::from_freq(&ev.grad_l_freq(pair))
    }

    pub fn grad_r(&self, pair: &FactorPair) -> Result<Tensor3> {
        let ev = self.eval(pair)?;
        crate::tensor::from_freq(&ev.grad_r_freq(pair))
    }

    /// `||X - X*||_F / ||X*||_F`, when the ground truth is known and nonzero.
    pub fn rel_err(&self, x: &Tensor3) -> Option<f64> {
        let xs = self.x_star.as_ref()?;
        if self.x_star_norm == 0.0 {
            return None;
        }
        Some((x - xs).fro_norm() / self.x_star_norm)
    }

    /// Smoothness surrogate `L^`: 1 for factorization, `1 + delta^` for
    /// recovery, where `delta^` is the largest deviation of
    /// `||M(X)||^2 / ||X||_F^2` from 1 over a few random probes with the
    /// tubal rank of the ground truth (or rank 1 without one).
    pub fn smoothness(&self) -> f64 {
        *self.smoothness.get_or_init(|| match &self.data {
            Data::Factorization { .. } => 1.0,
            Data::Recovery { op, .. } => 1.0 + self.estimate_rip(op.as_ref()),
        })
    }

    fn estimate_rip(&self, op: &dyn SensingMap) -> f64 {
        let d = op.dims();
        let r = self
            .x_star
            .as_ref()
            .map(|x| crate::tlinalg::rank_profile(x, crate::tlinalg::DEFAULT_RANK_TOL).tubal_rank)
            .unwrap_or(1)
            .max(1);
        let mut delta = 0.0_f64;
        for probe in 0..SMOOTHNESS_PROBES {
            let pair = random_init(d, r, 1.0, 0x5eed_0000 + probe as u64).expect("valid probe rank");
            let Ok(x) = pair.product() else { continue };
            let nx = x.fro_norm_sq();
            if nx == 0.0 {
                continue;
            }
            if let Ok(mx) = op.apply(&x) {
                let ratio = mx.iter().map(|v| v * v).sum::<f64>() / nx;
                delta = delta.max((ratio - 1.0).abs());
            }
        }
        delta
    }
}
