use crate::error::{Result, TubalError};
use crate::factors::FactorPair;
use crate::objectives::{Evaluation, LossModel};
use crate::tensor::{to_freq, FreqTensor, Tensor3};
use crate::tlinalg::{damped_pinv_freq, diag_freq, svd_freq, tqr_freq};

use super::config::{Method, SolverConfig};

/// A factor pair with its loss evaluation.
#[derive(Clone, Debug)]
pub struct Iterate {
    pub pair: FactorPair,
    pub eval: Evaluation,
}

impl Iterate {
    pub fn new(model: &LossModel, pair: FactorPair) -> Result<Self> {
        if !pair.is_finite() {
            return Err(TubalError::Diverged("non-finite factors".into()));
        }
        let eval = model.eval(&pair)?;
        if !eval.loss.is_finite() {
            return Err(TubalError::Diverged(format!("loss {}", eval.loss)));
        }
        Ok(Iterate { pair, eval })
    }

    pub fn loss(&self) -> f64 {
        self.eval.loss
    }
}

/// Re-factors `(L, R)` so that `L^T * L = R^T * R` without changing `L * R^T`.
pub fn rebalance_freq(l: &FreqTensor, r: &FreqTensor) -> Result<FactorPair> {
    let (ql, wl) = tqr_freq(l)?;
    let (qr, wr) = tqr_freq(r)?;
    let core = wl.tprod_adjoint_right(&wr)?;
    let rank = core.dims().n1;
    let svd = svd_freq(&core, rank)?;
    let root = diag_freq(&svd.sigma, f64::sqrt);
    let l_new = ql.tprod(&svd.u)?.tprod(&root)?;
    let r_new = qr.tprod(&svd.v)?.tprod(&root)?;
    FactorPair::from_freq(l_new, r_new)
}

pub fn rebalance(l: &Tensor3, r: &Tensor3) -> Result<FactorPair> {
    if l.n2() != r.n2() || l.n3() != r.n3() {
        return Err(TubalError::dims("rebalance", l.dims(), r.dims()));
    }
    rebalance_freq(&to_freq(l), &to_freq(r))
}

/// `grad * m * (m^T * m + lambda I)^{-1}` with `grad` applied as is (`left`)
/// or transposed. A zero gradient short-circuits so that an exact minimizer
/// stays fixed even when the Gram is singular.
fn preconditioned(grad: &FreqTensor, m: &FreqTensor, lambda: f64, transpose: bool) -> Result<FreqTensor> {
    if grad.fro_norm() == 0.0 {
        let d = grad.dims();
        let rows = if transpose { d.n2 } else { d.n1 };
        return Ok(FreqTensor::zeros(crate::tensor::Dims::new(rows, m.dims().n2, d.n3)));
    }
    let pinv = damped_pinv_freq(m, lambda)?;
    if transpose {
        grad.tprod_adjoint_left(&pinv)
    } else {
        grad.tprod(&pinv)
    }
}

fn descend(x: &FreqTensor, dir: &FreqTensor, eta: f64) -> Result<FreqTensor> {
    x.sub(&dir.scaled(eta))
}

fn pass_or_rebalance(l: FreqTensor, r: FreqTensor, on: bool) -> Result<FactorPair> {
    if on {
        rebalance_freq(&l, &r)
    } else {
        FactorPair::from_freq(l, r)
    }
}

/// One APGD iteration from `it`, with `lambda` held fixed across both
/// half-steps. Returns the next iterate.
pub(crate) fn apgd_from(model: &LossModel, it: &Iterate, cfg: &SolverConfig, lambda: f64) -> Result<Iterate> {
    let eta = cfg.step_size;
    let p = &it.pair;
    let l_tilde = descend(p.l_freq(), &preconditioned(&it.eval.grad_freq, p.r_freq(), lambda, false)?, eta)?;
    let half = pass_or_rebalance(l_tilde, p.r_freq().clone(), cfg.rebalance)?;
    let half = Iterate::new(model, half)?;

    let hp = &half.pair;
    let r_tilde = descend(hp.r_freq(), &preconditioned(&half.eval.grad_freq, hp.l_freq(), lambda, true)?, eta)?;
    let next = pass_or_rebalance(hp.l_freq().clone(), r_tilde, cfg.rebalance)?;
    Iterate::new(model, next)
}

pub(crate) fn scaledgd_from(model: &LossModel, it: &Iterate, cfg: &SolverConfig) -> Result<Iterate> {
    let eta = cfg.step_size;
    let p = &it.pair;
    let g = &it.eval.grad_freq;
    let l = descend(p.l_freq(), &preconditioned(g, p.r_freq(), 0.0, false)?, eta)?;
    let r = descend(p.r_freq(), &preconditioned(g, p.l_freq(), 0.0, true)?, eta)?;
    Iterate::new(model, FactorPair::from_freq(l, r)?)
}

pub(crate) fn fgd_from(model: &LossModel, it: &Iterate, cfg: &SolverConfig) -> Result<Iterate> {
    let eta = cfg.step_size;
    let p = &it.pair;
    let l = descend(p.l_freq(), &it.eval.grad_l_freq(p), eta)?;
    let r = descend(p.r_freq(), &it.eval.grad_r_freq(p), eta)?;
    Iterate::new(model, FactorPair::from_freq(l, r)?)
}

/// Damping used by `method` at an iterate with the given loss.
pub fn damping_for(cfg: &SolverConfig, loss: f64) -> f64 {
    match cfg.method {
        Method::Apgd => cfg.damping.lambda(loss),
        Method::ScaledGd | Method::Fgd => 0.0,
    }
}

/// Advances `it` by one iteration of the configured method.
pub fn step(model: &LossModel, it: &Iterate, cfg: &SolverConfig) -> Result<Iterate> {
    match cfg.method {
        Method::Apgd => apgd_from(model, it, cfg, damping_for(cfg, it.loss())),
        Method::ScaledGd => scaledgd_from(model, it, cfg),
        Method::Fgd => fgd_from(model, it, cfg),
    }
}
