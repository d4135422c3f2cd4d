//! Factored solvers under one stepping interface.
//!
//! * APGD: `L <- L - eta grad_L (R^T R + lambda I)^{-1}`, rebalance, fresh
//!   gradient, `R <- R - eta grad_R (L^T L + lambda I)^{-1}`, rebalance.
//! * ScaledGD: both factors from one gradient with undamped preconditioners.
//! * FGD: both factors from one gradient, no preconditioning.
//!
//! All arithmetic happens on cached frequency images of the factors. Failures
//! inside a run (singular Gram, blow-up) end the run and are reported through
//! the trace status.

mod config;
mod steps;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{theory_damping_bound, DampingSchedule, Method, SolverConfig, StopRule};
pub use steps::{damping_for, rebalance, rebalance_freq, step, Iterate};

use crate::error::{Result, TubalError};
use crate::factors::FactorPair;
use crate::objectives::LossModel;
use crate::tlinalg::gram_sigma_min;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Diverged,
    Singular,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Diverged => "diverged",
            Status::Singular => "singular",
        }
    }

    pub fn is_failure(&self) -> bool {
        *self != Status::Ok
    }

    fn from_error(e: &TubalError) -> Self {
        match e {
            TubalError::SingularPreconditioner { .. } => Status::Singular,
            _ => Status::Diverged,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Diagnostics of one iterate. `lambda` is the damping the method uses at
/// this iterate; `rel_err` is NaN when the ground truth is unknown.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub loss: f64,
    pub rel_err: f64,
    pub balance_gap: f64,
    pub sigma_min_gram: f64,
    pub lambda: f64,
    pub elapsed_s: f64,
    pub status: Status,
}

impl TraceRow {
    fn of(model: &LossModel, it: &Iterate, cfg: &SolverConfig, iter: usize, elapsed_s: f64) -> Self {
        let p = &it.pair;
        TraceRow {
            iter,
            loss: it.loss(),
            rel_err: model.rel_err(&it.eval.x).unwrap_or(f64::NAN),
            balance_gap: p.balance_gap(),
            sigma_min_gram: gram_sigma_min(p.l_freq()).min(gram_sigma_min(p.r_freq())),
            lambda: damping_for(cfg, it.loss()),
            elapsed_s,
            status: Status::Ok,
        }
    }
}

/// Every iterate of one run, plus the final factors.
#[derive(Clone, Debug)]
pub struct IterTrace {
    pub method: Method,
    pub rows: Vec<TraceRow>,
    /// Last finite iterate reached.
    pub final_pair: Option<FactorPair>,
    /// Message of the error that ended the run, if any.
    pub failure: Option<String>,
}

impl IterTrace {
    pub fn status(&self) -> Status {
        self.rows.last().map_or(Status::Diverged, |r| r.status)
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Relative error of the last row with status ok.
    pub fn final_rel_err(&self) -> f64 {
        self.rows
            .iter()
            .rev()
            .find(|r| r.status == Status::Ok)
            .map_or(f64::NAN, |r| r.rel_err)
    }

    /// Smallest relative error seen.
    pub fn min_rel_err(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_err).fold(f64::INFINITY, f64::min)
    }

    /// First iteration with relative error at or below `tol`.
    pub fn iters_to(&self, tol: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.rel_err <= tol).map(|r| r.iter)
    }

    /// Relative error at iteration `iter`, or at the last row if the run
    /// stopped earlier because it converged. Failed runs report infinity
    /// past their end.
    pub fn rel_err_at(&self, iter: usize) -> f64 {
        match self.rows.iter().find(|r| r.iter == iter) {
            Some(r) if r.status == Status::Ok => r.rel_err,
            Some(_) => f64::INFINITY,
            None => match self.rows.last() {
                Some(r) if r.status == Status::Ok => r.rel_err,
                _ => f64::INFINITY,
            },
        }
    }

    pub fn total_seconds(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.elapsed_s)
    }
}

fn one_step(model: &LossModel, pair: &FactorPair, cfg: &SolverConfig) -> Result<(FactorPair, TraceRow)> {
    let it = Iterate::new(model, pair.clone())?;
    let next = step(model, &it, cfg)?;
    let row = TraceRow::of(model, &next, cfg, 1, 0.0);
    Ok((next.pair, row))
}

/// One APGD iteration; the row describes the new iterate.
pub fn apgd_step(model: &LossModel, pair: &FactorPair, cfg: &SolverConfig) -> Result<(FactorPair, TraceRow)> {
    one_step(model, pair, &SolverConfig { method: Method::Apgd, ..cfg.clone() })
}

/// One ScaledGD iteration; fails with `SingularPreconditioner` when a Gram
/// slice is numerically singular.
pub fn scaledgd_step(model: &LossModel, pair: &FactorPair, cfg: &SolverConfig) -> Result<(FactorPair, TraceRow)> {
    one_step(model, pair, &SolverConfig { method: Method::ScaledGd, ..cfg.clone() })
}

pub fn fgd_step(model: &LossModel, pair: &FactorPair, cfg: &SolverConfig) -> Result<(FactorPair, TraceRow)> {
    one_step(model, pair, &SolverConfig { method: Method::Fgd, ..cfg.clone() })
}

/// Runs `cfg` from `init` until the stop rule, the iteration budget or a
/// failure. Never returns an error: failures become the final row's status.
pub fn run(model: &LossModel, init: FactorPair, cfg: &SolverConfig) -> IterTrace {
    run_with(model, init, cfg, |_, _| {})
}

/// As [`run`], calling `observe(t, iterate)` on every accepted iterate.
pub fn run_with(
    model: &LossModel,
    init: FactorPair,
    cfg: &SolverConfig,
    mut observe: impl FnMut(usize, &Iterate),
) -> IterTrace {
    let start = Instant::now();
    let clock = || if cfg.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let mut trace = IterTrace {
        method: cfg.method,
        rows: Vec::new(),
        final_pair: None,
        failure: None,
    };
    let failed_row = |iter: usize, prev: Option<&TraceRow>, status: Status, elapsed_s: f64| {
        let nan = f64::NAN;
        match prev {
            Some(p) => TraceRow { iter, status, elapsed_s, ..*p },
            None => TraceRow {
                iter,
                loss: nan,
                rel_err: nan,
                balance_gap: nan,
                sigma_min_gram: nan,
                lambda: nan,
                elapsed_s,
                status,
            },
        }
    };

    let mut it = match Iterate::new(model, init) {
        Ok(it) => it,
        Err(e) => {
            trace.rows.push(failed_row(0, None, Status::from_error(&e), clock()));
            trace.failure = Some(e.to_string());
            return trace;
        }
    };
    let loss0 = it.loss();
    let norm0 = it.pair.factor_norm().max(1.0);
    let guard = cfg.divergence_guard;
    observe(0, &it);
    trace.rows.push(TraceRow::of(model, &it, cfg, 0, clock()));

    for t in 1..=cfg.max_iters {
        let prev = trace.rows.last().copied().expect("initial row");
        if cfg.stop.reached(prev.loss, model.rel_err(&it.eval.x)) {
            break;
        }
        match step(model, &it, cfg) {
            Ok(next) => {
                let mut row = TraceRow::of(model, &next, cfg, t, clock());
                let norm = next.pair.factor_norm();
                let blew_up = (loss0 > 0.0 && next.loss() > guard * loss0) || norm > guard * norm0;
                if blew_up || !row.loss.is_finite() {
                    row.status = Status::Diverged;
                    trace.failure = Some(format!("loss {:.3e}, factor norm {:.3e}", next.loss(), norm));
                    trace.rows.push(row);
                    break;
                }
                observe(t, &next);
                trace.rows.push(row);
                it = next;
            }
            Err(e) => {
                trace.rows.push(failed_row(t, Some(&prev), Status::from_error(&e), clock()));
                trace.failure = Some(e.to_string());
                break;
            }
        }
    }
    trace.final_pair = Some(it.pair);
    trace
}
