use serde::{Deserialize, Serialize};

use crate::error::{Result, TubalError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Alternating preconditioned gradient descent with damping and rebalancing.
    Apgd,
    /// Scaled gradient descent: undamped preconditioners, simultaneous updates.
    ScaledGd,
    /// Plain factored gradient descent.
    Fgd,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Apgd => "apgd",
            Method::ScaledGd => "scaled_gd",
            Method::Fgd => "fgd",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the damping `lambda_t` is chosen at each APGD iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingSchedule {
    /// `lambda_t = f(X_t) / c`.
    ProportionalToLoss { c: f64 },
    Fixed { lambda: f64 },
}

impl Default for DampingSchedule {
    fn default() -> Self {
        DampingSchedule::ProportionalToLoss { c: 10.0 }
    }
}

impl DampingSchedule {
    pub fn lambda(&self, loss: f64) -> f64 {
        match *self {
            DampingSchedule::ProportionalToLoss { c } => (loss / c).max(0.0),
            DampingSchedule::Fixed { lambda } => lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DampingSchedule::ProportionalToLoss { c } if !(c > 0.0) || !c.is_finite() => Err(
                TubalError::BadSpec(format!("damping divisor must be positive, got {c}")),
            ),
            DampingSchedule::Fixed { lambda } if !(lambda > 0.0) || !lambda.is_finite() => Err(
                TubalError::BadSpec(format!("fixed damping must be positive, got {lambda}")),
            ),
            _ => Ok(()),
        }
    }
}

/// When a run counts as converged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StopRule {
    /// Relative error to the ground truth at or below `tol`.
    RelErr { tol: f64 },
    /// Loss at or below `tol`.
    Loss { tol: f64 },
    /// Only the iteration budget stops the run.
    Never,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::RelErr { tol: 1e-12 }
    }
}

impl StopRule {
    pub fn reached(&self, loss: f64, rel_err: Option<f64>) -> bool {
        match *self {
            StopRule::RelErr { tol } => rel_err.is_some_and(|e| e <= tol),
            StopRule::Loss { tol } => loss <= tol,
            StopRule::Never => false,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_guard() -> f64 {
    1e6
}

fn default_max_iters() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    pub step_size: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Used by APGD only.
    #[serde(default)]
    pub damping: DampingSchedule,
    /// Used by APGD only; `false` passes factors through unchanged.
    #[serde(default = "default_true")]
    pub rebalance: bool,
    #[serde(default)]
    pub stop: StopRule,
    /// A run is marked diverged once the loss exceeds `guard` times its
    /// initial value, or the factor norm exceeds `guard` times
    /// `max(initial factor norm, 1)`.
    #[serde(default = "default_guard")]
    pub divergence_guard: f64,
    /// Record wall-clock seconds in traces; off gives byte-reproducible output.
    #[serde(default = "default_true")]
    pub record_timing: bool,
}

impl SolverConfig {
    pub fn new(method: Method, step_size: f64) -> Self {
        SolverConfig {
            method,
            step_size,
            max_iters: default_max_iters(),
            damping: DampingSchedule::default(),
            rebalance: true,
            stop: StopRule::default(),
            divergence_guard: default_guard(),
            record_timing: true,
        }
    }

    pub fn apgd(step_size: f64) -> Self {
        Self::new(Method::Apgd, step_size)
    }

    pub fn scaled_gd(step_size: f64) -> Self {
        Self::new(Method::ScaledGd, step_size)
    }

    pub fn fgd(step_size: f64) -> Self {
        Self::new(Method::Fgd, step_size)
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_damping(mut self, d: DampingSchedule) -> Self {
        self.damping = d;
        self
    }

    pub fn with_rebalance(mut self, on: bool) -> Self {
        self.rebalance = on;
        self
    }

    pub fn with_stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_timing(mut self, on: bool) -> Self {
        self.record_timing = on;
        self
    }

    /// Checks the user-facing invariants: positive step, at least one
    /// iteration, valid damping and guard.
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(TubalError::BadSpec(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.max_iters == 0 {
            return Err(TubalError::BadSpec("max_iters must be at least 1".into()));
        }
        if !(self.divergence_guard > 1.0) {
            return Err(TubalError::BadSpec(format!(
                "divergence guard must exceed 1, got {}",
                self.divergence_guard
            )));
        }
        match self.stop {
            StopRule::RelErr { tol } | StopRule::Loss { tol } if !(tol >= 0.0) => {
                return Err(TubalError::BadSpec(format!("stop tolerance {tol}")));
            }
            _ => {}
        }
        self.damping.validate()
    }
}

/// Upper bound on the damping under which the local linear-rate guarantee
/// holds, given restricted smoothness `l` and strong convexity `mu`:
/// `sqrt(2 / (l c1^2)) * sqrt(f(X_t) - f(X*))`, with
/// `c1 = 1/(sqrt 5 - 1) + sqrt(2 (s_r - s_r*)) (l + mu) / sqrt(mu l n3)`,
/// where `s_r` and `s_r*` are the multi-rank sums of the iterate and the
/// ground truth. Diagnostic only; schedules never use it.
pub fn theory_damping_bound(
    l: f64,
    mu: f64,
    s_r: usize,
    s_r_star: usize,
    n3: usize,
    excess_loss: f64,
) -> f64 {
    let gap = s_r.saturating_sub(s_r_star) as f64;
    let c1 = 1.0 / (5f64.sqrt() - 1.0) + (2.0 * gap).sqrt() * (l + mu) / (mu * l * n3 as f64).sqrt();
    (2.0 / (l * c1 * c1)).sqrt() * excess_loss.max(0.0).sqrt()
}
