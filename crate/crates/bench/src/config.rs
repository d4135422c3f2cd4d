//! Experiment configuration files.
//!
//! A config is TOML. Unknown keys are rejected everywhere, and a parsed config
//! serializes back to an equal value.
//!
//! ```toml
//! name = "example"
//! rank = 4
//! init = { kind = "spectral" }
//! init_seed = 3
//! repeats = 1
//!
//! [problem]
//! kind = "recovery"
//! measurements = 960
//! operator_seed = 2
//! truth = { dims = { n1 = 16, n2 = 16, n3 = 3 }, multi_rank = [4, 4, 4], kappa = 10.0, seed = 1 }
//!
//! [[runs]]
//! label = "apgd"
//! solver = { method = "apgd", step_size = 0.5, max_iters = 200 }
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tubal::objectives::{Init, LossKind};
use tubal::solvers::{DampingSchedule, Method, SolverConfig};
use tubal::synth::GroundTruthSpec;

use crate::error::BenchError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Names the output subdirectory.
    pub name: String,
    /// Tubal rank of the factors handed to every solver.
    pub rank: usize,
    /// Default initialization; a run may override it.
    pub init: Init,
    #[serde(default)]
    pub init_seed: u64,
    #[serde(default = "one")]
    pub repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub runs: Vec<RunSpec>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: LossKind,
    /// Number of Gaussian measurements; recovery only.
    #[serde(default)]
    pub measurements: usize,
    #[serde(default)]
    pub operator_seed: u64,
    pub truth: GroundTruthSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Init>,
    pub solver: SolverConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    StepSize,
    Damping,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::StepSize => "step_size",
            SweepAxis::Damping => "damping",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "step_size" | "step-size" | "eta" => Ok(SweepAxis::StepSize),
            "damping" | "lambda" => Ok(SweepAxis::Damping),
            other => Err(format!("unknown sweep axis `{other}` (expected step_size or damping)")),
        }
    }
}

/// A grid over one solver setting. Values are strings so that damping
/// entries can be written `f/10` (loss over ten) or `1e-10` (fixed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<String>,
}

impl Sweep {
    /// Applies `value` to `solver`.
    pub fn apply(&self, solver: &SolverConfig, value: &str) -> Result<SolverConfig, BenchError> {
        let mut out = solver.clone();
        match self.axis {
            SweepAxis::StepSize => out.step_size = parse_positive(value)?,
            SweepAxis::Damping => out.damping = parse_damping(value)?,
        }
        Ok(out)
    }
}

fn parse_positive(s: &str) -> Result<f64, BenchError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(BenchError::Config(format!("`{s}` is not a positive number"))),
    }
}

/// `f/c` gives `lambda_t = f(X_t) / c`; a bare number gives a fixed damping.
pub fn parse_damping(s: &str) -> Result<DampingSchedule, BenchError> {
    let t = s.trim();
    match t.strip_prefix("f/") {
        Some(c) => Ok(DampingSchedule::ProportionalToLoss { c: parse_positive(c)? }),
        None => Ok(DampingSchedule::Fixed { lambda: parse_positive(t)? }),
    }
}

fn file_safe(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !s.starts_with('.')
}

impl RunConfig {
    /// Parses and validates TOML text. Errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        if !file_safe(&self.name) {
            return bad(format!("name `{}` must be non-empty and use only [A-Za-z0-9._-]", self.name));
        }
        let truth = &self.problem.truth;
        truth.validate().map_err(|e| BenchError::Config(format!("problem.truth: {e}")))?;
        let max = truth.dims.n1.min(truth.dims.n2);
        if self.rank == 0 || self.rank > max {
            return bad(format!("rank {} out of range 1..={max}", self.rank));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        match self.problem.kind {
            LossKind::Recovery if self.problem.measurements == 0 => {
                return bad("recovery problems need problem.measurements > 0".into());
            }
            LossKind::Factorization if self.problem.measurements != 0 => {
                return bad("problem.measurements only applies to recovery".into());
            }
            _ => {}
        }
        if self.runs.is_empty() {
            return bad("no runs configured".into());
        }
        let mut seen = HashSet::new();
        for run in &self.runs {
            if !file_safe(&run.label) {
                return bad(format!("run label `{}` must use only [A-Za-z0-9._-]", run.label));
            }
            if !seen.insert(run.label.as_str()) {
                return bad(format!("duplicate run label `{}`", run.label));
            }
            let init = run.init.unwrap_or(self.init);
            if init == Init::Spectral && self.problem.kind != LossKind::Recovery {
                return bad(format!("run `{}`: spectral initialization needs a recovery problem", run.label));
            }
            if let Init::Random { scale } = init {
                if !(scale > 0.0) || !scale.is_finite() {
                    return bad(format!("run `{}`: init scale must be positive", run.label));
                }
            }
            run.solver
                .validate()
                .map_err(|e| BenchError::Config(format!("run `{}`: {e}", run.label)))?;
        }
        if let Some(sweep) = &self.sweep {
            self.check_sweep(sweep)?;
        }
        Ok(())
    }

    pub fn check_sweep(&self, sweep: &Sweep) -> Result<(), BenchError> {
        if sweep.values.is_empty() {
            return Err(BenchError::Config("sweep has no values".into()));
        }
        for run in &self.runs {
            for v in &sweep.values {
                let solver = sweep.apply(&run.solver, v)?;
                solver
                    .validate()
                    .map_err(|e| BenchError::Config(format!("run `{}` at {} = {v}: {e}", run.label, sweep.axis)))?;
            }
        }
        Ok(())
    }

    /// Rejects anything but APGD runs, the only method with a rebalancing step.
    pub fn check_ablation(&self) -> Result<(), BenchError> {
        match self.runs.iter().find(|r| r.solver.method != Method::Apgd) {
            Some(r) => Err(BenchError::Config(format!(
                "ablation is defined for APGD only; run `{}` uses {}",
                r.label, r.solver.method
            ))),
            None => Ok(()),
        }
    }

    /// Moves the ground-truth seed to `seed` and shifts the operator and
    /// init seeds by the same offset.
    pub fn reseed(&mut self, seed: u64) {
        let shift = seed.wrapping_sub(self.problem.truth.seed);
        self.problem.truth.seed = seed;
        self.problem.operator_seed = self.problem.operator_seed.wrapping_add(shift);
        self.init_seed = self.init_seed.wrapping_add(shift);
    }
}
