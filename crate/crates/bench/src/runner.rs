//! Turns a [`RunConfig`] into solver runs and output files.
//!
//! Repeat `k` uses ground-truth seed `truth.seed + k`, operator seed
//! `operator_seed + k` and init seed `init_seed + k`. Runs of one repeat share
//! the problem and may execute in parallel; results do not depend on the
//! thread count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tubal::objectives::Init;
use tubal::solvers::{run, IterTrace, SolverConfig};
use tubal::synth::{gen_problem, Problem};
use tubal::FactorPair;

use crate::config::{RunConfig, RunSpec, Sweep};
use crate::error::BenchError;
use crate::output::{summary_csv, trace_csv, write_atomic, SummaryRow};

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Run,
    Sweep(Sweep),
    /// Every run twice, with and without rebalancing.
    Ablation,
}

/// One solver invocation.
#[derive(Clone, Debug)]
pub struct Job {
    pub run: usize,
    pub label: String,
    /// Sweep value or ablation variant; empty for plain runs.
    pub value: String,
    pub repeat: usize,
    pub init: Init,
    pub solver: SolverConfig,
}

impl Job {
    pub fn file_name(&self) -> String {
        let value: String = self
            .value
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '.') { c } else { '_' })
            .collect();
        if value.is_empty() {
            format!("{}__rep{}.csv", self.label, self.repeat)
        } else {
            format!("{}__{}__rep{}.csv", self.label, value, self.repeat)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub job: Job,
    pub trace: IterTrace,
}

impl Outcome {
    pub fn summary(&self) -> SummaryRow {
        SummaryRow::from_trace(&self.job.label, self.job.solver.method.name(), &self.job.value, self.job.repeat, &self.trace.rows)
    }
}

/// The problem of repeat `repeat`.
pub fn problem_for(cfg: &RunConfig, repeat: usize) -> Result<Problem, BenchError> {
    let mut spec = cfg.problem.truth.clone();
    spec.seed = spec.seed.wrapping_add(repeat as u64);
    let op_seed = cfg.problem.operator_seed.wrapping_add(repeat as u64);
    Ok(gen_problem(&spec, cfg.problem.kind, cfg.problem.measurements, op_seed)?)
}

pub fn init_for(cfg: &RunConfig, spec: &RunSpec, problem: &Problem, repeat: usize) -> Result<FactorPair, BenchError> {
    build_init(cfg, spec.init.unwrap_or(cfg.init), problem, repeat)
}

fn build_init(cfg: &RunConfig, init: Init, problem: &Problem, repeat: usize) -> Result<FactorPair, BenchError> {
    Ok(init.build(&problem.model, cfg.rank, cfg.init_seed.wrapping_add(repeat as u64))?)
}

/// Every job of `cfg` under `mode`, ordered by repeat, run, then value.
pub fn plan(cfg: &RunConfig, mode: &Mode) -> Result<Vec<Job>, BenchError> {
    let mut jobs = Vec::new();
    for repeat in 0..cfg.repeats {
        for (i, spec) in cfg.runs.iter().enumerate() {
            let base = Job {
                run: i,
                label: spec.label.clone(),
                value: String::new(),
                repeat,
                init: spec.init.unwrap_or(cfg.init),
                solver: spec.solver.clone(),
            };
            match mode {
                Mode::Run => jobs.push(base),
                Mode::Sweep(sweep) => {
                    for v in &sweep.values {
                        jobs.push(Job { value: v.trim().to_string(), solver: sweep.apply(&spec.solver, v)?, ..base.clone() });
                    }
                }
                Mode::Ablation => {
                    for (value, on) in [("rebalance", true), ("no_rebalance", false)] {
                        jobs.push(Job { value: value.into(), solver: spec.solver.clone().with_rebalance(on), ..base.clone() });
                    }
                }
            }
        }
    }
    Ok(jobs)
}

/// Runs `jobs` on a pool of `threads` workers (all cores when `None`).
pub fn execute(cfg: &RunConfig, jobs: Vec<Job>, threads: Option<usize>) -> Result<Vec<Outcome>, BenchError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    let mut outcomes = Vec::with_capacity(jobs.len());
    for repeat in 0..cfg.repeats {
        let batch: Vec<Job> = jobs.iter().filter(|j| j.repeat == repeat).cloned().collect();
        if batch.is_empty() {
            continue;
        }
        let problem = problem_for(cfg, repeat)?;
        let done: Vec<Result<Outcome, BenchError>> = pool.install(|| {
            batch
                .into_par_iter()
                .map(|job| {
                    let init = build_init(cfg, job.init, &problem, repeat)?;
                    let trace = run(&problem.model, init, &job.solver);
                    Ok(Outcome { job, trace })
                })
                .collect()
        });
        for d in done {
            outcomes.push(d?);
        }
    }
    Ok(outcomes)
}

/// Writes one trace per outcome and `summary.csv` into `dir`.
pub fn write_outputs(dir: &Path, outcomes: &[Outcome]) -> Result<Vec<SummaryRow>, BenchError> {
    let mut summary = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        write_atomic(&dir.join(o.job.file_name()), &trace_csv(&o.trace.rows))?;
        summary.push(o.summary());
    }
    write_atomic(&dir.join("summary.csv"), &summary_csv(&summary))?;
    Ok(summary)
}

/// Output directory: the explicit override, else the config's, else `results`,
/// with the config name appended.
pub fn output_dir(cfg: &RunConfig, overridden: Option<&Path>) -> PathBuf {
    let root = overridden
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    root.join(&cfg.name)
}

/// Validates, plans, runs and writes. Returns the summary rows.
pub fn run_config(
    cfg: &RunConfig,
    mode: &Mode,
    out_root: Option<&Path>,
    threads: Option<usize>,
) -> Result<Vec<SummaryRow>, BenchError> {
    cfg.validate()?;
    match mode {
        Mode::Sweep(sweep) => cfg.check_sweep(sweep)?,
        Mode::Ablation => cfg.check_ablation()?,
        Mode::Run => {}
    }
    let jobs = plan(cfg, mode)?;
    let outcomes = execute(cfg, jobs, threads)?;
    write_outputs(&output_dir(cfg, out_root), &outcomes)
}
