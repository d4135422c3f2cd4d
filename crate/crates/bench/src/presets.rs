//! Built-in experiment configurations.
//!
//! All presets turn wall-clock recording off, so a preset and seed always
//! produce byte-identical traces, except the `fig5*` timing presets.
//! Recovery presets use `m = 5 r n1 n3` measurements with `r` the estimated
//! rank. Where a setting is not fixed by the experiment description (the
//! condition number of the sensing experiments, the non-full multi-rank of
//! the factorization case) the choice is noted next to it.

use tubal::objectives::{Init, LossKind};
use tubal::solvers::{SolverConfig, StopRule};
use tubal::synth::GroundTruthSpec;
use tubal::Dims;

use crate::config::{ProblemConfig, RunConfig, RunSpec, Sweep, SweepAxis};

pub const PRESET_NAMES: &[&str] = &[
    "fig1a", "fig1b", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b",
    "fig5a", "fig5b", "fig6a", "fig6b", "fig7", "fig7b",
];

fn truth(n: usize, n3: usize, multi_rank: Vec<usize>, kappa: f64, seed: u64) -> GroundTruthSpec {
    GroundTruthSpec { dims: Dims::new(n, n, n3), multi_rank, kappa, seed }
}

fn solver(s: SolverConfig, iters: usize) -> SolverConfig {
    s.with_max_iters(iters).with_stop(StopRule::Never).with_timing(false)
}

fn run(label: &str, s: SolverConfig) -> RunSpec {
    RunSpec { label: label.into(), init: None, solver: s }
}

fn three_methods(eta: f64, iters: usize) -> Vec<RunSpec> {
    vec![
        run("gd", solver(SolverConfig::fgd(eta), iters)),
        run("scaled_gd", solver(SolverConfig::scaled_gd(eta), iters)),
        run("apgd", solver(SolverConfig::apgd(eta), iters)),
    ]
}

fn recovery(name: &str, truth: GroundTruthSpec, rank: usize, op_seed: u64, runs: Vec<RunSpec>) -> RunConfig {
    let m = 5 * rank * truth.dims.n1 * truth.dims.n3;
    RunConfig {
        name: name.into(),
        rank,
        init: Init::Spectral,
        init_seed: 3,
        repeats: 1,
        output_dir: None,
        problem: ProblemConfig { kind: LossKind::Recovery, measurements: m, operator_seed: op_seed, truth },
        sweep: None,
        runs,
    }
}

/// Sensing with rank over-parameterization and non-full multi-rank;
/// `n = 20`, `n3 = 3`, `r* = 5`, `kappa = 10`, step 0.5, spectral start.
fn fig1(name: &str, multi: Vec<usize>, rank: usize) -> RunConfig {
    recovery(name, truth(20, 3, multi, 10.0, 1), rank, 2, three_methods(0.5, 1000))
}

/// Factorization, `n = 20`, `n3 = 3`, `r* = 10`, step 0.5, 1000 iterations,
/// Gaussian start with variances `1/n1` and `1/n2`, three repeats. The
/// non-full case uses multi-rank `[5, 10, 10]`.
fn fig2(name: &str, multi: Vec<usize>, kappa: f64, rank: usize) -> RunConfig {
    RunConfig {
        name: name.into(),
        rank,
        init: Init::Random { scale: 1.0 },
        init_seed: 100,
        repeats: 3,
        output_dir: None,
        problem: ProblemConfig {
            kind: LossKind::Factorization,
            measurements: 0,
            operator_seed: 0,
            truth: truth(20, 3, multi, kappa, 0),
        },
        sweep: None,
        runs: three_methods(0.5, 1000),
    }
}

/// Sensing, `n = 50`, `n3 = 3`, `r* = 5`, step 0.6, 500 iterations; GD from
/// the spectral start and from a tiny random start.
fn fig3(name: &str, multi: Vec<usize>, kappa: f64, rank: usize) -> RunConfig {
    let s = |c: SolverConfig| solver(c, 500);
    let runs = vec![
        RunSpec { label: "fgd_spectral".into(), init: None, solver: s(SolverConfig::fgd(0.6)) },
        RunSpec { label: "fgd_small".into(), init: Some(Init::SmallRandom), solver: s(SolverConfig::fgd(0.6)) },
        run("scaled_gd", s(SolverConfig::scaled_gd(0.6))),
        run("apgd", s(SolverConfig::apgd(0.6))),
    ];
    recovery(name, truth(50, 3, multi, kappa, 1), rank, 2, runs)
}

/// Step-size sweep after 100 iterations; `n = 20`, `r* = 10`, `kappa = 10`.
fn fig4(name: &str, rank: usize) -> RunConfig {
    let values = (1..=12).map(|i| format!("{:.1}", i as f64 / 10.0)).collect();
    RunConfig {
        sweep: Some(Sweep { axis: SweepAxis::StepSize, values }),
        ..recovery(name, truth(20, 3, vec![10; 3], 10.0, 1), rank, 2, three_methods(0.5, 100))
    }
}

/// Wall-clock runs to `1e-12` relative error; `n = 50`, `r* = 5`,
/// `kappa = 2`, step 0.6.
fn fig5(name: &str, rank: usize) -> RunConfig {
    let runs = [SolverConfig::fgd(0.6), SolverConfig::scaled_gd(0.6), SolverConfig::apgd(0.6)]
        .into_iter()
        .map(|s| run(s.method.name(), s.with_max_iters(500).with_stop(StopRule::RelErr { tol: 1e-12 })))
        .collect();
    recovery(name, truth(50, 3, vec![5; 3], 2.0, 1), rank, 2, runs)
}

/// APGD with `n = 20`, `r* = 10`, `r = 20`, `kappa = 10`, step 0.5.
fn fig6_problem(name: &str, runs: Vec<RunSpec>) -> RunConfig {
    recovery(name, truth(20, 3, vec![10; 3], 10.0, 1), 20, 2, runs)
}

/// Rebalancing ablation, `n = 50`, `r* = 5`, `kappa = 10`, step 0.5.
fn fig7(name: &str, rank: usize) -> RunConfig {
    recovery(name, truth(50, 3, vec![5; 3], 10.0, 1), rank, 2, vec![run("apgd", solver(SolverConfig::apgd(0.5), 500))])
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let apgd = || solver(SolverConfig::apgd(0.5), 1000);
    Some(match name {
        "fig1a" => fig1(name, vec![5; 3], 10),
        "fig1b" => fig1(name, vec![2, 5, 5], 5),
        "fig2a" => fig2(name, vec![10; 3], 1.0, 10),
        "fig2b" => fig2(name, vec![10; 3], 100.0, 10),
        "fig2c" => fig2(name, vec![5, 10, 10], 1.0, 10),
        "fig2d" => fig2(name, vec![10; 3], 1.0, 20),
        "fig3a" => fig3(name, vec![5; 3], 2.0, 5),
        "fig3b" => fig3(name, vec![5; 3], 100.0, 5),
        "fig3c" => fig3(name, vec![1, 5, 5], 100.0, 5),
        "fig3d" => fig3(name, vec![5; 3], 100.0, 10),
        "fig4a" => fig4(name, 10),
        "fig4b" => fig4(name, 20),
        "fig5a" => fig5(name, 5),
        "fig5b" => fig5(name, 10),
        "fig6a" => fig6_problem(
            name,
            vec![
                run("spectral", apgd()),
                // unit-variance entries
                RunSpec { label: "random".into(), init: Some(Init::Random { scale: 20.0 }), solver: apgd() },
                RunSpec { label: "small_random".into(), init: Some(Init::SmallRandom), solver: apgd() },
            ],
        ),
        "fig6b" => RunConfig {
            sweep: Some(Sweep {
                axis: SweepAxis::Damping,
                values: ["f/2", "f/10", "1e-10", "1e-15"].map(String::from).to_vec(),
            }),
            ..fig6_problem(name, vec![run("apgd", apgd())])
        },
        "fig7" => fig7(name, 5),
        "fig7b" => fig7(name, 10),
        _ => return None,
    })
}
