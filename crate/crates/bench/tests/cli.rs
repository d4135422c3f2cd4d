use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tubal::solvers::Status;
use tubal_bench::output::{read_trace, SummaryRow};

const SMALL: &str = r#"
name = "small"
rank = 2
init = { kind = "random", scale = 1.0 }
init_seed = 5
repeats = 2

[problem]
kind = "factorization"
truth = { dims = { n1 = 8, n2 = 7, n3 = 3 }, multi_rank = [2, 2, 2], kappa = 3.0, seed = 1 }

[[runs]]
label = "apgd"
solver = { method = "apgd", step_size = 0.5, max_iters = 60, record_timing = false }

[[runs]]
label = "gd"
solver = { method = "fgd", step_size = 0.2, max_iters = 60, record_timing = false, stop = { kind = "never" } }
"#;

fn bench(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubal-bench"))
        .args(args)
        .env("TUBAL_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_summary(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn run_writes_traces_and_a_recomputable_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let out = bench(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("small");
    let summary = read_summary(&dir.join("summary.csv"));
    assert_eq!(summary.len(), 4);
    for rec in &summary {
        let (run, method, value, repeat) = (&rec[0], &rec[1], &rec[2], rec[3].parse::<usize>().unwrap());
        let rows = read_trace(&dir.join(format!("{run}__rep{repeat}.csv"))).unwrap();
        assert_eq!(rows[0].iter, 0);
        let again = SummaryRow::from_trace(run, method, value, repeat, &rows);
        assert_eq!(rec[4].parse::<f64>().unwrap().to_bits(), again.final_rel_err.to_bits());
        assert_eq!(&rec[7], again.status.to_string());
    }
    let header = std::fs::read_to_string(dir.join("apgd__rep0.csv")).unwrap();
    assert!(header.starts_with("iter,loss,rel_err,balance_gap,sigma_min_gram,lambda,elapsed_s,status\n"));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(bench(&["run", "--config", cfg.to_str().unwrap(), "--threads", "1"], &a).status.success());
    assert!(bench(&["run", "--config", cfg.to_str().unwrap(), "--threads", "3"], &b).status.success());
    assert_eq!(files(&a.join("small")), files(&b.join("small")));
}

#[test]
fn seed_flag_changes_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(bench(&["run", "--config", cfg.to_str().unwrap()], &a).status.success());
    assert!(bench(&["run", "--config", cfg.to_str().unwrap(), "--seed", "77"], &b).status.success());
    let trace = |d: &Path| std::fs::read(d.join("small/gd__rep0.csv")).unwrap();
    assert_ne!(trace(&a), trace(&b));
}

#[test]
fn sweep_emits_one_row_per_method_and_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let out = bench(
        &["sweep", "--config", cfg.to_str().unwrap(), "--axis", "damping", "--values", "f/2,1e-10"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_summary(&tmp.path().join("small/summary.csv"));
    assert_eq!(summary.len(), 2 * 2 * 2);
    assert!(summary.iter().any(|r| &r[0] == "apgd" && &r[2] == "f/2"));
    assert!(tmp.path().join("small/apgd__f_2__rep1.csv").exists());
    assert!(tmp.path().join("small/gd__1e-10__rep0.csv").exists());
}

#[test]
fn single_value_sweep_matches_plain_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(bench(&["run", "--config", cfg.to_str().unwrap()], &a).status.success());
    let swept = bench(&["sweep", "--config", cfg.to_str().unwrap(), "--axis", "step_size", "--values", "0.5"], &b);
    assert!(swept.status.success());
    let plain = std::fs::read(a.join("small/apgd__rep0.csv")).unwrap();
    assert_eq!(plain, std::fs::read(b.join("small/apgd__0.5__rep0.csv")).unwrap());
}

#[test]
fn ablation_pairs_runs_and_rejects_other_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let out = bench(&["ablation", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("APGD"));

    let apgd_only = SMALL.split("[[runs]]\nlabel = \"gd\"").next().unwrap();
    let cfg = write_config(tmp.path(), "apgd.toml", apgd_only);
    let out = bench(&["ablation", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let on = read_trace(&tmp.path().join("small/apgd__rebalance__rep0.csv")).unwrap();
    let off = read_trace(&tmp.path().join("small/apgd__no_rebalance__rep0.csv")).unwrap();
    let scale = on[0].loss.max(1.0);
    assert!(on.iter().skip(1).all(|r| r.balance_gap <= 1e-10 * scale));
    assert!(off.iter().skip(1).any(|r| r.balance_gap > 1e-8));
}

#[test]
fn config_errors_exit_with_two_and_a_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = write_config(tmp.path(), "typo.toml", &SMALL.replace("repeats = 2", "repeats = 2\nrepeets = 3"));
    let out = bench(&["run", "--config", typo.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 7") && err.contains("repeets"), "{err}");

    let empty = "runs = []\n".to_string() + SMALL.split("[[runs]]").next().unwrap();
    let empty = write_config(tmp.path(), "empty.toml", &empty);
    let out = bench(&["run", "--config", empty.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no runs"));
}

#[test]
fn io_errors_exit_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let missing = bench(&["run", "--config", tmp.path().join("nope.toml").to_str().unwrap()], tmp.path());
    assert_eq!(missing.status.code(), Some(3));
    // the output root is a regular file
    let blocker = write_config(tmp.path(), "blocker", "");
    let out = bench(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", blocker.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn dumped_presets_load_back() {
    let tmp = tempfile::tempdir().unwrap();
    let list = bench(&["dump-preset"], tmp.path());
    let names = String::from_utf8(list.stdout).unwrap();
    assert!(names.lines().any(|l| l == "fig6b"));
    let dumped = bench(&["dump-preset", "fig4b"], tmp.path());
    let cfg = tubal_bench::RunConfig::from_toml(&String::from_utf8(dumped.stdout).unwrap()).unwrap();
    assert_eq!(cfg, tubal_bench::presets::preset("fig4b").unwrap());
}

fn statuses(summary: &[csv::StringRecord], run: &str) -> Vec<String> {
    summary.iter().filter(|r| &r[0] == run).map(|r| r[7].to_string()).collect()
}

#[test]
fn factorization_preset_runs_every_method_and_repeat() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bench(&["run", "--preset", "fig2a"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_summary(&tmp.path().join("fig2a/summary.csv"));
    assert_eq!(summary.len(), 9);
    let ok = Status::Ok.to_string();
    assert!(statuses(&summary, "apgd").iter().all(|s| *s == ok));
    assert!(statuses(&summary, "scaled_gd").iter().all(|s| *s == ok));
    assert_eq!(files(&tmp.path().join("fig2a")).len(), 10);
}

#[test]
fn over_parameterized_sensing_breaks_scaled_gd_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bench(&["run", "--preset", "fig1a"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_summary(&tmp.path().join("fig1a/summary.csv"));
    assert_ne!(statuses(&summary, "scaled_gd"), vec!["ok".to_string()]);
    assert_eq!(statuses(&summary, "apgd"), vec!["ok".to_string()]);
}
