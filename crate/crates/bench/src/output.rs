//! Trace and summary CSV files.
//!
//! Floats are written in shortest round-trip exponent form, so a trace read
//! back gives the same numbers and a summary can be recomputed from traces.

use std::io::Write;
use std::path::Path;

use tubal::solvers::{Status, TraceRow};

use crate::error::BenchError;

pub const TRACE_HEADER: [&str; 8] =
    ["iter", "loss", "rel_err", "balance_gap", "sigma_min_gram", "lambda", "elapsed_s", "status"];

pub const SUMMARY_HEADER: [&str; 8] =
    ["run", "method", "value", "repeat", "final_rel_err", "iters_to_1e-6", "wall_time_s", "status"];

/// Error level used for the "iterations to" column.
pub const SUMMARY_TOL: f64 = 1e-6;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn parse_status(s: &str) -> Option<Status> {
    match s {
        "ok" => Some(Status::Ok),
        "diverged" => Some(Status::Diverged),
        "singular" => Some(Status::Singular),
        _ => None,
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| BenchError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| BenchError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}

fn to_bytes(records: impl IntoIterator<Item = Vec<String>>, header: &[&str]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn trace_csv(rows: &[TraceRow]) -> Vec<u8> {
    let records = rows.iter().map(|r| {
        vec![
            r.iter.to_string(),
            fmt_f64(r.loss),
            fmt_f64(r.rel_err),
            fmt_f64(r.balance_gap),
            fmt_f64(r.sigma_min_gram),
            fmt_f64(r.lambda),
            fmt_f64(r.elapsed_s),
            r.status.to_string(),
        ]
    });
    to_bytes(records, &TRACE_HEADER)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, BenchError> {
    let text = std::fs::read(path).map_err(|e| BenchError::io(path, e))?;
    parse_trace(&text).map_err(|m| BenchError::Config(format!("{}: {m}", path.display())))
}

pub fn parse_trace(bytes: &[u8]) -> Result<Vec<TraceRow>, String> {
    let mut rd = csv::Reader::from_reader(bytes);
    let header = rd.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(format!("unexpected trace header {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("column {}: {e}", TRACE_HEADER[i]));
        rows.push(TraceRow {
            iter: rec[0].parse().map_err(|e| format!("iter: {e}"))?,
            loss: f(1)?,
            rel_err: f(2)?,
            balance_gap: f(3)?,
            sigma_min_gram: f(4)?,
            lambda: f(5)?,
            elapsed_s: f(6)?,
            status: parse_status(&rec[7]).ok_or_else(|| format!("bad status `{}`", &rec[7]))?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub run: String,
    pub method: String,
    /// Sweep value or ablation variant; empty for plain runs.
    pub value: String,
    pub repeat: usize,
    /// Infinite when the run ended in failure.
    pub final_rel_err: f64,
    pub iters_to_tol: Option<usize>,
    pub wall_time_s: f64,
    pub status: Status,
}

impl SummaryRow {
    /// Everything but the identifying columns comes from the trace rows.
    pub fn from_trace(run: &str, method: &str, value: &str, repeat: usize, rows: &[TraceRow]) -> Self {
        let last = rows.last();
        let status = last.map_or(Status::Diverged, |r| r.status);
        SummaryRow {
            run: run.to_string(),
            method: method.to_string(),
            value: value.to_string(),
            repeat,
            final_rel_err: match last {
                Some(r) if r.status == Status::Ok => r.rel_err,
                _ => f64::INFINITY,
            },
            iters_to_tol: rows.iter().find(|r| r.status == Status::Ok && r.rel_err <= SUMMARY_TOL).map(|r| r.iter),
            wall_time_s: last.map_or(0.0, |r| r.elapsed_s),
            status,
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.run.clone(),
            self.method.clone(),
            self.value.clone(),
            self.repeat.to_string(),
            fmt_f64(self.final_rel_err),
            self.iters_to_tol.map_or(String::new(), |n| n.to_string()),
            fmt_f64(self.wall_time_s),
            self.status.to_string(),
        ]
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> Vec<u8> {
    to_bytes(rows.iter().map(SummaryRow::record), &SUMMARY_HEADER)
}
