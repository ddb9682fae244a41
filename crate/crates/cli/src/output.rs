//! CSV artifacts and the plain-text summary.
//!
//! Every CSV starts with a `#` comment line carrying the run seed and
//! command. Floats use Rust's shortest round-trip formatting, so reloading a
//! file reproduces the in-memory values exactly.

use std::fmt::Write as _;
use std::path::Path;

use iqc_core::lmi::Status;
use iqc_core::sweep::{CertificationReport, PointVerdict};

use crate::error::CliError;

pub fn status_label(s: Status) -> &'static str {
    match s {
        Status::Feasible => "feasible",
        Status::Infeasible => "infeasible",
        Status::Inconclusive => "inconclusive",
    }
}

pub fn parse_status(s: &str) -> Option<Status> {
    match s {
        "feasible" => Some(Status::Feasible),
        "infeasible" => Some(Status::Infeasible),
        "inconclusive" => Some(Status::Inconclusive),
        _ => None,
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.display().to_string(), source: e }
}

fn header(command: &str, seed: u64) -> String {
    format!("# iqc {command} seed={seed}\n")
}

fn write_csv(path: &Path, comment: &str, rows: Vec<Vec<String>>, columns: &[&str]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
    let mut out = comment.as_bytes().to_vec();
    out.extend(body);
    std::fs::write(path, out).map_err(io(path))
}

/// `(N, interval_lo, interval_hi)` for every certified interval.
pub fn interval_rows(report: &CertificationReport) -> Vec<(usize, f64, f64)> {
    report.orders.iter().flat_map(|o| o.intervals.iter().map(move |iv| (o.order, iv.lo, iv.hi))).collect()
}

pub fn write_intervals(path: &Path, report: &CertificationReport, command: &str, seed: u64) -> Result<(), CliError> {
    let rows = interval_rows(report).into_iter().map(|(n, lo, hi)| vec![n.to_string(), lo.to_string(), hi.to_string()]).collect();
    write_csv(path, &header(command, seed), rows, &["N", "interval_lo", "interval_hi"])
}

/// The margin column holds the certified normalized margin of feasible
/// points and the upper bound on any achievable margin otherwise.
pub fn write_verdicts(path: &Path, report: &CertificationReport, command: &str, seed: u64) -> Result<(), CliError> {
    let rows = report
        .orders
        .iter()
        .flat_map(|o| o.verdicts.iter())
        .map(|v| {
            let margin = if v.status == Status::Feasible { v.margin } else { v.margin_upper };
            vec![v.h.to_string(), v.order.to_string(), status_label(v.status).to_string(), margin.to_string()]
        })
        .collect();
    write_csv(path, &header(command, seed), rows, &["h", "N", "status", "margin"])
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>, CliError> {
    let file = std::fs::File::open(path).map_err(io(path))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T, CliError> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| CliError::Config {
        path: path.display().to_string(),
        line: line as usize,
        message: format!("bad value in column {}", i + 1),
    })
}

pub fn read_intervals(path: &Path) -> Result<Vec<(usize, f64, f64)>, CliError> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        out.push((field(&rec, 0, path)?, field(&rec, 1, path)?, field(&rec, 2, path)?));
    }
    Ok(out)
}

/// `(h, N, status, margin)` rows.
pub fn read_verdicts(path: &Path) -> Result<Vec<(f64, usize, Status, f64)>, CliError> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        let status = rec.get(2).and_then(parse_status).ok_or_else(|| CliError::Config {
            path: path.display().to_string(),
            line: rec.position().map_or(0, |p| p.line() as usize),
            message: "unknown status".into(),
        })?;
        out.push((field(&rec, 0, path)?, field(&rec, 1, path)?, status, field(&rec, 3, path)?));
    }
    Ok(out)
}

pub fn format_intervals(ivs: &[(f64, f64)]) -> String {
    if ivs.is_empty() {
        return "-".into();
    }
    ivs.iter().map(|(a, b)| format!("[{a:.3}, {b:.3}]")).collect::<Vec<_>>().join(" ")
}

/// Deterministic human-readable summary (no timings).
pub fn summary(report: &CertificationReport, seed: u64) -> String {
    let mut s = String::new();
    let g = report.grid;
    let _ = writeln!(s, "delay grid [{}, {}] step {}, seed {seed}", g.min, g.max, g.step);
    if let Some(o) = &report.oracle {
        let _ = writeln!(s, "oracle      {}", format_intervals(&o.intervals));
    }
    for o in &report.orders {
        let ivs: Vec<(f64, f64)> = o.intervals.iter().map(|i| (i.lo, i.hi)).collect();
        let _ = writeln!(s, "N = {:<2}      {}", o.order, format_intervals(&ivs));
        for iv in o.intervals.iter().filter(|i| i.isolated) {
            let _ = writeln!(s, "            isolated certified point at h = {}", iv.lo);
        }
        if !o.inconclusive.is_empty() {
            let pts: Vec<String> = o.inconclusive.iter().map(|h| format!("{h:.4}")).collect();
            let _ = writeln!(s, "            inconclusive at h = {}", pts.join(", "));
        }
    }
    if report.oracle.is_some() {
        if report.soundness.is_empty() {
            let _ = writeln!(s, "soundness   ok (no certified point has oracle abscissa > 1e-6)");
        } else {
            for v in &report.soundness {
                let _ = writeln!(s, "soundness   VIOLATED: N = {} h = {} abscissa {:.3e}", v.order, v.h, v.abscissa);
            }
        }
    }
    if report.orders.len() > 1 {
        if report.hierarchy.is_empty() {
            let _ = writeln!(s, "hierarchy   ok (certified sets grow with N)");
        } else {
            let _ = writeln!(s, "hierarchy   {} grid points lost when raising N", report.hierarchy.len());
            for v in &report.hierarchy {
                let _ = writeln!(s, "            N = {} -> {} at h = {}", v.lower, v.higher, v.h);
            }
        }
    }
    s
}

/// Used by tests: verdicts reloaded from CSV equal the report's.
pub fn same_verdicts(rows: &[(f64, usize, Status, f64)], verdicts: &[&PointVerdict]) -> bool {
    rows.len() == verdicts.len()
        && rows.iter().zip(verdicts).all(|(r, v)| {
            let m = if v.status == Status::Feasible { v.margin } else { v.margin_upper };
            r.0 == v.h && r.1 == v.order && r.2 == v.status && (r.3 == m || (r.3.is_nan() && m.is_nan()))
        })
}
