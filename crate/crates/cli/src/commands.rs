//! Subcommand implementations. Each returns its report text and the list of
//! failed checks; the binary maps a nonempty list to exit status 1.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use iqc_core::lmi::{build_problem, k_circ, sdpa};
use iqc_core::sweep::{interval_deviation, reference, run_sweep, CertificationReport, Grid, SweepConfig};
use iqc_core::validate::{self, SuiteReport};

use crate::config::{self, LoadedConfig};
use crate::error::CliError;
use crate::output;

/// Command-line overrides of the configured sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub orders: Option<Vec<usize>>,
    pub grid: Option<Grid>,
    pub eps: Option<f64>,
    pub no_oracle: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut SweepConfig) {
        if let Some(o) = &self.orders {
            cfg.orders = o.clone();
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(e) = self.eps {
            cfg.eps = e;
        }
        if self.no_oracle {
            cfg.oracle = false;
        }
    }
}

pub fn parse_orders(s: &str) -> Result<Vec<usize>, CliError> {
    let orders = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("--orders: `{t}` is not an order"))))
        .collect::<Result<Vec<_>, _>>()?;
    if orders.is_empty() {
        return Err(CliError::Usage("--orders needs at least one order".into()));
    }
    Ok(orders)
}

pub fn parse_grid(s: &str) -> Result<Grid, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>();
    match (parts.len(), nums) {
        (3, Ok(v)) => Grid::new(v[0], v[1], v[2]).map_err(|e| CliError::Usage(format!("--grid: {e}"))),
        _ => Err(CliError::Usage(format!("--grid expects MIN:MAX:STEP, got `{s}`"))),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<String>,
    pub out: Option<String>,
    pub seed: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<&str>, out: Option<&Path>, seed: u64) -> Self {
        Self {
            command: command.into(),
            config: config.map(str::to_string),
            out: out.map(|p| p.display().to_string()),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Failed(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), source: e })
}

#[derive(Debug, Clone)]
pub struct CertifyOutcome {
    pub report: CertificationReport,
    pub text: String,
    pub failures: Vec<String>,
}

fn soundness_failures(report: &CertificationReport) -> Vec<String> {
    report
        .soundness
        .iter()
        .map(|v| format!("N = {} certified h = {} but the oracle abscissa is {:.3e}", v.order, v.h, v.abscissa))
        .collect()
}

/// Runs the sweep and writes `intervals.csv`, `verdicts.csv`, `summary.txt`
/// and `manifest.json` into `out`.
pub fn cmd_certify(loaded: &LoadedConfig, overrides: &Overrides, out: &Path, seed: u64) -> Result<CertifyOutcome, CliError> {
    let mut cfg = loaded.sweep_config()?;
    overrides.apply(&mut cfg);
    let report = run_sweep(&cfg)?;
    ensure_dir(out)?;
    output::write_intervals(&out.join("intervals.csv"), &report, "certify", seed)?;
    output::write_verdicts(&out.join("verdicts.csv"), &report, "certify", seed)?;
    let text = output::summary(&report, seed);
    let summary_path = out.join("summary.txt");
    std::fs::write(&summary_path, &text).map_err(|e| CliError::Io { path: summary_path.display().to_string(), source: e })?;
    RunManifest::new("certify", Some(&loaded.path), Some(out), seed).write(out)?;
    let failures = soundness_failures(&report);
    Ok(CertifyOutcome { report, text, failures })
}

/// One row of the Table 1 comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub label: String,
    pub order: Option<usize>,
    pub computed: Vec<(f64, f64)>,
    pub published: Vec<(f64, f64)>,
    /// Largest endpoint deviation; `None` when the interval counts differ.
    pub deviation: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Table1Outcome {
    pub report: CertificationReport,
    pub rows: Vec<RowCheck>,
    pub text: String,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

fn check(label: String, order: Option<usize>, computed: Vec<(f64, f64)>, published: &[(f64, f64)], tol: f64) -> RowCheck {
    let deviation = interval_deviation(&computed, published);
    let pass = deviation.is_some_and(|d| d <= tol);
    RowCheck { label, order, computed, published: published.to_vec(), deviation, tol, pass }
}

/// Chatter benchmark (k = 2) side by side with the published table.
pub fn cmd_table1(overrides: &Overrides, out: Option<&Path>) -> Result<Table1Outcome, CliError> {
    let start = Instant::now();
    let mut cfg = config::chatter().sweep_config()?;
    overrides.apply(&mut cfg);
    let report = run_sweep(&cfg)?;

    let mut rows = Vec::new();
    if let Some(o) = &report.oracle {
        rows.push(check("exact (oracle)".into(), None, o.intervals.clone(), &reference::EXACT, reference::ORACLE_TOL));
    }
    for o in &report.orders {
        let computed = o.intervals.iter().map(|i| (i.lo, i.hi)).collect();
        let published = reference::CERTIFIED.iter().find(|(n, _)| *n == o.order).map(|(_, p)| *p);
        match published {
            Some(p) => rows.push(check(format!("N = {}", o.order), Some(o.order), computed, p, reference::ORDER_TOL)),
            None => rows.push(RowCheck {
                label: format!("N = {}", o.order),
                order: Some(o.order),
                computed,
                published: Vec::new(),
                deviation: None,
                tol: reference::ORDER_TOL,
                pass: true,
            }),
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "Stable delays h = 1/ρ for the chatter benchmark, k = 2 (grid step {})", cfg.grid.step);
    let _ = writeln!(text, "{:<16} {:<46} {:<40} {:>9}  {}", "row", "computed", "published", "max dev", "check");
    for r in &rows {
        let dev = r.deviation.map_or("count".to_string(), |d| format!("{d:.4}"));
        let verdict = if r.published.is_empty() {
            "n/a"
        } else if r.pass {
            "ok"
        } else {
            "FAIL"
        };
        let published = if r.published.is_empty() { "(not published)".into() } else { output::format_intervals(&r.published) };
        let _ = writeln!(
            text,
            "{:<16} {:<46} {:<40} {:>9}  {verdict} (±{})",
            r.label,
            output::format_intervals(&r.computed),
            published,
            dev,
            r.tol
        );
    }
    let _ = writeln!(text, "quoted, not recomputed:");
    for (name, iv) in reference::QUOTED {
        let _ = writeln!(text, "  {name:<18} {}", output::format_intervals(&[iv]));
    }
    let _ = writeln!(text, "  delay-independent k_max {} (procedure unspecified)", reference::K_MAX_QUOTED);
    for line in output::summary(&report, 0).lines() {
        if line.starts_with("soundness") || line.starts_with("hierarchy") {
            let _ = writeln!(text, "{line}");
        }
    }

    let mut failures: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| match r.deviation {
            Some(d) => format!("{}: deviation {d:.4} exceeds ±{}", r.label, r.tol),
            None => format!("{}: {} intervals, published {}", r.label, r.computed.len(), r.published.len()),
        })
        .collect();
    failures.extend(soundness_failures(&report));

    if let Some(dir) = out {
        ensure_dir(dir)?;
        output::write_intervals(&dir.join("intervals.csv"), &report, "table1", 0)?;
        output::write_verdicts(&dir.join("verdicts.csv"), &report, "table1", 0)?;
        let path = dir.join("table1.txt");
        std::fs::write(&path, &text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        RunManifest::new("table1", None, Some(dir), 0).write(dir)?;
    }
    Ok(Table1Outcome { report, rows, text, failures, elapsed: start.elapsed() })
}

#[derive(Debug, Clone)]
pub struct ValidateOutcome {
    pub suites: Vec<SuiteReport>,
    pub text: String,
    pub failures: Vec<String>,
}

pub fn cmd_validate(seed: u64, out: Option<&Path>) -> Result<ValidateOutcome, CliError> {
    let suites = validate::run_all(seed)?;
    let mut text = String::new();
    let _ = writeln!(text, "validation suites, seed {seed}");
    let mut failures = Vec::new();
    for s in &suites {
        let _ = writeln!(
            text,
            "{:<18} {:>4} cases  {:>4} failed  worst {:>11.3e}  {}",
            s.name,
            s.cases,
            s.failures.len(),
            s.worst,
            if s.passed() { "PASS" } else { "FAIL" }
        );
        failures.extend(s.failures.iter().map(|f| format!("{}: {f}", s.name)));
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join("validation.txt");
        std::fs::write(&path, &text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        RunManifest::new("validate", None, Some(dir), seed).write(dir)?;
    }
    Ok(ValidateOutcome { suites, text, failures })
}

/// Exact stable intervals of the configured delay system.
pub fn cmd_oracle(loaded: &LoadedConfig, overrides: &Overrides, out: Option<&Path>) -> Result<(Vec<(f64, f64)>, String), CliError> {
    let mut cfg = loaded.sweep_config()?;
    overrides.apply(&mut cfg);
    let g = cfg.grid;
    let intervals = iqc_core::oracle::stable_intervals(&cfg.a, &cfg.b, g.min, g.max, g.step, 1e-4)?;
    let text = format!("stable delay intervals on [{}, {}]: {}\n", g.min, g.max, output::format_intervals(&intervals));
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join("oracle_intervals.csv");
        let mut body = "# iqc oracle seed=0\ninterval_lo,interval_hi\n".to_string();
        for (lo, hi) in &intervals {
            let _ = writeln!(body, "{lo},{hi}");
        }
        std::fs::write(&path, body).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        RunManifest::new("oracle", Some(&loaded.path), Some(dir), 0).write(dir)?;
    }
    Ok((intervals, text))
}

/// Writes the LMI problem at order `order` and delay `h` in SDPA format.
pub fn cmd_sdpa(loaded: &LoadedConfig, order: usize, h: f64, eps: Option<f64>, out: &PathBuf) -> Result<(), CliError> {
    let cfg = loaded.sweep_config()?;
    let (plant, pde) = iqc_core::model::example_tds(&cfg.a, &cfg.b, h)?;
    let filt = iqc_core::model::build_filter(&pde, order)?;
    let sys = iqc_core::model::build_interconnection(&plant, &filt, &pde.output)?;
    let mult = iqc_core::multipliers::MultiplierSet::transport(
        order,
        pde.width,
        1.0 / h,
        iqc_core::affine::VarId(1),
        iqc_core::affine::VarId(2),
    )?;
    let kc = k_circ(&pde, &plant, filt.n_xi)?;
    let problem = build_problem(&sys, &mult, &kc, eps.unwrap_or(cfg.eps))?;
    let mut file = std::fs::File::create(out).map_err(|e| CliError::Io { path: out.display().to_string(), source: e })?;
    sdpa::write_sdpa(&problem, &mut file).map_err(|e| CliError::Io { path: out.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_parsing() {
        assert_eq!(parse_orders("0, 2,7").unwrap(), vec![0, 2, 7]);
        assert!(parse_orders("1,x").is_err());
        assert_eq!(parse_grid("0.1:1:0.05").unwrap(), Grid { min: 0.1, max: 1.0, step: 0.05 });
        assert!(matches!(parse_grid("0.1:1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("0.1:1:0"), Err(CliError::Usage(_))));
    }

    #[test]
    fn overrides_replace_config_values() {
        let mut cfg = config::chatter().sweep_config().unwrap();
        Overrides { orders: Some(vec![3]), grid: None, eps: Some(1e-5), no_oracle: true }.apply(&mut cfg);
        assert_eq!(cfg.orders, vec![3]);
        assert_eq!(cfg.eps, 1e-5);
        assert!(!cfg.oracle);
    }
}
