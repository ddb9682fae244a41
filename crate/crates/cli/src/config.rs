//! Run configuration: a TOML file with the delay system, the sweep, solver
//! settings and the validation seed. Unknown keys are rejected and every
//! error names the offending line.

use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use iqc_core::linalg::Mat;
use iqc_core::lmi::SolverSettings;
use iqc_core::sweep::{Grid, SweepConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub validation: ValidationSection,
}

/// `Ẋ = A X + B X(t − h)`, matrices as row-major nested arrays.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub a: Spanned<Vec<Spanned<Vec<f64>>>>,
    pub b: Spanned<Vec<Spanned<Vec<f64>>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_orders")]
    pub orders: Spanned<Vec<usize>>,
    #[serde(default = "default_grid")]
    pub grid: Spanned<GridSection>,
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default = "yes")]
    pub oracle: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { orders: default_orders(), grid: default_grid(), refine: true, oracle: true }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_eps")]
    pub eps: Spanned<f64>,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { eps: default_eps(), max_iterations: default_iterations(), tolerance: default_tolerance() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for ValidationSection {
    fn default() -> Self {
        Self { seed: default_seed() }
    }
}

fn default_orders() -> Spanned<Vec<usize>> {
    Spanned::new(0..0, vec![0, 2, 5, 7])
}

fn default_grid() -> Spanned<GridSection> {
    Spanned::new(0..0, GridSection { min: 0.001, max: 3.6, step: 0.005 })
}

fn default_eps() -> Spanned<f64> {
    Spanned::new(0..0, iqc_core::lmi::DEFAULT_EPS)
}

fn default_iterations() -> usize {
    SolverSettings::default().max_iterations
}

fn default_tolerance() -> f64 {
    SolverSettings::default().tolerance
}

fn default_seed() -> u64 {
    42
}

fn yes() -> bool {
    true
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// A parsed configuration together with its source text for error anchoring.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: Config,
    pub source: String,
    pub path: String,
}

impl LoadedConfig {
    fn err<T>(&self, span: std::ops::Range<usize>, message: impl Into<String>) -> Result<T, CliError> {
        Err(CliError::Config { path: self.path.clone(), line: line_of(&self.source, span.start), message: message.into() })
    }

    fn matrix(&self, m: &Spanned<Vec<Spanned<Vec<f64>>>>, name: &str) -> Result<Mat, CliError> {
        let rows = m.get_ref();
        let n = rows.len();
        if n == 0 {
            return self.err(m.span(), format!("system.{name} must be a nonempty square matrix"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.get_ref().len() != n {
                return self.err(r.span(), format!("system.{name} row {} has {} entries, expected {n}", i + 1, r.get_ref().len()));
            }
            if r.get_ref().iter().any(|v| !v.is_finite()) {
                return self.err(r.span(), format!("system.{name} row {} has non-finite entries", i + 1));
            }
        }
        Ok(Mat::from_fn(n, n, |i, j| rows[i].get_ref()[j]))
    }

    /// Checks value ranges and builds the sweep configuration.
    pub fn sweep_config(&self) -> Result<SweepConfig, CliError> {
        let c = &self.config;
        let a = self.matrix(&c.system.a, "a")?;
        let b = self.matrix(&c.system.b, "b")?;
        if a.shape() != b.shape() {
            return self.err(c.system.b.span(), format!("system.b is {:?} but system.a is {:?}", b.shape(), a.shape()));
        }
        if c.sweep.orders.get_ref().is_empty() {
            return self.err(c.sweep.orders.span(), "sweep.orders must not be empty");
        }
        if let Some(n) = c.sweep.orders.get_ref().iter().find(|&&n| n > iqc_core::legendre::MAX_ORDER) {
            return self.err(c.sweep.orders.span(), format!("order {n} exceeds {}", iqc_core::legendre::MAX_ORDER));
        }
        let g = c.sweep.grid.get_ref();
        let grid = match Grid::new(g.min, g.max, g.step) {
            Ok(grid) => grid,
            Err(e) => return self.err(c.sweep.grid.span(), format!("sweep.grid: {e}")),
        };
        let eps = *c.solver.eps.get_ref();
        if !(eps > 0.0 && eps.is_finite()) {
            return self.err(c.solver.eps.span(), format!("solver.eps must be positive, got {eps}"));
        }
        Ok(SweepConfig {
            a,
            b,
            orders: c.sweep.orders.get_ref().clone(),
            grid,
            eps,
            refine: c.sweep.refine,
            oracle: c.sweep.oracle,
            settings: SolverSettings {
                max_iterations: c.solver.max_iterations,
                tolerance: c.solver.tolerance,
                ..SolverSettings::default()
            },
        })
    }
}

pub fn parse(source: &str, path: &str) -> Result<LoadedConfig, CliError> {
    match toml::from_str::<Config>(source) {
        Ok(config) => {
            let loaded = LoadedConfig { config, source: source.to_string(), path: path.to_string() };
            loaded.sweep_config()?;
            Ok(loaded)
        }
        Err(e) => {
            let line = e.span().map_or(1, |s| line_of(source, s.start));
            Err(CliError::Config { path: path.to_string(), line, message: e.message().to_string() })
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let source = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    parse(&source, &path.display().to_string())
}

/// The bundled chatter benchmark configuration.
pub const CHATTER: &str = include_str!("../configs/chatter.toml");

pub fn chatter() -> LoadedConfig {
    parse(CHATTER, "configs/chatter.toml").expect("bundled config is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_matches_the_benchmark() {
        let cfg = chatter().sweep_config().unwrap();
        let (a, b) = iqc_core::model::chatter(2.0);
        assert_eq!(cfg.a, a);
        assert_eq!(cfg.b, b);
        assert_eq!(cfg.orders, vec![0, 2, 5, 7]);
        assert_eq!(cfg.grid, Grid { min: 0.001, max: 3.6, step: 0.005 });
    }

    #[test]
    fn unknown_field_is_named_with_its_line() {
        let text = CHATTER.replace("refine = true", "refine = true\nfrobnicate = 3");
        let err = parse(&text, "x.toml").unwrap_err();
        let line = text.lines().position(|l| l.starts_with("frobnicate")).unwrap() + 1;
        match err {
            CliError::Config { line: got, message, .. } => {
                assert_eq!(got, line);
                assert!(message.contains("frobnicate"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonpositive_step_is_rejected_at_the_grid_line() {
        let text = CHATTER.replace("step = 0.005", "step = 0.0");
        let line = text.lines().position(|l| l.starts_with("grid")).unwrap() + 1;
        match parse(&text, "x.toml").unwrap_err() {
            CliError::Config { line: got, message, .. } => {
                assert_eq!(got, line);
                assert!(message.contains("step"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let text = CHATTER.replace("[0.0, 0.0, 1.0, 0.0],", "[0.0, 1.0, 0.0],");
        assert!(matches!(parse(&text, "x.toml"), Err(CliError::Config { line: 5, .. })));
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let text = "[system]\na = [[-1.0]]\nb = [[0.5]]\n";
        let cfg = parse(text, "x.toml").unwrap().sweep_config().unwrap();
        assert_eq!(cfg.orders, vec![0, 2, 5, 7]);
        assert_eq!(cfg.eps, 1e-6);
    }
}
