//! Delay sweeps for `Ẋ = A X + B X(t − h)`: certify each grid point at each
//! projection order, extract certified intervals, and compare with the
//! spectral oracle.

use std::time::{Duration, Instant};

use crate::affine::VarId;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::lmi::{self, build_problem, k_circ, FeasibilityVerdict, SolverSettings, Status};
use crate::model::{build_filter, build_interconnection, example_tds};
use crate::multipliers::MultiplierSet;
use crate::oracle;

/// Oracle abscissa above which a certified point counts as unsound.
pub const SOUNDNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("grid step must be positive, got {step}")));
        }
        if !(min > 0.0 && max >= min && max.is_finite()) {
            return Err(Error::Domain(format!("grid bounds must satisfy 0 < min ≤ max, got [{min}, {max}]")));
        }
        Ok(Self { min, max, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub a: Mat,
    pub b: Mat,
    pub orders: Vec<usize>,
    pub grid: Grid,
    pub eps: f64,
    /// Bisect interval endpoints down to `step / 10`.
    pub refine: bool,
    pub oracle: bool,
    pub settings: SolverSettings,
}

impl SweepConfig {
    /// Chatter benchmark with gain `k` on `[0.001, 3.6]`, step 0.005.
    pub fn chatter(k: f64, orders: Vec<usize>) -> Self {
        let (a, b) = crate::model::chatter(k);
        Self {
            a,
            b,
            orders,
            grid: Grid { min: 0.001, max: 3.6, step: 0.005 },
            eps: lmi::DEFAULT_EPS,
            refine: true,
            oracle: true,
            settings: SolverSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::Domain("no projection orders requested".into()));
        }
        if let Some(&n) = self.orders.iter().find(|&&n| n > crate::legendre::MAX_ORDER) {
            return Err(Error::Domain(format!("order {n} exceeds the supported maximum {}", crate::legendre::MAX_ORDER)));
        }
        Grid::new(self.grid.min, self.grid.max, self.grid.step)?;
        if !(self.eps > 0.0) {
            return Err(Error::Domain(format!("margin must be positive, got {}", self.eps)));
        }
        if !self.a.is_square() || self.a.shape() != self.b.shape() {
            return Err(Error::Dimension(format!("A {:?} and B {:?}", self.a.shape(), self.b.shape())));
        }
        Ok(())
    }
}

/// Assembles and solves the stability LMIs at projection order `order` and delay `h`.
pub fn certify_point(cfg: &SweepConfig, order: usize, h: f64) -> Result<FeasibilityVerdict> {
    let (plant, pde) = example_tds(&cfg.a, &cfg.b, h)?;
    let filt = build_filter(&pde, order)?;
    let sys = build_interconnection(&plant, &filt, &pde.output)?;
    let mult = MultiplierSet::transport(order, pde.width, 1.0 / h, VarId(1), VarId(2))?;
    let kc = k_circ(&pde, &plant, filt.n_xi)?;
    let problem = build_problem(&sys, &mult, &kc, cfg.eps)?;
    Ok(lmi::solve_with(&problem, &cfg.settings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointVerdict {
    pub h: f64,
    pub order: usize,
    pub status: Status,
    /// Certified normalized margin (negative infinity when none).
    pub margin: f64,
    /// Upper bound on the achievable normalized margin (infinity when none).
    pub margin_upper: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// A single feasible grid point with infeasible neighbours.
    pub isolated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub order: usize,
    pub intervals: Vec<Interval>,
    pub verdicts: Vec<PointVerdict>,
    /// Certified points found while refining endpoints.
    pub refined_points: Vec<f64>,
    pub inconclusive: Vec<f64>,
    pub elapsed: Duration,
}

impl OrderReport {
    pub fn certified_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.verdicts.iter().filter(|v| v.status == Status::Feasible).map(|v| v.h).chain(self.refined_points.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub intervals: Vec<(f64, f64)>,
    /// Abscissa at each grid point.
    pub abscissa: Vec<(f64, f64)>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoundnessViolation {
    pub order: usize,
    pub h: f64,
    pub abscissa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyViolation {
    pub lower: usize,
    pub higher: usize,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub grid: Grid,
    pub orders: Vec<OrderReport>,
    pub oracle: Option<OracleReport>,
    pub soundness: Vec<SoundnessViolation>,
    /// Grid points certified at a lower order but not at the next requested one.
    pub hierarchy: Vec<HierarchyViolation>,
    pub elapsed: Duration,
}

impl CertificationReport {
    pub fn order(&self, n: usize) -> Option<&OrderReport> {
        self.orders.iter().find(|o| o.order == n)
    }
}

fn map_points<T: Send, F: Fn(f64) -> T + Sync>(points: &[f64], f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(|&h| f(h)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(|&h| f(h)).collect()
    }
}

fn sweep_order(cfg: &SweepConfig, order: usize, points: &[f64]) -> Result<OrderReport> {
    let start = Instant::now();
    let verdicts = map_points(points, |h| {
        certify_point(cfg, order, h).map(|v| PointVerdict {
            h,
            order,
            status: v.status,
            margin: v.diagnostics.margin_lower,
            margin_upper: v.diagnostics.margin_upper,
            iterations: v.diagnostics.iterations,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let feasible: Vec<bool> = verdicts.iter().map(|v| v.status == Status::Feasible).collect();
    let inconclusive = verdicts.iter().filter(|v| v.status == Status::Inconclusive).map(|v| v.h).collect();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if feasible[i] {
            let s = i;
            while i + 1 < points.len() && feasible[i + 1] {
                i += 1;
            }
            runs.push((s, i));
        }
        i += 1;
    }

    let tol = cfg.grid.step / 10.0;
    let bisect = |mut good: f64, mut bad: f64, found: &mut Vec<f64>| -> Result<f64> {
        while (good - bad).abs() > tol {
            let mid = 0.5 * (good + bad);
            if certify_point(cfg, order, mid)?.is_feasible() {
                found.push(mid);
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    };
    let edges = map_points(&(0..runs.len()).map(|r| r as f64).collect::<Vec<_>>(), |r| {
        let (s, e) = runs[r as usize];
        let mut found = Vec::new();
        let mut lo = points[s];
        let mut hi = points[e];
        if cfg.refine {
            if s > 0 {
                lo = bisect(points[s], points[s - 1], &mut found)?;
            }
            if e + 1 < points.len() {
                hi = bisect(points[e], points[e + 1], &mut found)?;
            }
        }
        Ok((Interval { lo, hi, isolated: s == e }, found))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut intervals = Vec::new();
    let mut refined_points = Vec::new();
    for (iv, found) in edges {
        intervals.push(iv);
        refined_points.extend(found);
    }
    Ok(OrderReport { order, intervals, verdicts, refined_points, inconclusive, elapsed: start.elapsed() })
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<CertificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let points = cfg.grid.points();
    let mut orders = Vec::new();
    for &n in &cfg.orders {
        orders.push(sweep_order(cfg, n, &points)?);
    }

    let mut oracle_report = None;
    let mut soundness = Vec::new();
    if cfg.oracle {
        let t = Instant::now();
        let abscissa = map_points(&points, |h| oracle::dde_abscissa(&cfg.a, &cfg.b, h).map(|s| (h, s)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let intervals = oracle::stable_intervals(&cfg.a, &cfg.b, cfg.grid.min, cfg.grid.max, cfg.grid.step, 1e-4)?;
        for o in &orders {
            for (k, v) in o.verdicts.iter().enumerate() {
                if v.status == Status::Feasible && abscissa[k].1 > SOUNDNESS_TOL {
                    soundness.push(SoundnessViolation { order: o.order, h: v.h, abscissa: abscissa[k].1 });
                }
            }
            for &h in &o.refined_points {
                let s = oracle::dde_abscissa(&cfg.a, &cfg.b, h)?;
                if s > SOUNDNESS_TOL {
                    soundness.push(SoundnessViolation { order: o.order, h, abscissa: s });
                }
            }
        }
        oracle_report = Some(OracleReport { intervals, abscissa, elapsed: t.elapsed() });
    }

    let mut sorted: Vec<&OrderReport> = orders.iter().collect();
    sorted.sort_by_key(|o| o.order);
    let mut hierarchy = Vec::new();
    for w in sorted.windows(2) {
        for (lo, hi) in w[0].verdicts.iter().zip(&w[1].verdicts) {
            if lo.status == Status::Feasible && hi.status != Status::Feasible {
                hierarchy.push(HierarchyViolation { lower: w[0].order, higher: w[1].order, h: lo.h });
            }
        }
    }

    Ok(CertificationReport { grid: cfg.grid, orders, oracle: oracle_report, soundness, hierarchy, elapsed: start.elapsed() })
}

/// Published reference values for the chatter benchmark with `k = 2`.
pub mod reference {
    /// Exact stable intervals as published.
    pub const EXACT: [(f64, f64); 3] = [(0.0, 0.859), (1.117, 1.264), (2.75, 3.5)];
    /// Certified intervals per projection order as published.
    pub const CERTIFIED: [(usize, &[(f64, f64)]); 4] = [
        (0, &[(0.0, 0.062)]),
        (2, &[(0.0, 0.854)]),
        (5, &[(0.0, 0.859), (1.123, 1.264)]),
        (7, &[(0.0, 0.859), (1.117, 1.264), (2.83, 3.36)]),
    ];
    /// Other IQC formulations, quoted rather than recomputed.
    pub const QUOTED: [(&str, (f64, f64)); 2] = [("Megretski (1997)", (0.0, 0.062)), ("Veenman (2016)", (0.0, 0.060))];
    /// Largest delay-independent gain reported for the projection method; quoted.
    pub const K_MAX_QUOTED: f64 = 0.299;
    pub const ORDER_TOL: f64 = 0.01;
    pub const ORACLE_TOL: f64 = 0.005;
}

/// Compares computed intervals with reference ones endpoint by endpoint.
/// Returns the largest endpoint deviation, or `None` if the counts differ.
pub fn interval_deviation(computed: &[(f64, f64)], reference: &[(f64, f64)]) -> Option<f64> {
    if computed.len() != reference.len() {
        return None;
    }
    Some(
        computed
            .iter()
            .zip(reference)
            .map(|(c, r)| (c.0 - r.0).abs().max((c.1 - r.1).abs()))
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_cover_bounds() {
        let g = Grid::new(0.001, 0.021, 0.005).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 5);
        assert!((p[4] - 0.021).abs() < 1e-12);
        assert!(Grid::new(0.1, 0.2, 0.0).is_err());
        assert!(Grid::new(0.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn chatter_points() {
        let cfg = SweepConfig::chatter(2.0, vec![2, 5]);
        assert!(certify_point(&cfg, 2, 0.5).unwrap().is_feasible());
        assert!(!certify_point(&cfg, 2, 1.2).unwrap().is_feasible());
        assert!(certify_point(&cfg, 5, 1.2).unwrap().is_feasible());
    }

    #[test]
    fn deviation() {
        assert_eq!(interval_deviation(&[(0.0, 1.0)], &[(0.0, 1.0), (2.0, 3.0)]), None);
        let d = interval_deviation(&[(0.001, 0.86)], &[(0.0, 0.859)]).unwrap();
        assert!((d - 0.001).abs() < 1e-12);
    }
}
