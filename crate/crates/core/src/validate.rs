//! Randomized numerical checks of the multipliers and the projection filter
//! against exact transport solutions and manufactured PDE states.
//!
//! The transport state with zero initial condition and inflow `y` is
//! `z(x, t) = y(t − x/ρ)` for `x ≤ ρt` and `0` beyond the wavefront.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::{Assignment, VarId};
use crate::error::Result;
use crate::legendre::{self, gauss_legendre};
use crate::linalg::{Mat, SymMat, Vector};
use crate::model::{build_filter, PdeSpec};
use crate::multipliers::{iqc_residual, transport_m1, transport_m2};

const QUAD_NODES: usize = 64;

fn quadrature() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(QUAD_NODES))
}

/// `y(t) = Σ_j a_j sin(ω_j t)` for `t ≥ 0`, zero before.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSignal {
    pub terms: Vec<(f64, Vector)>,
}

impl FourierSignal {
    pub fn random(rng: &mut impl Rng, width: usize, harmonics: usize) -> Self {
        let terms = (0..harmonics)
            .map(|_| (rng.gen_range(0.5..5.0), Vector::from_fn(width, |_, _| rng.gen_range(-1.0..1.0))))
            .collect();
        Self { terms }
    }

    pub fn width(&self) -> usize {
        self.terms.first().map_or(0, |t| t.1.len())
    }

    pub fn value(&self, t: f64) -> Vector {
        let mut v = Vector::zeros(self.width());
        if t > 0.0 {
            for (w, a) in &self.terms {
                v += a * (w * t).sin();
            }
        }
        v
    }
}

/// Legendre projections `Ω_k(t) = ∫₀¹ z(x, t) 𝓛_k(x) dx`, k ≤ order, of the
/// exact transport state; the quadrature stops at the wavefront.
pub fn transport_projections(y: &FourierSignal, rho: f64, t: f64, order: usize) -> Vec<Vector> {
    let (nodes, weights) = quadrature();
    let front = (rho * t).min(1.0);
    let mut out = vec![Vector::zeros(y.width()); order + 1];
    if front <= 0.0 {
        return out;
    }
    for (x0, w0) in nodes.iter().zip(weights) {
        let x = x0 * front;
        let z = y.value(t - x / rho);
        let lk = legendre::eval_all(order, x).expect("node in [0, 1]");
        for (o, v) in out.iter_mut().zip(lk) {
            *o += &z * (w0 * front * v);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
    /// Worst normalized slack or error observed (meaning depends on the suite).
    pub worst: f64,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_spd(rng: &mut impl Rng, dim: usize) -> SymMat {
    let g = Mat::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    SymMat::from_mat(&g * g.transpose() + Mat::identity(dim, dim) * 0.1)
}

fn stack(parts: &[Vector]) -> Vector {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut v = Vector::zeros(n);
    let mut off = 0;
    for p in parts {
        v.rows_mut(off, p.len()).copy_from(p);
        off += p.len();
    }
    v
}

struct TransportCase {
    y: FourierSignal,
    rho: f64,
    order: usize,
    horizon: f64,
    dt: f64,
    /// Rows `col(z(0,t), z(1,t), Ω_0(t), …, Ω_N(t))` on the sample grid.
    psi: Mat,
    energy: f64,
}

fn transport_case(rng: &mut impl Rng) -> TransportCase {
    let width = rng.gen_range(1..=2);
    let y = FourierSignal::random(rng, width, 5);
    let rho = rng.gen_range(0.2..5.0);
    let order = rng.gen_range(0..=5);
    let horizon = rng.gen_range(0.5..3.0) / rho;
    let samples = 4000;
    let dt = horizon / samples as f64;
    let cols = (order + 3) * width;
    let mut psi = Mat::zeros(samples + 1, cols);
    let mut energy = 0.0;
    for i in 0..=samples {
        let t = i as f64 * dt;
        let z0 = y.value(t);
        let z1 = y.value(t - 1.0 / rho);
        let w = if i == 0 || i == samples { 0.5 } else { 1.0 };
        energy += w * dt * z0.norm_squared();
        let mut parts = vec![z0, z1];
        parts.extend(transport_projections(&y, rho, t, order));
        psi.row_mut(i).copy_from(&stack(&parts).transpose());
    }
    TransportCase { y, rho, order, horizon, dt, psi, energy }
}

fn assignment(s: SymMat, r: SymMat) -> Assignment {
    let mut a = Assignment::default();
    a.insert(VarId(1), s);
    a.insert(VarId(2), r);
    a
}

/// Residual of the energy-balance multiplier with its terminal cost on
/// random transport trajectories; must be nonnegative up to `tol·energy`.
pub fn lemma1_suite(seed: u64, cases: usize, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for case in 0..cases {
        let c = transport_case(&mut rng);
        let l = c.y.width();
        let s = random_spd(&mut rng, l);
        let (m, z) = transport_m1(c.order, l, c.rho, VarId(1))?;
        let a = assignment(s.clone(), SymMat::zeros(l));
        let xi_end = stack(&transport_projections(&c.y, c.rho, c.horizon, c.order));
        let r = iqc_residual(&m.eval(&a)?, &z.eval(&a)?, &c.psi, &xi_end, c.dt)?;
        let scale = c.energy * c.rho * crate::linalg::sym_eigenvalues(&s)?.last().copied().unwrap_or(1.0);
        let normalized = r / scale.max(f64::MIN_POSITIVE);
        worst = worst.min(normalized);
        if normalized < -tol {
            failures.push(format!("case {case}: ρ={:.3} N={} residual {r:.3e}, energy {scale:.3e}", c.rho, c.order));
        }
    }
    Ok(SuiteReport { name: "lemma1".into(), cases, failures, worst, elapsed: start.elapsed() })
}

/// Residual of the input-to-state multiplier (zero terminal cost), plus
/// additivity of the residual in the multiplier.
pub fn lemma2_suite(seed: u64, cases: usize, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for case in 0..cases {
        let c = transport_case(&mut rng);
        let l = c.y.width();
        let r_var = random_spd(&mut rng, l);
        let s_var = random_spd(&mut rng, l);
        let m2 = transport_m2(c.order, l, VarId(2))?;
        let (m1, z1) = transport_m1(c.order, l, c.rho, VarId(1))?;
        let a = assignment(s_var, r_var.clone());
        let n_xi = (c.order + 1) * l;
        let zero = Vector::zeros(n_xi);
        let r2 = iqc_residual(&m2.eval(&a)?, &SymMat::zeros(n_xi), &c.psi, &zero, c.dt)?;
        let scale = c.energy * crate::linalg::sym_eigenvalues(&r_var)?.last().copied().unwrap_or(1.0);
        let normalized = r2 / scale.max(f64::MIN_POSITIVE);
        worst = worst.min(normalized);
        if normalized < -tol {
            failures.push(format!("case {case}: ρ={:.3} N={} residual {r2:.3e}, energy {scale:.3e}", c.rho, c.order));
        }

        let xi_end = stack(&transport_projections(&c.y, c.rho, c.horizon, c.order));
        let r1 = iqc_residual(&m1.eval(&a)?, &z1.eval(&a)?, &c.psi, &xi_end, c.dt)?;
        let both = iqc_residual(&m1.add(&m2)?.eval(&a)?, &z1.eval(&a)?, &c.psi, &xi_end, c.dt)?;
        if (both - r1 - r2).abs() > 1e-9 * (1.0 + r1.abs() + r2.abs()) {
            failures.push(format!("case {case}: residual not additive ({both:.6e} vs {:.6e})", r1 + r2));
        }
    }
    Ok(SuiteReport { name: "lemma2".into(), cases, failures, worst, elapsed: start.elapsed() })
}

/// `∫ zᵀRz ≥ Σ_{k≤N} (2k+1) Ω_kᵀ R Ω_k` for random polynomial `z`, with
/// equality once `N` reaches the degree.
pub fn bessel_suite(seed: u64, cases: usize, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nodes, weights) = quadrature();
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for case in 0..cases {
        let l = rng.gen_range(1..=3);
        let degree = rng.gen_range(0..=10);
        let coeffs: Vec<Vector> = (0..=degree).map(|_| Vector::from_fn(l, |_, _| rng.gen_range(-1.0..1.0))).collect();
        let r = random_spd(&mut rng, l);
        let z = |x: f64| coeffs.iter().rev().fold(Vector::zeros(l), |acc, c| acc * x + c);
        let mut energy = 0.0;
        let mut omega = vec![Vector::zeros(l); 9];
        for (x, w) in nodes.iter().zip(weights) {
            let zx = z(*x);
            energy += w * r.quad(&zx);
            for (k, o) in omega.iter_mut().enumerate() {
                *o += &zx * (w * legendre::eval(k, *x)?);
            }
        }
        let mut partial = 0.0;
        for (n, o) in omega.iter().enumerate() {
            partial += (2 * n + 1) as f64 * r.quad(o);
            let slack = energy - partial;
            worst = worst.min(slack);
            if slack < -tol {
                failures.push(format!("case {case}: degree {degree}, N={n}, slack {slack:.3e}"));
            }
            if degree <= n && slack.abs() > tol {
                failures.push(format!("case {case}: degree {degree} ≤ N={n} but slack {slack:.3e}"));
            }
        }
    }
    Ok(SuiteReport { name: "bessel".into(), cases, failures, worst, elapsed: start.elapsed() })
}

/// Integrates the transport filter with RK4 from rest and compares `ξ_N(T)`
/// with direct quadrature of the exact state. `worst` is the largest
/// relative error.
pub fn transport_filter_suite(seed: u64, cases: usize, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let l = rng.gen_range(1..=2);
        let y = FourierSignal::random(&mut rng, l, 5);
        let rho = rng.gen_range(0.2..5.0);
        let order = case % 8;
        let filt = build_filter(&PdeSpec::transport(l, rho)?, order)?;
        let (a, b) = (filt.a_psi().clone(), filt.b_trace());
        // steps aligned with the wavefront arrival at x = 1
        let per_transit = 2000;
        let dt = 1.0 / rho / per_transit as f64;
        let steps = per_transit + rng.gen_range(0..2 * per_transit);
        let trace = |t: f64| stack(&[y.value(t), y.value(t - 1.0 / rho)]);
        let f = |t: f64, x: &Vector| &a * x + &b * trace(t);
        let mut x = Vector::zeros(filt.n_xi);
        for i in 0..steps {
            let t = i as f64 * dt;
            let k1 = f(t, &x);
            let k2 = f(t + dt / 2.0, &(&x + &k1 * (dt / 2.0)));
            let k3 = f(t + dt / 2.0, &(&x + &k2 * (dt / 2.0)));
            let k4 = f(t + dt, &(&x + &k3 * dt));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        let horizon = steps as f64 * dt;
        let want = stack(&transport_projections(&y, rho, horizon, order));
        let err = (&x - &want).norm() / want.norm().max(1e-12);
        worst = worst.max(err);
        if err > tol {
            failures.push(format!("case {case}: ρ={rho:.3} N={order} relative error {err:.3e}"));
        }
    }
    Ok(SuiteReport { name: "transport-filter".into(), cases, failures, worst, elapsed: start.elapsed() })
}

/// Power-basis coefficients of `Σ_j a_j 𝓛_j` for one channel.
fn legendre_to_power(a: &[f64]) -> Result<Vec<f64>> {
    let mut p = vec![0.0; a.len()];
    for (j, aj) in a.iter().enumerate() {
        for (i, c) in legendre::coefficients(j)?.iter().enumerate() {
            p[i] += aj * c;
        }
    }
    Ok(p)
}

fn poly(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
}

/// For second-order PDE specs and cubic states `z = Σ_{j≤3} a_j(t) 𝓛_j`,
/// the filter right-hand side `A_Ψ Ω + B_𝓑 𝓑_2(z)` must equal
/// `∫ (F_0 z + F_1 z_x + F_2 z_xx) 𝓛_k dx`. `worst` is the largest error
/// relative to the magnitude of the exact derivative.
pub fn heat_filter_suite(seed: u64, cases: usize, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nodes, weights) = quadrature();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let l = rng.gen_range(1..=2);
        let spec = if case % 2 == 0 {
            let plant = crate::model::LtiSystem::new(
                Mat::identity(l, l) * -1.0,
                Mat::identity(l, l),
                Mat::identity(l, l),
                Mat::zeros(l, l),
            )?;
            crate::model::example_heat(&plant, rng.gen_range(0.1..3.0))?
        } else {
            let rand = |rng: &mut ChaCha8Rng| Mat::from_fn(l, l, |_, _| rng.gen_range(-1.0..1.0));
            let mut base = crate::model::example_heat(
                &crate::model::LtiSystem::new(-Mat::identity(l, l), Mat::identity(l, l), Mat::identity(l, l), Mat::zeros(l, l))?,
                1.0,
            )?;
            base.coeffs = vec![rand(&mut rng), rand(&mut rng), rand(&mut rng) + Mat::identity(l, l) * 2.0];
            base
        };
        let order = rng.gen_range(0..=7);
        let filt = build_filter(&spec, order)?;
        // time-varying Legendre coefficients, sampled at a random instant
        let t = rng.gen_range(0.0..2.0);
        let amps: Vec<(f64, f64, f64)> =
            (0..4 * l).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..3.0))).collect();
        let coeff = |j: usize, d: usize| {
            let (c, s, w) = amps[j * l + d];
            c * (w * t).cos() + s * (w * t).sin()
        };
        let power: Vec<Vec<f64>> =
            (0..l).map(|d| legendre_to_power(&(0..4).map(|j| coeff(j, d)).collect::<Vec<_>>())).collect::<Result<_>>()?;
        let d1: Vec<Vec<f64>> = power.iter().map(|p| poly_deriv(p)).collect();
        let d2: Vec<Vec<f64>> = d1.iter().map(|p| poly_deriv(p)).collect();
        let eval = |ps: &[Vec<f64>], x: f64| Vector::from_fn(l, |d, _| poly(&ps[d], x));

        let mut omega = Vector::zeros(filt.n_xi);
        for k in 0..=order.min(3) {
            for d in 0..l {
                omega[k * l + d] = coeff(k, d) * legendre::norm_sq(k);
            }
        }
        let trace = stack(&[eval(&power, 0.0), eval(&power, 1.0), eval(&d1, 0.0), eval(&d1, 1.0)]);
        let got = filt.a_psi() * &omega + filt.b_trace() * trace;

        let mut want = Vector::zeros(filt.n_xi);
        for (x, w) in nodes.iter().zip(weights) {
            let rhs = &spec.coeffs[0] * eval(&power, *x) + &spec.coeffs[1] * eval(&d1, *x) + &spec.coeffs[2] * eval(&d2, *x);
            for k in 0..=order {
                let lk = legendre::eval(k, *x)?;
                for d in 0..l {
                    want[k * l + d] += w * lk * rhs[d];
                }
            }
        }
        let err = (&got - &want).amax() / want.amax().max(1.0);
        worst = worst.max(err);
        if err > tol {
            failures.push(format!("case {case}: N={order} error {err:.3e}"));
        }
    }
    Ok(SuiteReport { name: "heat-filter".into(), cases, failures, worst, elapsed: start.elapsed() })
}

/// Tolerances used by [`run_all`].
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const BESSEL_TOL: f64 = 1e-10;
pub const TRANSPORT_FILTER_TOL: f64 = 1e-5;
pub const HEAT_FILTER_TOL: f64 = 1e-8;

pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        lemma1_suite(seed, 100, RESIDUAL_TOL)?,
        lemma2_suite(seed.wrapping_add(1), 100, RESIDUAL_TOL)?,
        bessel_suite(seed.wrapping_add(2), 200, BESSEL_TOL)?,
        transport_filter_suite(seed.wrapping_add(3), 20, TRANSPORT_FILTER_TOL)?,
        heat_filter_suite(seed.wrapping_add(4), 20, HEAT_FILTER_TOL)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_vanish_before_the_signal_starts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = FourierSignal::random(&mut rng, 2, 3);
        assert!(transport_projections(&y, 1.0, 0.0, 3).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn zero_signal_has_zero_residual() {
        let (m, z) = transport_m1(2, 1, 1.5, VarId(1)).unwrap();
        let mut a = Assignment::default();
        a.insert(VarId(1), SymMat::identity(1));
        let r = iqc_residual(&m.eval(&a).unwrap(), &z.eval(&a).unwrap(), &Mat::zeros(50, 5), &Vector::zeros(3), 0.01).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn small_suites_pass() {
        assert!(lemma1_suite(7, 3, RESIDUAL_TOL).unwrap().passed());
        assert!(lemma2_suite(7, 3, RESIDUAL_TOL).unwrap().passed());
        assert!(bessel_suite(7, 20, BESSEL_TOL).unwrap().passed());
        assert!(transport_filter_suite(7, 3, TRANSPORT_FILTER_TOL).unwrap().passed());
        assert!(heat_filter_suite(7, 6, HEAT_FILTER_TOL).unwrap().passed());
    }
}
