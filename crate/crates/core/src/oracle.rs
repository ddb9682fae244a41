//! Spectral ground truth for `Ẋ(t) = A X(t) + B X(t − h)`.
//!
//! The infinitesimal generator of the delay equation is discretized by
//! Chebyshev collocation on `[−h, 0]`; its rightmost eigenvalues converge
//! spectrally to the characteristic roots of `det(λI − A − B e^{−λh}) = 0`.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Collocation orders tried, in increasing order.
pub const COLLOCATION_ORDERS: [usize; 7] = [20, 30, 40, 50, 60, 70, 80];
/// Change in the abscissa between successive orders accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Abscissa below which the system counts as exponentially stable.
pub const STABILITY_THRESHOLD: f64 = -1e-8;

/// Chebyshev points `x_j = cos(jπ/m)` and the differentiation matrix on them.
pub fn cheb(m: usize) -> (Mat, Vec<f64>) {
    if m == 0 {
        return (Mat::zeros(1, 1), vec![1.0]);
    }
    let x: Vec<f64> = (0..=m).map(|j| (std::f64::consts::PI * j as f64 / m as f64).cos()).collect();
    let c = |j: usize| (if j == 0 || j == m { 2.0 } else { 1.0 }) * if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut d = Mat::zeros(m + 1, m + 1);
    for i in 0..=m {
        for j in 0..=m {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
    }
    // negative-sum trick for the diagonal
    for i in 0..=m {
        let s: f64 = (0..=m).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    (d, x)
}

fn check(a: &Mat, b: &Mat, h: f64) -> Result<()> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::Dimension(format!("A {:?} and B {:?} must be square of equal size", a.shape(), b.shape())));
    }
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("delay must be non-negative, got {h}")));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("delay system matrices"));
    }
    Ok(())
}

/// Collocation matrix of the generator on `m + 1` nodes `θ_j = h(x_j − 1)/2`.
///
/// Row block 0 carries the dynamics `A u(0) + B u(−h)`, the others `u'(θ_j)`.
pub fn dde_generator(a: &Mat, b: &Mat, h: f64, m: usize) -> Result<Mat> {
    check(a, b, h)?;
    if h == 0.0 || m == 0 {
        return Err(Error::Domain("collocation needs a positive delay and order".into()));
    }
    let n = a.nrows();
    let (d, _) = cheb(m);
    let d = d * (2.0 / h);
    let mut g = Mat::zeros(n * (m + 1), n * (m + 1));
    g.view_mut((0, 0), (n, n)).copy_from(a);
    let mut last = g.view_mut((0, n * m), (n, n));
    last += b;
    for i in 1..=m {
        for j in 0..=m {
            let v = d[(i, j)];
            if v != 0.0 {
                for k in 0..n {
                    g[(i * n + k, j * n + k)] = v;
                }
            }
        }
    }
    Ok(g)
}

fn eigenvalues(m: Mat) -> Result<Vec<Complex<f64>>> {
    let dim = m.nrows();
    let ev = m.complex_eigenvalues();
    if ev.len() != dim || ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen("Schur iteration did not converge".into()));
    }
    Ok(ev.iter().copied().collect())
}

/// Approximate characteristic roots, sorted by decreasing real part.
pub fn dde_spectrum(a: &Mat, b: &Mat, h: f64, m: usize) -> Result<Vec<Complex<f64>>> {
    let mut ev = if h == 0.0 { eigenvalues(a + b)? } else { eigenvalues(dde_generator(a, b, h, m)?)? };
    ev.sort_by(|x, y| y.re.total_cmp(&x.re));
    Ok(ev)
}

/// Largest real part of the eigenvalues of `a`.
pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("spectral abscissa of a {:?} matrix", a.shape())));
    }
    Ok(eigenvalues(a.clone())?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Rightmost real part of the characteristic roots, refined in the
/// collocation order until successive orders agree.
pub fn dde_abscissa(a: &Mat, b: &Mat, h: f64) -> Result<f64> {
    check(a, b, h)?;
    if h == 0.0 {
        return spectral_abscissa(&(a + b));
    }
    let mut prev: Option<f64> = None;
    let mut change = f64::INFINITY;
    for &m in &COLLOCATION_ORDERS {
        let s = dde_spectrum(a, b, h, m)?[0].re;
        if let Some(p) = prev {
            change = (s - p).abs();
            if change < CONVERGENCE_TOL * (1.0 + s.abs()) {
                return Ok(s);
            }
        }
        prev = Some(s);
    }
    Err(Error::OracleNotConverged { max_order: *COLLOCATION_ORDERS.last().unwrap(), last_change: change })
}

pub fn is_stable(a: &Mat, b: &Mat, h: f64) -> Result<bool> {
    Ok(dde_abscissa(a, b, h)? < STABILITY_THRESHOLD)
}

/// `det(λI − A − B e^{−λh})`.
pub fn characteristic(a: &Mat, b: &Mat, h: f64, lambda: Complex<f64>) -> Complex<f64> {
    let n = a.nrows();
    let e = (-lambda * h).exp();
    let m = nalgebra::DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
        let id = if i == j { lambda } else { Complex::new(0.0, 0.0) };
        id - Complex::new(a[(i, j)], 0.0) - e * b[(i, j)]
    });
    m.determinant()
}

/// Maximal sub-intervals of `[h_min, h_max]` on which the delay system is
/// stable, from a grid of spacing `step` with endpoints bisected to `tol`.
pub fn stable_intervals(a: &Mat, b: &Mat, h_min: f64, h_max: f64, step: f64, tol: f64) -> Result<Vec<(f64, f64)>> {
    check(a, b, h_min)?;
    if !(h_max > h_min && step > 0.0 && tol > 0.0) {
        return Err(Error::Domain(format!("bad delay grid [{h_min}, {h_max}] step {step} tol {tol}")));
    }
    let count = ((h_max - h_min) / step).round() as usize;
    let grid: Vec<f64> = (0..=count).map(|i| (h_min + i as f64 * step).min(h_max)).collect();
    let flags = grid.iter().map(|&h| is_stable(a, b, h)).collect::<Result<Vec<_>>>()?;
    let bisect = |mut good: f64, mut bad: f64| -> Result<f64> {
        while (good - bad).abs() > tol {
            let mid = 0.5 * (good + bad);
            if is_stable(a, b, mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < grid.len() && flags[i + 1] {
            i += 1;
        }
        let lo = if start == 0 { grid[0] } else { bisect(grid[start], grid[start - 1])? };
        let hi = if i + 1 == grid.len() { grid[i] } else { bisect(grid[i], grid[i + 1])? };
        out.push((lo, hi));
        i += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::chatter;

    #[test]
    fn cheb_differentiates_polynomials_exactly() {
        let (d, x) = cheb(8);
        let f: Vec<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t).collect();
        for i in 0..=8 {
            let df: f64 = (0..=8).map(|j| d[(i, j)] * f[j]).sum();
            assert!((df - (5.0 * x[i].powi(4) - 2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn no_delay_coupling_gives_ode_spectrum() {
        let a = Mat::from_element(1, 1, -1.0);
        let b = Mat::zeros(1, 1);
        assert!((dde_abscissa(&a, &b, 0.7).unwrap() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn pure_delay_at_critical_length() {
        // ẋ = −x(t − π/2) has roots ±i
        let a = Mat::zeros(1, 1);
        let b = Mat::from_element(1, 1, -1.0);
        let s = dde_abscissa(&a, &b, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(s.abs() < 1e-7, "{s}");
        let spec = dde_spectrum(&a, &b, std::f64::consts::FRAC_PI_2, 40).unwrap();
        assert!((spec[0].im.abs() - 1.0).abs() < 1e-7);
        assert!(is_stable(&a, &b, 1.5).unwrap());
        assert!(!is_stable(&a, &b, 1.6).unwrap());
    }

    #[test]
    fn small_delay_approaches_ode() {
        let (a, b) = chatter(2.0);
        let s0 = dde_abscissa(&a, &b, 0.0).unwrap();
        let s1 = dde_abscissa(&a, &b, 1e-4).unwrap();
        assert!((s0 - s1).abs() < 1e-3);
    }

    #[test]
    fn spectrum_is_closed_under_conjugation() {
        let (a, b) = chatter(2.0);
        let spec = dde_spectrum(&a, &b, 1.0, 30).unwrap();
        for z in spec.iter().take(12) {
            assert!(spec.iter().any(|w| (w - z.conj()).norm() < 1e-8 * (1.0 + z.norm())));
        }
    }

    #[test]
    fn rightmost_roots_solve_the_characteristic_equation() {
        let (a, b) = chatter(2.0);
        for h in [0.5, 1.2, 3.0] {
            let spec = dde_spectrum(&a, &b, h, 60).unwrap();
            for z in spec.iter().take(6) {
                // relative to the size of the determinant's terms
                let scale = (1.0 + z.norm()).powi(4) * 20.0;
                assert!(characteristic(&a, &b, h, *z).norm() < 1e-8 * scale, "h={h} λ={z}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let a = Mat::zeros(2, 2);
        assert!(dde_abscissa(&a, &Mat::zeros(3, 3), 1.0).is_err());
        assert!(dde_abscissa(&a, &a, -1.0).is_err());
        assert!(stable_intervals(&a, &a, 1.0, 0.5, 0.1, 1e-3).is_err());
    }
}
