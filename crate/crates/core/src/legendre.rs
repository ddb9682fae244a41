//! Shifted Legendre polynomials on `[0, 1]`.
//!
//! `𝓛_k(x) = (−1)^k Σ_{i=0}^{k} (−1)^i C(k,i) C(k+i,i) xⁱ`, normalized so that
//! `𝓛_k(1) = 1` and `𝓛_k(0) = (−1)^k`, with `‖𝓛_k‖² = 1/(2k+1)`.
//!
//! Derivatives stay inside the family: `𝓛_k' = Σ_j ℓ_kj 𝓛_j` with
//! `ℓ_kj = (2j+1)(1 − (−1)^{k+j})` for `j ≤ k` and zero otherwise. The matrix
//! of these coefficients drives the projection filter.

use crate::error::{Error, Result};
use crate::linalg::{kron_identity, Mat};

/// Highest order evaluated with the explicit binomial sum.
pub const MAX_ORDER: usize = 20;

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Monomial coefficients of `𝓛_k`, lowest degree first.
pub fn coefficients(k: usize) -> Result<Vec<f64>> {
    if k > MAX_ORDER {
        return Err(Error::Domain(format!("Legendre order {k} exceeds {MAX_ORDER}")));
    }
    let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok((0..=k)
        .map(|i| {
            let sign_i = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign_k * sign_i * (binomial(k as u64, i as u64) * binomial((k + i) as u64, i as u64)) as f64
        })
        .collect())
}

/// `𝓛_k(x)` for `x ∈ [0, 1]`.
pub fn eval(k: usize, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [0, 1]")));
    }
    let c = coefficients(k)?;
    Ok(c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci))
}

/// `[𝓛_0(x), …, 𝓛_order(x)]` by the three-term recurrence in `s = 2x − 1`.
pub fn eval_all(order: usize, x: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [0, 1]")));
    }
    let s = 2.0 * x - 1.0;
    let mut out = Vec::with_capacity(order + 1);
    out.push(1.0);
    if order >= 1 {
        out.push(s);
    }
    for k in 1..order {
        let kf = k as f64;
        out.push(((2.0 * kf + 1.0) * s * out[k] - kf * out[k - 1]) / (kf + 1.0));
    }
    Ok(out)
}

/// Derivative-coupling coefficient `ℓ_kj`.
pub fn ell(k: usize, j: usize) -> f64 {
    if j > k || (k + j) % 2 == 0 {
        0.0
    } else {
        2.0 * (2 * j + 1) as f64
    }
}

/// Squared L2 norm of `𝓛_k` on `[0, 1]`.
pub fn norm_sq(k: usize) -> f64 {
    1.0 / (2 * k + 1) as f64
}

/// `L_N = [ℓ_ij I_l]_{i,j=0..N}`.
pub fn deriv_matrix(order: usize, width: usize) -> Mat {
    kron_identity(&LegendreTable::new(order).ell, width)
}

/// Precomputed coupling coefficients and norms up to a fixed order.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub order: usize,
    pub ell: Mat,
    pub norms: Vec<f64>,
}

impl LegendreTable {
    pub fn new(order: usize) -> Self {
        let ell = Mat::from_fn(order + 1, order + 1, |k, j| ell(k, j));
        let norms = (0..=order).map(norm_sq).collect();
        Self { order, ell, norms }
    }
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative on [-1, 1]
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = (1.0 - x) / 2.0;
        nodes[n - 1 - i] = (1.0 + x) / 2.0;
        weights[i] = w / 2.0;
        weights[n - 1 - i] = w / 2.0;
    }
    (nodes, weights)
}
