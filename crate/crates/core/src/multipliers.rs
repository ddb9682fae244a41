//! IQC multipliers for the transport equation, as affine maps of the
//! decision variables `S` and `R`.
//!
//! Both multipliers weight the filter output `ψ_N = col(z(0), z(1), ξ_N)`.

use crate::affine::{AffineSym, VarId};
use crate::error::{Error, Result};
use crate::linalg::{block_selector, Mat, SymMat, Vector};

/// Energy-balance multiplier and its terminal cost.
///
/// `M¹ = ρ·diag(S, −S, 0_{n_ξ})`, `Z¹ = −diag(S, 3S, …, (2N+1)S)`.
pub fn transport_m1(order: usize, width: usize, rho: f64, s: VarId) -> Result<(AffineSym, AffineSym)> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("transport speed must be positive, got {rho}")));
    }
    let blocks = order + 3;
    let m = AffineSym::congruence_of(s, block_selector(0, width, blocks), rho)
        .add(&AffineSym::congruence_of(s, block_selector(1, width, blocks), -rho))?;
    let mut z = AffineSym::zeros((order + 1) * width);
    for k in 0..=order {
        z = z.add(&AffineSym::congruence_of(s, block_selector(k, width, order + 1), -((2 * k + 1) as f64)))?;
    }
    Ok((m, z))
}

/// Input-to-state multiplier with zero terminal cost.
///
/// `M² = diag(R, 0_l, −diag(R, 3R, …, (2N+1)R))`.
pub fn transport_m2(order: usize, width: usize, r: VarId) -> Result<AffineSym> {
    let blocks = order + 3;
    let mut m = AffineSym::congruence_of(r, block_selector(0, width, blocks), 1.0);
    for k in 0..=order {
        m = m.add(&AffineSym::congruence_of(r, block_selector(k + 2, width, blocks), -((2 * k + 1) as f64)))?;
    }
    Ok(m)
}

/// `M = M¹(S) + M²(R)` with terminal cost `Z = Z¹(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSet {
    pub m: AffineSym,
    pub z: AffineSym,
    pub s: VarId,
    pub r: VarId,
    pub width: usize,
}

impl MultiplierSet {
    pub fn transport(order: usize, width: usize, rho: f64, s: VarId, r: VarId) -> Result<Self> {
        let (m1, z) = transport_m1(order, width, rho, s)?;
        let m = m1.add(&transport_m2(order, width, r)?)?;
        Ok(Self { m, z, s, r, width })
    }
}

/// Left-hand side of the finite-horizon IQC with terminal cost,
/// `∫₀ᵀ ψᵀ M ψ dt + ξ(T)ᵀ Z ξ(T)`, with the integral by the trapezoid rule.
///
/// `psi` holds one sample per row on a uniform grid of spacing `dt`.
pub fn iqc_residual(m: &SymMat, z: &SymMat, psi: &Mat, xi_end: &Vector, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    if psi.ncols() != m.dim() || xi_end.len() != z.dim() {
        return Err(Error::Dimension(format!(
            "trace width {} vs M {}, ξ(T) {} vs Z {}",
            psi.ncols(),
            m.dim(),
            xi_end.len(),
            z.dim()
        )));
    }
    let samples = psi.nrows();
    if samples < 2 {
        return Err(Error::Dimension("need at least two samples".into()));
    }
    let mut integral = 0.0;
    for (i, row) in psi.row_iter().enumerate() {
        let v = row.transpose();
        let w = if i == 0 || i == samples - 1 { 0.5 } else { 1.0 };
        integral += w * m.quad(&v);
    }
    Ok(integral * dt + z.quad(xi_end))
}
