//! Primal–dual interior-point method for block SDPs with low-rank
//! coefficient structure.
//!
//! The LMI system `G_k(x) ≻ 0` is posed as
//!
//! ```text
//! maximize t  s.t.  G_k(x)/s_k − t·I ⪰ 0,   κ − Σ_k tr(G_k(x) − G_k(0))/s_k ≥ 0,
//! ```
//!
//! i.e. the dual-form SDP `max bᵀy s.t. C − Σ y_j A_j = Z ⪰ 0` with
//! `y = (x, t)`. The trace bound keeps `t` finite for homogeneous systems;
//! `s_k` is the constraint scale reported by [`LmiProblem::constraint_scales`].
//!
//! Every coefficient matrix is kept as `A_j = Σ c·v_a v_bᵀ + α_j I` over a
//! per-block dictionary of vectors `v`, so each Schur-complement entry
//! `tr(A_i X A_j Z⁻¹)` costs a handful of lookups into the Gram matrices
//! `Vᵀ X V` and `Vᵀ Z⁻¹ V`. Search directions are HKM with a Mehrotra
//! predictor–corrector.

use nalgebra::{Cholesky, DVector, Dyn, SymmetricEigen};

use super::{basis_element, upper_pairs, LmiProblem};
use crate::affine::{Assignment, TermKind, VarId};
use crate::linalg::{Mat, SymMat};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Relative duality-gap and residual tolerance.
    pub tolerance: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iterations: 100, tolerance: 1e-8, step_fraction: 0.95 }
    }
}

type Pair = (usize, usize, f64);

#[derive(Debug, Clone)]
pub(crate) struct Block {
    dim: usize,
    dict: Mat,
    c: Mat,
    pairs: Vec<Vec<Pair>>,
    ident: Vec<f64>,
    active: Vec<usize>,
}

impl Block {
    fn new(dim: usize, dict: Mat, c: Mat, pairs: Vec<Vec<Pair>>, ident: Vec<f64>) -> Self {
        let active = (0..pairs.len()).filter(|&j| !pairs[j].is_empty() || ident[j] != 0.0).collect();
        Self { dim, dict, c, pairs, ident, active }
    }

    fn gram(&self, k: &Mat) -> Mat {
        self.dict.transpose() * (k * &self.dict)
    }

    /// Accumulates `tr(A_j K)` into `out`.
    fn apply(&self, k: &Mat, out: &mut DVector<f64>) {
        let g = self.gram(k);
        let tr = k.trace();
        for &j in &self.active {
            let mut s = self.ident[j] * tr;
            for &(u, v, c) in &self.pairs[j] {
                s += c * g[(v, u)];
            }
            out[j] += s;
        }
    }

    /// `Σ_j y_j A_j`.
    fn adjoint(&self, y: &DVector<f64>) -> Mat {
        let q = self.dict.ncols();
        let mut w = Mat::zeros(q, q);
        let mut diag = 0.0;
        for &j in &self.active {
            let yj = y[j];
            if yj == 0.0 {
                continue;
            }
            diag += self.ident[j] * yj;
            for &(u, v, c) in &self.pairs[j] {
                w[(u, v)] += c * yj;
            }
        }
        let mut out = &self.dict * w * self.dict.transpose();
        for i in 0..self.dim {
            out[(i, i)] += diag;
        }
        symmetrize(out)
    }

    /// Adds `tr(A_i X A_j Z⁻¹)` to the Schur complement.
    fn schur(&self, x: &Mat, zinv: &Mat, m: &mut Mat) {
        let gx = self.gram(x);
        let gz = self.gram(zinv);
        let xz = x * zinv;
        let gxz = self.gram(&xz);
        let tr_xz = xz.trace();
        let h: Vec<f64> = self
            .pairs
            .iter()
            .map(|p| p.iter().map(|&(u, v, c)| c * gxz[(v, u)]).sum())
            .collect();
        for (ai, &i) in self.active.iter().enumerate() {
            let pi = &self.pairs[i];
            for &j in &self.active[ai..] {
                let mut s = 0.0;
                for &(a, b, c) in pi {
                    for &(a2, b2, c2) in &self.pairs[j] {
                        s += c * c2 * gx[(b, a2)] * gz[(b2, a)];
                    }
                }
                s += self.ident[j] * h[i] + self.ident[i] * h[j] + self.ident[i] * self.ident[j] * tr_xz;
                m[(i, j)] += s;
            }
        }
    }

    /// Dense `A_j`, for export and tests.
    pub(crate) fn dense(&self, j: usize) -> Mat {
        let mut y = DVector::zeros(self.pairs.len());
        y[j] = 1.0;
        self.adjoint(&y)
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn constant(&self) -> &Mat {
        &self.c
    }
}

/// Dual-form data `max bᵀy s.t. C − Σ y_j A_j ⪰ 0` over a list of blocks.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    /// `(variable, size, offset into y)`.
    pub(crate) vars: Vec<(VarId, usize, usize)>,
    pub(crate) m: usize,
    pub(crate) t_index: usize,
    pub(crate) blocks: Vec<Block>,
    pub(crate) b: DVector<f64>,
}

impl StandardForm {
    pub(crate) fn from_problem(problem: &LmiProblem) -> Self {
        let mut vars = Vec::new();
        let mut offset = 0;
        for v in &problem.variables {
            vars.push((v.id, v.dim, offset));
            offset += v.dim * (v.dim + 1) / 2;
        }
        let t_index = offset;
        let m = offset + 1;
        let scales = problem.constraint_scales();
        let frac = std::f64::consts::FRAC_1_SQRT_2;

        let mut blocks = Vec::new();
        let mut trace_coeffs = DVector::zeros(m);
        let mut kappa = 0.0;
        for (con, &scale) in problem.constraints.iter().zip(&scales) {
            let g = con.oriented().scaled(1.0 / scale);
            let dim = g.dim;
            let mut columns: Vec<Mat> = Vec::new();
            let mut q = 0;
            let mut pairs: Vec<Vec<Pair>> = vec![Vec::new(); m];
            for term in &g.terms {
                let &(_, vdim, voff) = vars.iter().find(|(id, _, _)| *id == term.var).expect("declared variable");
                let index = |a: usize, b: usize| voff + a * vdim - a * (a + 1) / 2 + b;
                // A_j = −(coefficient of y_j in G)
                match &term.kind {
                    TermKind::Congruence { left, scale } => {
                        let l0 = q;
                        columns.push(left.transpose());
                        q += vdim;
                        for (a, b) in upper_pairs(vdim) {
                            let p = &mut pairs[index(a, b)];
                            if a == b {
                                p.push((l0 + a, l0 + a, -scale));
                            } else {
                                p.push((l0 + a, l0 + b, -scale * frac));
                                p.push((l0 + b, l0 + a, -scale * frac));
                            }
                        }
                    }
                    TermKind::Symmetrized { left, right } => {
                        let (l0, r0) = (q, q + vdim);
                        columns.push(left.transpose());
                        columns.push(right.transpose());
                        q += 2 * vdim;
                        for (a, b) in upper_pairs(vdim) {
                            let p = &mut pairs[index(a, b)];
                            if a == b {
                                p.push((l0 + a, r0 + a, -1.0));
                                p.push((r0 + a, l0 + a, -1.0));
                            } else {
                                for (u, v) in [(l0 + a, r0 + b), (l0 + b, r0 + a), (r0 + b, l0 + a), (r0 + a, l0 + b)] {
                                    p.push((u, v, -frac));
                                }
                            }
                        }
                    }
                }
            }
            let dict = if columns.is_empty() {
                Mat::zeros(dim, 0)
            } else {
                crate::linalg::hstack(&columns.iter().collect::<Vec<_>>())
            };
            let mut ident = vec![0.0; m];
            ident[t_index] = 1.0;
            let block = Block::new(dim, dict, g.constant.as_mat().clone(), pairs, ident);
            // tr(G_j) = −tr(A_j)
            let dots = block.dict.transpose() * &block.dict;
            for j in 0..t_index {
                trace_coeffs[j] -= block.pairs[j].iter().map(|&(u, v, c)| c * dots[(v, u)]).sum::<f64>();
            }
            kappa += dim as f64;
            blocks.push(block);
        }
        let lp_pairs = (0..m).map(|j| if trace_coeffs[j] != 0.0 { vec![(0, 0, trace_coeffs[j])] } else { Vec::new() }).collect();
        blocks.push(Block::new(1, Mat::identity(1, 1), Mat::from_element(1, 1, kappa), lp_pairs, vec![0.0; m]));

        let mut b = DVector::zeros(m);
        b[t_index] = 1.0;
        Self { vars, m, t_index, blocks, b }
    }

    /// Maps `y` back to symmetric matrix values.
    pub(crate) fn assignment(&self, y: &DVector<f64>) -> Assignment {
        let mut out = Assignment::default();
        for &(id, dim, off) in &self.vars {
            let mut acc = Mat::zeros(dim, dim);
            for (k, (a, b)) in upper_pairs(dim).enumerate() {
                acc += basis_element(dim, a, b).as_mat() * y[off + k];
            }
            out.insert(id, SymMat::from_mat(acc));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Feasible,
    Infeasible,
    Failed,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmResult {
    pub status: Outcome,
    pub y: DVector<f64>,
    pub iterations: usize,
    pub lower: f64,
    pub upper: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub message: String,
}

fn symmetrize(m: Mat) -> Mat {
    let t = m.transpose();
    (m + t) * 0.5
}

fn inner(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

/// Largest `α` with `x + α·dx ⪰ 0` (infinite if `dx ⪰ 0`).
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &Mat) -> f64 {
    let l = chol.l();
    let Some(w) = l.solve_lower_triangular(dx) else { return 0.0 };
    let Some(w2) = l.solve_lower_triangular(&w.transpose()) else { return 0.0 };
    let lam = SymmetricEigen::new(symmetrize(w2)).eigenvalues.min();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

struct Iterate {
    x: Vec<Mat>,
    z: Vec<Mat>,
    y: DVector<f64>,
}

impl StandardForm {
    fn apply(&self, ks: &[Mat]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (blk, k) in self.blocks.iter().zip(ks) {
            blk.apply(k, &mut out);
        }
        out
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<Mat> {
        self.blocks.iter().map(|b| b.adjoint(y)).collect()
    }

    /// Largest `t` for which `y` with its `t` entry replaced is dual feasible.
    fn certified_margin(&self, y: &DVector<f64>) -> f64 {
        let mut y0 = y.clone();
        y0[self.t_index] = 0.0;
        let mut t = f64::INFINITY;
        for blk in &self.blocks {
            let slack = SymMat::from_mat(&blk.c - blk.adjoint(&y0));
            let Ok(lam) = crate::linalg::sym_eig_min(&slack) else { return f64::NEG_INFINITY };
            let it = blk.ident[self.t_index];
            if it > 0.0 {
                t = t.min(lam / it);
            } else if lam < 0.0 {
                return f64::NEG_INFINITY;
            }
        }
        t
    }
}

pub(crate) fn solve(sf: &StandardForm, target: f64, settings: &SolverSettings) -> IpmResult {
    let nu: f64 = sf.blocks.iter().map(|b| b.dim as f64).sum();
    let b_norm = sf.b.norm();
    let c_norm = sf.blocks.iter().map(|b| b.c.norm()).fold(0.0, f64::max);

    let mut it = Iterate {
        x: sf
            .blocks
            .iter()
            .map(|b| Mat::identity(b.dim, b.dim) * 10f64.max((b.dim as f64).sqrt()))
            .collect(),
        z: sf
            .blocks
            .iter()
            .map(|b| Mat::identity(b.dim, b.dim) * 10f64.max((b.dim as f64).sqrt()).max(b.c.norm()))
            .collect(),
        y: DVector::zeros(sf.m),
    };

    let mut result = IpmResult {
        status: Outcome::Failed,
        y: it.y.clone(),
        iterations: 0,
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        pinf: f64::INFINITY,
        dinf: f64::INFINITY,
        message: String::new(),
    };

    for iter in 0..settings.max_iterations {
        result.iterations = iter;
        let aty = sf.adjoint(&it.y);
        let rp = &sf.b - sf.apply(&it.x);
        let rd: Vec<Mat> = sf.blocks.iter().zip(&it.z).zip(&aty).map(|((b, z), a)| &b.c - z - a).collect();
        let mu = it.x.iter().zip(&it.z).map(|(x, z)| inner(x, z)).sum::<f64>() / nu;
        let pobj: f64 = sf.blocks.iter().zip(&it.x).map(|(b, x)| inner(&b.c, x)).sum();
        let dobj = sf.b.dot(&it.y);
        result.pinf = rp.norm() / (1.0 + b_norm);
        result.dinf = rd.iter().map(|r| r.norm()).fold(0.0, f64::max) / (1.0 + c_norm);

        let lower = sf.certified_margin(&it.y);
        if lower > result.lower {
            result.lower = lower;
            let mut y = it.y.clone();
            y[sf.t_index] = lower;
            result.y = y;
        }
        if result.pinf < 1e-7 {
            result.upper = result.upper.min(pobj + rp.norm() * (1.0 + it.y.norm()));
        }
        if result.lower >= target * 1.001 {
            result.status = Outcome::Feasible;
            result.message = format!("margin {:.3e} certified", result.lower);
            return result;
        }
        if result.upper < target * 0.999 {
            result.status = Outcome::Infeasible;
            result.message = format!("margin bounded above by {:.3e}", result.upper);
            return result;
        }
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if gap < settings.tolerance && result.pinf < settings.tolerance && result.dinf < settings.tolerance {
            result.message = format!("converged with margin in [{:.3e}, {:.3e}] straddling the target", result.lower, result.upper);
            return result;
        }

        let Some(chol_x) = it.x.iter().map(|x| Cholesky::new(x.clone())).collect::<Option<Vec<_>>>() else {
            result.message = "primal iterate left the cone".into();
            return result;
        };
        let Some(chol_z) = it.z.iter().map(|z| Cholesky::new(z.clone())).collect::<Option<Vec<_>>>() else {
            result.message = "dual iterate left the cone".into();
            return result;
        };
        let zinv: Vec<Mat> = chol_z.iter().map(|c| c.inverse()).collect();

        let mut schur = Mat::zeros(sf.m, sf.m);
        for (k, blk) in sf.blocks.iter().enumerate() {
            blk.schur(&it.x[k], &zinv[k], &mut schur);
        }
        for i in 0..sf.m {
            for j in 0..i {
                schur[(i, j)] = schur[(j, i)];
            }
        }
        let Some(schur_chol) = factor_schur(schur) else {
            result.message = "Schur complement is not positive definite".into();
            return result;
        };

        let x_rd_zinv: Vec<Mat> = (0..sf.blocks.len()).map(|k| &it.x[k] * &rd[k] * &zinv[k]).collect();
        let base_rhs = &sf.b + sf.apply(&x_rd_zinv);

        let direction = |rhs: &DVector<f64>, sigma_mu: f64, second: Option<&Vec<Mat>>| {
            let dy = schur_chol.solve(rhs);
            let atdy = sf.adjoint(&dy);
            let dz: Vec<Mat> = rd.iter().zip(&atdy).map(|(r, a)| r - a).collect();
            let dx: Vec<Mat> = (0..sf.blocks.len())
                .map(|k| {
                    let mut d = &zinv[k] * sigma_mu - &it.x[k] - &it.x[k] * &dz[k] * &zinv[k];
                    if let Some(corr) = second {
                        d -= &corr[k];
                    }
                    symmetrize(d)
                })
                .collect();
            (dx, dy, dz)
        };
        let step = |dx: &[Mat], dz: &[Mat]| {
            let ap = chol_x.iter().zip(dx).map(|(c, d)| max_step(c, d)).fold(f64::INFINITY, f64::min);
            let ad = chol_z.iter().zip(dz).map(|(c, d)| max_step(c, d)).fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // predictor
        let (dx_a, _, dz_a) = direction(&base_rhs, 0.0, None);
        let (ap, ad) = step(&dx_a, &dz_a);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = (0..sf.blocks.len())
            .map(|k| inner(&(&it.x[k] + &dx_a[k] * ap), &(&it.z[k] + &dz_a[k] * ad)))
            .sum::<f64>()
            / nu;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let second: Vec<Mat> = (0..sf.blocks.len()).map(|k| &dx_a[k] * &dz_a[k] * &zinv[k]).collect();
        let zinv_apply = sf.apply(&zinv);
        let rhs = &base_rhs - zinv_apply * (sigma * mu) + sf.apply(&second);
        let (dx, dy, dz) = direction(&rhs, sigma * mu, Some(&second));
        let (ap, ad) = step(&dx, &dz);
        let ap = (settings.step_fraction * ap).min(1.0);
        let ad = (settings.step_fraction * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            result.message = "step length collapsed".into();
            return result;
        }
        for k in 0..sf.blocks.len() {
            it.x[k] += &dx[k] * ap;
            it.z[k] += &dz[k] * ad;
        }
        it.y += dy * ad;
    }
    result.iterations = settings.max_iterations;
    result.message = format!("iteration limit reached (margin in [{:.3e}, {:.3e}])", result.lower, result.upper);
    result
}

fn factor_schur(m: Mat) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let d = m.diagonal().max().max(1.0);
    let n = m.nrows();
    Cholesky::new(m + Mat::identity(n, n) * (1e-12 * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::AffineSym;
    use crate::lmi::{Sense, VarSign};

    fn small_problem() -> LmiProblem {
        let mut p = LmiProblem::new(1e-6).unwrap();
        p.add_variable(VarId(0), "P", 3, VarSign::Free).unwrap();
        p.add_variable(VarId(1), "S", 2, VarSign::PositiveDefinite).unwrap();
        let a = Mat::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, 0.0, -3.0, 1.0, 0.5, 0.0, -2.0]);
        let lyap = AffineSym::variable(VarId(0), 3).he_sandwich(&Mat::identity(3, 3), &a).unwrap();
        let sel = Mat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let expr = lyap.add(&AffineSym::congruence_of(VarId(1), sel, 0.5)).unwrap();
        p.add_constraint("lyap", expr, Sense::NegativeDefinite).unwrap();
        p
    }

    #[test]
    fn structured_coefficients_match_dense_expansion() {
        let p = small_problem();
        let sf = StandardForm::from_problem(&p);
        let scales = p.constraint_scales();
        // every A_j in every constraint block equals −(linear part)/scale
        for (k, con) in p.constraints.iter().enumerate() {
            let g = con.oriented();
            for &(id, dim, off) in &sf.vars {
                for (idx, (a, b)) in upper_pairs(dim).enumerate() {
                    let want = g.linear_part(id, &basis_element(dim, a, b)).as_mat() * (-1.0 / scales[k]);
                    let got = sf.blocks[k].dense(off + idx);
                    assert!((got - want).abs().max() < 1e-12);
                }
            }
            assert_eq!(sf.blocks[k].dense(sf.t_index), Mat::identity(g.dim, g.dim));
        }
    }

    #[test]
    fn schur_entries_match_dense_traces() {
        let p = small_problem();
        let sf = StandardForm::from_problem(&p);
        let k = sf.blocks.iter().position(|b| b.dim == 3).unwrap();
        let blk = &sf.blocks[k];
        let x = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 + i as f64 } else { 0.3 });
        let z = Mat::from_fn(3, 3, |i, j| if i == j { 1.5 } else { -0.2 });
        let zinv = z.clone().try_inverse().unwrap();
        let mut m = Mat::zeros(sf.m, sf.m);
        blk.schur(&x, &zinv, &mut m);
        for i in 0..sf.m {
            for j in i..sf.m {
                let want = (blk.dense(i) * &x * blk.dense(j) * &zinv).trace();
                assert!((m[(i, j)] - want).abs() < 1e-10, "({i},{j}) {} vs {want}", m[(i, j)]);
            }
        }
    }

    #[test]
    fn small_lyapunov_problem_is_feasible() {
        let p = small_problem();
        let sf = StandardForm::from_problem(&p);
        let r = solve(&sf, 1e-6, &SolverSettings::default());
        assert_eq!(r.status, Outcome::Feasible, "{}", r.message);
        assert!(r.lower >= 1e-6);
    }
}
