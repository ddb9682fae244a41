//! Assembly of the stability LMIs and their solution with a strictness margin.
//!
//! The two matrix inequalities are
//!
//! * `K∘^⊥ᵀ 𝓛(P, M, [𝒜 ℬ; 𝒞 𝒟]) K∘^⊥ ≺ 0` (kernel inequality), and
//! * `P − diag(Z, 0_n) ≻ 0` (positivity with terminal cost),
//!
//! together with `S ≻ 0`, `R ≻ 0` for the multiplier variables.

mod ipm;
pub mod sdpa;

use crate::affine::{AffineSym, Assignment, VarId};
use crate::error::{Error, Result};
use crate::linalg::{hstack, nullspace_basis, sym_eig_min, Mat, SymMat};
use crate::model::{Interconnection, LtiSystem, PdeSpec};
use crate::multipliers::MultiplierSet;

pub use ipm::SolverSettings;

/// Relative singular-value threshold used for `K∘^⊥`.
pub const NULLSPACE_TOL: f64 = 1e-9;
/// Default strictness margin.
pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSign {
    Free,
    PositiveDefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub id: VarId,
    pub name: String,
    pub dim: usize,
    pub sign: VarSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `F ≺ 0`
    NegativeDefinite,
    /// `F ≻ 0`
    PositiveDefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub expr: AffineSym,
    pub sense: Sense,
    pub margin: f64,
}

impl Constraint {
    /// The constraint written as `G ≻ 0`.
    pub fn oriented(&self) -> AffineSym {
        match self.sense {
            Sense::PositiveDefinite => self.expr.clone(),
            Sense::NegativeDefinite => self.expr.scaled(-1.0),
        }
    }
}

/// A list of strict LMIs in symmetric matrix variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    pub variables: Vec<VarDecl>,
    pub constraints: Vec<Constraint>,
    pub eps: f64,
}

impl LmiProblem {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("strictness margin must be positive, got {eps}")));
        }
        Ok(Self { variables: Vec::new(), constraints: Vec::new(), eps })
    }

    /// Declares a variable; positive-definite variables get an `X ≻ eps·I` constraint.
    pub fn add_variable(&mut self, id: VarId, name: &str, dim: usize, sign: VarSign) -> Result<()> {
        if self.variables.iter().any(|v| v.id == id) {
            return Err(Error::Domain(format!("variable {id:?} declared twice")));
        }
        if dim == 0 {
            return Err(Error::Dimension(format!("variable {name} has size zero")));
        }
        self.variables.push(VarDecl { id, name: name.to_string(), dim, sign });
        if sign == VarSign::PositiveDefinite {
            self.constraints.push(Constraint {
                name: name.to_string(),
                expr: AffineSym::variable(id, dim),
                sense: Sense::PositiveDefinite,
                margin: self.eps,
            });
        }
        Ok(())
    }

    pub fn add_constraint(&mut self, name: &str, expr: AffineSym, sense: Sense) -> Result<()> {
        for t in &expr.terms {
            let decl = self
                .variable(t.var)
                .ok_or_else(|| Error::Domain(format!("constraint {name} uses undeclared variable {:?}", t.var)))?;
            if decl.dim != t.var_dim() {
                return Err(Error::Dimension(format!(
                    "constraint {name}: variable {} has size {}, term expects {}",
                    decl.name,
                    decl.dim,
                    t.var_dim()
                )));
            }
        }
        self.constraints.push(Constraint { name: name.to_string(), expr, sense, margin: self.eps });
        Ok(())
    }

    pub fn variable(&self, id: VarId) -> Option<&VarDecl> {
        self.variables.iter().find(|v| v.id == id)
    }

    /// Per-constraint normalization: the largest Frobenius norm among the
    /// images of the unit basis elements of the variables (1 if constant).
    pub fn constraint_scales(&self) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| {
                let mut s: f64 = 0.0;
                for v in &self.variables {
                    if !c.expr.vars().contains(&v.id) {
                        continue;
                    }
                    for (a, b) in upper_pairs(v.dim) {
                        let g = c.expr.linear_part(v.id, &basis_element(v.dim, a, b));
                        s = s.max(g.as_mat().norm());
                    }
                }
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// Smallest eigenvalue of each oriented constraint at `x`, divided by its scale.
    pub fn margins_at(&self, x: &Assignment) -> Result<Vec<f64>> {
        let scales = self.constraint_scales();
        self.constraints
            .iter()
            .zip(scales)
            .map(|(c, s)| Ok(sym_eig_min(&c.oriented().eval(x)?)? / s))
            .collect()
    }
}

/// Index pairs `(a, b)`, `a ≤ b`, in row-major upper-triangular order.
pub(crate) fn upper_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |a| (a..dim).map(move |b| (a, b)))
}

/// Orthonormal basis of the symmetric matrices under the trace inner
/// product: `e_a e_aᵀ`, or `(e_a e_bᵀ + e_b e_aᵀ)/√2`.
pub(crate) fn basis_element(dim: usize, a: usize, b: usize) -> SymMat {
    let mut m = Mat::zeros(dim, dim);
    if a == b {
        m[(a, a)] = 1.0;
    } else {
        m[(a, b)] = std::f64::consts::FRAC_1_SQRT_2;
        m[(b, a)] = std::f64::consts::FRAC_1_SQRT_2;
    }
    SymMat::from_mat(m)
}

/// `𝓛(P, M, [𝒜 ℬ; 𝒞 𝒟]) = He([I 0]ᵀ P [𝒜 ℬ]) + [𝒞 𝒟]ᵀ M [𝒞 𝒟]`.
pub fn script_l(p: &AffineSym, m: &AffineSym, sys: &Interconnection) -> Result<AffineSym> {
    let ns = sys.state_dim();
    let tw = sys.trace_width();
    if p.dim != ns || m.dim != sys.output_dim() {
        return Err(Error::Dimension(format!(
            "P has size {} (state {ns}), M has size {} (output {})",
            p.dim,
            m.dim,
            sys.output_dim()
        )));
    }
    let u = hstack(&[&Mat::identity(ns, ns), &Mat::zeros(ns, tw)]);
    let w = hstack(&[&sys.a, &sys.b]);
    let g = hstack(&[&sys.c, &sys.d]);
    p.he_sandwich(&u, &w)?.add(&m.congruence(&g)?)
}

/// `K∘ = [0_{ml,n_ξ}  K C  −K_𝓑]` acting on `col(ξ, X, 𝓑_m(z))`.
pub fn k_circ(pde: &PdeSpec, plant: &LtiSystem, n_xi: usize) -> Result<Mat> {
    if pde.k_input.ncols() != plant.p() {
        return Err(Error::Dimension(format!(
            "K has {} columns but the plant has {} outputs",
            pde.k_input.ncols(),
            plant.p()
        )));
    }
    let ml = pde.order * pde.width;
    Ok(hstack(&[&Mat::zeros(ml, n_xi), &(&pde.k_input * &plant.c), &(-&pde.k_boundary)]))
}

/// Builds the LMI system in `(P, S, R)` for an interconnection and multiplier set.
pub fn build_problem(sys: &Interconnection, mult: &MultiplierSet, kc: &Mat, eps: f64) -> Result<LmiProblem> {
    let ns = sys.state_dim();
    let n_xi = mult.z.dim;
    if kc.ncols() != ns + sys.trace_width() || n_xi > ns {
        return Err(Error::Dimension(format!(
            "K∘ is {:?} for state {ns} and trace {}",
            kc.shape(),
            sys.trace_width()
        )));
    }
    let mut problem = LmiProblem::new(eps)?;
    let p_id = VarId(mult.s.0.max(mult.r.0) + 1);
    problem.add_variable(p_id, "P", ns, VarSign::Free)?;
    problem.add_variable(mult.s, "S", mult.width, VarSign::PositiveDefinite)?;
    problem.add_variable(mult.r, "R", mult.width, VarSign::PositiveDefinite)?;

    let basis = nullspace_basis(kc, NULLSPACE_TOL);
    if basis.ncols() == 0 {
        return Err(Error::EmptyNullSpace);
    }
    let p = AffineSym::variable(p_id, ns);
    let kernel = script_l(&p, &mult.m, sys)?.congruence(&basis)?;
    problem.add_constraint("kernel", kernel, Sense::NegativeDefinite)?;

    let embed = hstack(&[&Mat::identity(n_xi, n_xi), &Mat::zeros(n_xi, ns - n_xi)]);
    let positivity = p.sub(&mult.z.congruence(&embed)?)?;
    problem.add_constraint("positivity", positivity, Sense::PositiveDefinite)?;
    Ok(problem)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Infeasible,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Best certified lower bound on the normalized margin.
    pub margin_lower: f64,
    /// Upper bound on the normalized margin from the primal iterate.
    pub margin_upper: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// Per-constraint `λ_min / scale` at the witness (empty without one).
    pub achieved_margins: Vec<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub status: Status,
    pub witness: Option<Assignment>,
    pub diagnostics: Diagnostics,
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }
}

pub fn solve(problem: &LmiProblem) -> FeasibilityVerdict {
    solve_with(problem, &SolverSettings::default())
}

/// Decides whether every constraint holds with its margin.
///
/// The search maximizes a common normalized margin `t`; a witness is only
/// reported after the constraints have been re-evaluated densely and their
/// eigenvalues checked.
pub fn solve_with(problem: &LmiProblem, settings: &SolverSettings) -> FeasibilityVerdict {
    let target = problem.constraints.iter().map(|c| c.margin).fold(0.0, f64::max);
    let std_form = ipm::StandardForm::from_problem(problem);
    let outcome = ipm::solve(&std_form, target, settings);
    let mut diagnostics = Diagnostics {
        iterations: outcome.iterations,
        margin_lower: outcome.lower,
        margin_upper: outcome.upper,
        primal_infeasibility: outcome.pinf,
        dual_infeasibility: outcome.dinf,
        achieved_margins: Vec::new(),
        message: outcome.message.clone(),
    };
    match outcome.status {
        ipm::Outcome::Feasible => {
            let witness = std_form.assignment(&outcome.y);
            match problem.margins_at(&witness) {
                Ok(margins) => {
                    let ok = margins.iter().zip(&problem.constraints).all(|(m, c)| *m >= c.margin);
                    diagnostics.achieved_margins = margins;
                    if ok {
                        FeasibilityVerdict { status: Status::Feasible, witness: Some(witness), diagnostics }
                    } else {
                        diagnostics.message = "witness failed re-verification".into();
                        FeasibilityVerdict { status: Status::Inconclusive, witness: None, diagnostics }
                    }
                }
                Err(e) => {
                    diagnostics.message = format!("witness evaluation failed: {e}");
                    FeasibilityVerdict { status: Status::Inconclusive, witness: None, diagnostics }
                }
            }
        }
        ipm::Outcome::Infeasible => FeasibilityVerdict { status: Status::Infeasible, witness: None, diagnostics },
        ipm::Outcome::Failed => FeasibilityVerdict { status: Status::Inconclusive, witness: None, diagnostics },
    }
}
