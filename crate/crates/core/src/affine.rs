//! Symmetric-matrix-valued affine functions of symmetric matrix variables.
//!
//! An [`AffineSym`] is `F(X₁, …) = F₀ + Σ terms`, where every term is one of
//!
//! * `s · Lᵀ X L` (congruence), or
//! * `Lᵀ X R + Rᵀ X L` (symmetrized product),
//!
//! with `X` one of the declared variables. Keeping the factors `L`, `R`
//! instead of expanding to dense coefficient matrices lets the SDP solver
//! exploit their low rank.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::linalg::{Mat, SymMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    Congruence { left: Mat, scale: f64 },
    Symmetrized { left: Mat, right: Mat },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub var: VarId,
    pub kind: TermKind,
}

impl Term {
    /// Size of the variable this term multiplies.
    pub fn var_dim(&self) -> usize {
        match &self.kind {
            TermKind::Congruence { left, .. } | TermKind::Symmetrized { left, .. } => left.nrows(),
        }
    }

    fn apply(&self, x: &Mat) -> Mat {
        match &self.kind {
            TermKind::Congruence { left, scale } => left.transpose() * x * left * *scale,
            TermKind::Symmetrized { left, right } => {
                let lxr = left.transpose() * x * right;
                &lxr + lxr.transpose()
            }
        }
    }

    fn right_multiplied(&self, t: &Mat) -> Self {
        let kind = match &self.kind {
            TermKind::Congruence { left, scale } => TermKind::Congruence { left: left * t, scale: *scale },
            TermKind::Symmetrized { left, right } => TermKind::Symmetrized { left: left * t, right: right * t },
        };
        Self { var: self.var, kind }
    }
}

/// Values for the variables of one or more [`AffineSym`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment(pub BTreeMap<VarId, SymMat>);

impl Assignment {
    pub fn get(&self, var: VarId) -> Option<&SymMat> {
        self.0.get(&var)
    }

    pub fn insert(&mut self, var: VarId, value: SymMat) {
        self.0.insert(var, value);
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|(k, v)| (*k, v.scaled(c))).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSym {
    pub dim: usize,
    pub constant: SymMat,
    pub terms: Vec<Term>,
}

impl AffineSym {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, constant: SymMat::zeros(dim), terms: Vec::new() }
    }

    pub fn constant(c: SymMat) -> Self {
        Self { dim: c.dim(), constant: c, terms: Vec::new() }
    }

    /// The variable itself, `X ↦ X`.
    pub fn variable(var: VarId, dim: usize) -> Self {
        Self::zeros(dim).with_term(Term { var, kind: TermKind::Congruence { left: Mat::identity(dim, dim), scale: 1.0 } })
    }

    /// `s · Lᵀ X L` with `L` of shape `var_dim × dim`.
    pub fn congruence_of(var: VarId, left: Mat, scale: f64) -> Self {
        Self::zeros(left.ncols()).with_term(Term { var, kind: TermKind::Congruence { left, scale } })
    }

    pub fn with_term(mut self, term: Term) -> Self {
        let cols = match &term.kind {
            TermKind::Congruence { left, .. } => left.ncols(),
            TermKind::Symmetrized { left, right } => {
                assert_eq!(left.shape(), right.shape(), "symmetrized factors must share a shape");
                left.ncols()
            }
        };
        assert_eq!(cols, self.dim, "term maps into a {cols}-dimensional space, expected {}", self.dim);
        self.terms.push(term);
        self
    }

    pub fn add(&self, other: &AffineSym) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("adding affine maps of size {} and {}", self.dim, other.dim)));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { dim: self.dim, constant: &self.constant + &other.constant, terms })
    }

    pub fn sub(&self, other: &AffineSym) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let kind = match &t.kind {
                    TermKind::Congruence { left, scale } => TermKind::Congruence { left: left.clone(), scale: scale * c },
                    TermKind::Symmetrized { left, right } => TermKind::Symmetrized { left: left * c, right: right.clone() },
                };
                Term { var: t.var, kind }
            })
            .collect();
        Self { dim: self.dim, constant: self.constant.scaled(c), terms }
    }

    /// `Tᵀ F T` for `T` of shape `dim × k`.
    pub fn congruence(&self, t: &Mat) -> Result<Self> {
        if t.nrows() != self.dim {
            return Err(Error::Dimension(format!("congruence by {:?} on a map of size {}", t.shape(), self.dim)));
        }
        Ok(Self {
            dim: t.ncols(),
            constant: SymMat::from_mat(t.transpose() * self.constant.as_mat() * t),
            terms: self.terms.iter().map(|term| term.right_multiplied(t)).collect(),
        })
    }

    /// `Uᵀ F W + Wᵀ F U` for `U`, `W` of shape `dim × k`.
    pub fn he_sandwich(&self, u: &Mat, w: &Mat) -> Result<Self> {
        if u.nrows() != self.dim || w.shape() != u.shape() {
            return Err(Error::Dimension(format!(
                "sandwich factors {:?}, {:?} on a map of size {}",
                u.shape(),
                w.shape(),
                self.dim
            )));
        }
        let mut out = Self::zeros(u.ncols());
        let ufw = u.transpose() * self.constant.as_mat() * w;
        out.constant = SymMat::from_mat(&ufw + ufw.transpose());
        for term in &self.terms {
            match &term.kind {
                TermKind::Congruence { left, scale } => out.terms.push(Term {
                    var: term.var,
                    kind: TermKind::Symmetrized { left: left * u * *scale, right: left * w },
                }),
                TermKind::Symmetrized { left, right } => {
                    out.terms.push(Term {
                        var: term.var,
                        kind: TermKind::Symmetrized { left: left * u, right: right * w },
                    });
                    out.terms.push(Term {
                        var: term.var,
                        kind: TermKind::Symmetrized { left: right * u, right: left * w },
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms.iter().map(|t| t.var).collect()
    }

    /// Linear part applied to `x` for variable `var` (all other variables zero).
    pub fn linear_part(&self, var: VarId, x: &SymMat) -> SymMat {
        let mut acc = Mat::zeros(self.dim, self.dim);
        for t in self.terms.iter().filter(|t| t.var == var) {
            acc += t.apply(x.as_mat());
        }
        SymMat::from_mat(acc)
    }

    pub fn eval(&self, assignment: &Assignment) -> Result<SymMat> {
        let mut acc = self.constant.as_mat().clone();
        for t in &self.terms {
            let x = assignment
                .get(t.var)
                .ok_or_else(|| Error::Domain(format!("no value assigned to variable {:?}", t.var)))?;
            if x.dim() != t.var_dim() {
                return Err(Error::Dimension(format!(
                    "variable {:?} has size {}, term expects {}",
                    t.var,
                    x.dim(),
                    t.var_dim()
                )));
            }
            acc += t.apply(x.as_mat());
        }
        Ok(SymMat::from_mat(acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rand_mat(rows: usize, cols: usize, seed: u64) -> Mat {
        Mat::from_fn(rows, cols, |i, j| (((i * 31 + j * 17) as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0)
    }

    fn rand_sym(dim: usize, seed: u64) -> SymMat {
        SymMat::from_mat(rand_mat(dim, dim, seed))
    }

    #[test]
    fn variable_evaluates_to_itself() {
        let v = VarId(0);
        let x = rand_sym(3, 5);
        let mut a = Assignment::default();
        a.insert(v, x.clone());
        assert_eq!(AffineSym::variable(v, 3).eval(&a).unwrap(), x);
    }

    #[test]
    fn missing_variable_is_an_error() {
        let f = AffineSym::variable(VarId(1), 2);
        assert!(f.eval(&Assignment::default()).is_err());
    }

    proptest! {
        #[test]
        fn congruence_and_sandwich_match_dense(seed in 0u64..1000) {
            let (p, q) = (VarId(0), VarId(1));
            let lq = rand_mat(2, 4, seed + 1);
            let f = AffineSym::variable(p, 4)
                .add(&AffineSym::congruence_of(q, lq.clone(), -1.5)).unwrap()
                .add(&AffineSym::constant(rand_sym(4, seed + 2))).unwrap();
            let mut a = Assignment::default();
            let xp = rand_sym(4, seed + 3);
            let xq = rand_sym(2, seed + 4);
            a.insert(p, xp.clone());
            a.insert(q, xq.clone());
            let dense = f.eval(&a).unwrap();

            let t = rand_mat(4, 3, seed + 5);
            let g = f.congruence(&t).unwrap().eval(&a).unwrap();
            let want = t.transpose() * dense.as_mat() * &t;
            prop_assert!((g.as_mat() - &want).abs().max() < 1e-12);

            let u = rand_mat(4, 5, seed + 6);
            let w = rand_mat(4, 5, seed + 7);
            let s = f.he_sandwich(&u, &w).unwrap();
            let h = s.he_sandwich(&rand_mat(5, 2, seed + 8), &rand_mat(5, 2, seed + 9)).unwrap().eval(&a).unwrap();
            let inner = u.transpose() * dense.as_mat() * &w;
            let inner = &inner + inner.transpose();
            let (u2, w2) = (rand_mat(5, 2, seed + 8), rand_mat(5, 2, seed + 9));
            let outer = u2.transpose() * &inner * &w2;
            let want = &outer + outer.transpose();
            prop_assert!((h.as_mat() - &want).abs().max() < 1e-10);

            // linearity: F(2x) - F0 = 2 (F(x) - F0)
            let lin = f.sub(&AffineSym::constant(f.constant.clone())).unwrap();
            let twice = lin.eval(&a.scaled(2.0)).unwrap();
            prop_assert!((twice.as_mat() - lin.eval(&a).unwrap().as_mat() * 2.0).abs().max() < 1e-12);
        }
    }
}
