//! Export of an [`LmiProblem`] in SDPA sparse format.
//!
//! The exported SDP is the margin-maximization problem solved internally,
//! in SDPA primal form `min cᵀx s.t. Σ F_i x_i − F_0 ⪰ 0`, where `x` lists
//! the upper-triangular coordinates of every variable followed by the
//! margin `t`. Off-diagonal coordinates use the `1/√2`-scaled basis.

use std::io::Write;

use super::ipm::StandardForm;
use super::LmiProblem;
use crate::error::{Error, Result};
use crate::linalg::Mat;

const ZERO_TOL: f64 = 1e-15;

pub fn write_sdpa<W: Write>(problem: &LmiProblem, out: &mut W) -> std::io::Result<()> {
    let sf = StandardForm::from_problem(problem);
    writeln!(out, "\"margin maximization: {} variables, {} constraints", problem.variables.len(), problem.constraints.len())?;
    writeln!(out, "{}", sf.m)?;
    writeln!(out, "{}", sf.blocks.len())?;
    let dims: Vec<String> = sf.blocks.iter().map(|b| b.dim().to_string()).collect();
    writeln!(out, "{}", dims.join(" "))?;
    let c: Vec<String> = (0..sf.m).map(|j| format!("{:e}", -sf.b[j])).collect();
    writeln!(out, "{}", c.join(" "))?;
    for (k, blk) in sf.blocks.iter().enumerate() {
        write_upper(out, 0, k + 1, &(-blk.constant()))?;
        for j in 0..sf.m {
            write_upper(out, j + 1, k + 1, &(-blk.dense(j)))?;
        }
    }
    Ok(())
}

fn write_upper<W: Write>(out: &mut W, mat: usize, blk: usize, m: &Mat) -> std::io::Result<()> {
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let v = m[(i, j)];
            if v.abs() > ZERO_TOL {
                writeln!(out, "{mat} {blk} {} {} {v:e}", i + 1, j + 1)?;
            }
        }
    }
    Ok(())
}

/// Dense contents of an SDPA sparse file.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpaData {
    pub c: Vec<f64>,
    pub block_dims: Vec<usize>,
    /// `matrices[i][k]` is block `k` of `F_i`.
    pub matrices: Vec<Vec<Mat>>,
}

pub fn read_sdpa(text: &str) -> Result<SdpaData> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse(format!("missing {what}")));
    let numbers = |n: usize, l: &str| -> Result<Vec<f64>> {
        l.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '(' || c == ')')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {n}: {e}"))))
            .collect()
    };

    let (n, l) = next("variable count")?;
    let m = numbers(n, l)?.first().copied().ok_or_else(|| Error::Parse(format!("line {n}: empty")))? as usize;
    let (n, l) = next("block count")?;
    let nb = numbers(n, l)?.first().copied().ok_or_else(|| Error::Parse(format!("line {n}: empty")))? as usize;
    let (n, l) = next("block structure")?;
    let block_dims: Vec<usize> = numbers(n, l)?.iter().take(nb).map(|d| d.abs() as usize).collect();
    if block_dims.len() != nb {
        return Err(Error::Parse(format!("line {n}: expected {nb} block sizes")));
    }
    let (n, l) = next("objective")?;
    let c = numbers(n, l)?;
    if c.len() != m {
        return Err(Error::Parse(format!("line {n}: expected {m} objective entries, found {}", c.len())));
    }
    let mut matrices: Vec<Vec<Mat>> =
        (0..=m).map(|_| block_dims.iter().map(|&d| Mat::zeros(d, d)).collect()).collect();
    for (n, l) in lines {
        let v = numbers(n, l)?;
        if v.len() != 5 {
            return Err(Error::Parse(format!("line {n}: expected 5 fields, found {}", v.len())));
        }
        let (mat, blk, i, j) = (v[0] as usize, v[1] as usize, v[2] as usize, v[3] as usize);
        if mat > m || blk == 0 || blk > nb || i == 0 || j == 0 || i > block_dims[blk - 1] || j > block_dims[blk - 1] {
            return Err(Error::Parse(format!("line {n}: entry out of range")));
        }
        let f = &mut matrices[mat][blk - 1];
        f[(i - 1, j - 1)] = v[4];
        f[(j - 1, i - 1)] = v[4];
    }
    Ok(SdpaData { c, block_dims, matrices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{AffineSym, VarId};
    use crate::lmi::{Sense, VarSign};

    #[test]
    fn round_trip_reproduces_constraints() {
        let mut p = LmiProblem::new(1e-6).unwrap();
        p.add_variable(VarId(0), "P", 2, VarSign::Free).unwrap();
        p.add_variable(VarId(1), "S", 1, VarSign::PositiveDefinite).unwrap();
        let a = Mat::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -2.0]);
        let lyap = AffineSym::variable(VarId(0), 2).he_sandwich(&Mat::identity(2, 2), &a).unwrap();
        let extra = AffineSym::congruence_of(VarId(1), Mat::from_row_slice(1, 2, &[1.0, -1.0]), 1.0);
        p.add_constraint("lyap", lyap.add(&extra).unwrap(), Sense::NegativeDefinite).unwrap();

        let mut buf = Vec::new();
        write_sdpa(&p, &mut buf).unwrap();
        let data = read_sdpa(std::str::from_utf8(&buf).unwrap()).unwrap();
        // P has 3 coordinates, S one, plus t
        assert_eq!(data.c, vec![-0.0, -0.0, -0.0, -0.0, -1.0]);
        assert_eq!(data.block_dims, vec![1, 2, 1]);

        // at x = (P = I, S = 1, t = 0): Σ F_i x_i − F_0 must equal the oriented constraints / scale
        let x = [1.0, 0.0, 1.0, 1.0, 0.0];
        let scales = p.constraint_scales();
        let mut assignment = crate::affine::Assignment::default();
        assignment.insert(VarId(0), crate::linalg::SymMat::identity(2));
        assignment.insert(VarId(1), crate::linalg::SymMat::identity(1));
        for (k, con) in p.constraints.iter().enumerate() {
            let mut acc = -&data.matrices[0][k];
            for (i, xi) in x.iter().enumerate() {
                acc += &data.matrices[i + 1][k] * *xi;
            }
            let want = con.oriented().eval(&assignment).unwrap().into_mat() / scales[k];
            assert!((acc - want).abs().max() < 1e-12);
        }
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(read_sdpa("").is_err());
        assert!(read_sdpa("1\n1\n2\n1.0\n1 1 3 1 1.0\n").is_err());
        assert!(read_sdpa("1\n1\n2\n1.0 2.0\n").is_err());
    }
}
