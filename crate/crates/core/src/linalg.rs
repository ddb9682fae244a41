//! Dense real matrix kernels shared by the rest of the crate.
//!
//! Everything here is small (the largest matrix in the benchmark pipeline is
//! roughly 44×44), so plain dense storage is used throughout.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Dense real matrix, row/column counts carried by the storage.
pub type Mat = DMatrix<f64>;
/// Dense real column vector.
pub type Vector = DVector<f64>;

/// Symmetric matrix.
///
/// Construction always symmetrizes, so downstream code can rely on exact
/// symmetry regardless of round-off in how the entries were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat(Mat);

impl SymMat {
    /// Symmetrizes `m` as `(m + mᵀ) / 2`.
    ///
    /// Panics if `m` is not square.
    pub fn from_mat(m: Mat) -> Self {
        assert!(m.is_square(), "SymMat needs a square matrix, got {}x{}", m.nrows(), m.ncols());
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(Mat::from_diagonal(&Vector::from_column_slice(d)))
    }

    /// Builds from the upper triangle, row by row (`dim(dim+1)/2` entries).
    pub fn from_upper(dim: usize, upper: &[f64]) -> Self {
        assert_eq!(upper.len(), dim * (dim + 1) / 2);
        let mut m = Mat::zeros(dim, dim);
        let mut idx = 0;
        for i in 0..dim {
            for j in i..dim {
                m[(i, j)] = upper[idx];
                m[(j, i)] = upper[idx];
                idx += 1;
            }
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(&self.0 * c)
    }

    pub fn shifted(&self, c: f64) -> Self {
        let n = self.dim();
        Self(&self.0 + Mat::identity(n, n) * c)
    }

    /// Quadratic form `vᵀ S v`.
    pub fn quad(&self, v: &Vector) -> f64 {
        v.dot(&(&self.0 * v))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Add for &SymMat {
    type Output = SymMat;
    fn add(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &SymMat {
    type Output = SymMat;
    fn sub(self, rhs: &SymMat) -> SymMat {
        SymMat(&self.0 - &rhs.0)
    }
}

/// Orthonormal basis of the null space of `k`.
///
/// The rank is the number of singular values above `tol · σ_max`. A full-rank
/// square `k` yields a matrix with zero columns.
pub fn nullspace_basis(k: &Mat, tol: f64) -> Mat {
    assert!(tol > 0.0, "nullspace tolerance must be positive");
    let (rows, cols) = k.shape();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    // Pad to square so the SVD returns a complete right singular basis.
    let n = rows.max(cols);
    let mut padded = Mat::zeros(n, cols);
    padded.rows_mut(0, rows).copy_from(k);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma_max = svd.singular_values.max();
    let cutoff = tol * sigma_max;
    let null_rows: Vec<usize> = (0..cols)
        .filter(|&i| sigma_max == 0.0 || svd.singular_values[i] <= cutoff)
        .collect();
    let mut basis = Mat::zeros(cols, null_rows.len());
    for (c, &i) in null_rows.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    basis
}

/// Numerical rank with the same relative threshold as [`nullspace_basis`].
pub fn rank(k: &Mat, tol: f64) -> usize {
    if k.is_empty() {
        return 0;
    }
    let sv = k.clone().svd(false, false).singular_values;
    let cutoff = tol * sv.max();
    sv.iter().filter(|&&s| s > cutoff && s > 0.0).count()
}

/// Block-diagonal concatenation.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation; all blocks must share the row count.
pub fn hstack(blocks: &[&Mat]) -> Mat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    assert!(blocks.iter().all(|b| b.nrows() == rows), "hstack row mismatch");
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), b.shape()).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation; all blocks must share the column count.
pub fn vstack(blocks: &[&Mat]) -> Mat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    assert!(blocks.iter().all(|b| b.ncols() == cols), "vstack column mismatch");
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), b.shape()).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// `a ⊗ I_l`.
pub fn kron_identity(a: &Mat, l: usize) -> Mat {
    let mut out = Mat::zeros(a.nrows() * l, a.ncols() * l);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[(i, j)];
            if v != 0.0 {
                for d in 0..l {
                    out[(i * l + d, j * l + d)] = v;
                }
            }
        }
    }
    out
}

/// Rows `[0 .. I_l (block `index`) .. 0]` selecting one `l`-block out of `blocks`.
pub fn block_selector(index: usize, l: usize, blocks: usize) -> Mat {
    let mut out = Mat::zeros(l, l * blocks);
    for d in 0..l {
        out[(d, index * l + d)] = 1.0;
    }
    out
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(s: &SymMat) -> Result<Vec<f64>> {
    if !s.is_finite() {
        return Err(Error::NonFinite("symmetric eigenvalue input"));
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(s.as_mat().clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn sym_eig_min(s: &SymMat) -> Result<f64> {
    if s.dim() == 0 {
        return Err(Error::Dimension("sym_eig_min of an empty matrix".into()));
    }
    Ok(sym_eigenvalues(s)?[0])
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nullspace_of_identity_is_empty() {
        let n = nullspace_basis(&Mat::identity(2, 2), 1e-9);
        assert_eq!(n.ncols(), 0);
        assert_eq!(n.nrows(), 2);
    }

    #[test]
    fn nullspace_of_difference_row() {
        let k = Mat::from_row_slice(1, 2, &[1.0, -1.0]);
        let n = nullspace_basis(&k, 1e-9);
        assert_eq!(n.ncols(), 1);
        let s = 1.0 / 2f64.sqrt();
        // sign of a singular vector is arbitrary
        assert_abs_diff_eq!(n[(0, 0)].abs(), s, epsilon = 1e-14);
        assert_abs_diff_eq!(n[(0, 0)], n[(1, 0)], epsilon = 1e-14);
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let n = nullspace_basis(&Mat::zeros(2, 3), 1e-9);
        assert_eq!(n.ncols(), 3);
    }

    #[test]
    fn block_diag_examples() {
        let a = block_diag(&[Mat::from_element(1, 1, 1.0), Mat::from_element(1, 1, 2.0)]);
        assert_eq!(a, Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]));
        assert_eq!(block_diag(&[]).shape(), (0, 0));
        let b = block_diag(&[Mat::identity(2, 2), Mat::from_element(1, 1, 3.0)]);
        assert_eq!(b, Mat::from_diagonal(&Vector::from_vec(vec![1.0, 1.0, 3.0])));
    }

    #[test]
    fn eig_min_examples() {
        assert_abs_diff_eq!(sym_eig_min(&SymMat::from_diagonal(&[1.0, 2.0])).unwrap(), 1.0, epsilon = 1e-14);
        let swap = SymMat::from_mat(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_abs_diff_eq!(sym_eig_min(&swap).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_min_rejects_nan() {
        let s = SymMat::from_diagonal(&[1.0, f64::NAN]);
        assert!(matches!(sym_eig_min(&s), Err(Error::NonFinite(_))));
    }

    #[test]
    fn eig_min_matches_jacobi_rotation_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = Mat::from_fn(10, 10, |_, _| rng.gen_range(-1.0..1.0));
            let s = SymMat::from_mat(a);
            let want = jacobi_eig_min(s.as_mat());
            assert_abs_diff_eq!(sym_eig_min(&s).unwrap(), want, epsilon = 1e-8);
        }
    }

    /// Cyclic Jacobi sweeps; independent of nalgebra's tridiagonal QR.
    fn jacobi_eig_min(a: &Mat) -> f64 {
        let mut a = a.clone();
        let n = a.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
            if off < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[(i, i)]).fold(f64::INFINITY, f64::min)
    }
}
