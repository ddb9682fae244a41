//! Plant, PDE uncertainty, projection filter and the interconnected realization.

use crate::error::{Error, Result};
use crate::legendre;
use crate::linalg::{block_diag, hstack, rank, vstack, Mat};

/// State-space realization `Ẋ = A X + B v`, `y = C X + D v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl LtiSystem {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "LTI blocks A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite entry in {name}")));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// State dimension `n`.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension `r`.
    pub fn r(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension `p`.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
}

/// Linear PDE `z_t = Σ_{k=0}^{m} F_k ∂ₓᵏ z` on `[0, 1]` with state width `l`.
///
/// The boundary trace is `𝓑_m(z) = col(z(0), z(1), …, ∂ₓ^{m−1}z(0), ∂ₓ^{m−1}z(1))`
/// and the boundary conditions read `K_𝓑 𝓑_m(z) = K y`. The signal fed back to
/// the plant is `w = L 𝓑_m(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSpec {
    pub order: usize,
    pub width: usize,
    pub coeffs: Vec<Mat>,
    pub k_boundary: Mat,
    pub k_input: Mat,
    pub output: Mat,
}

impl PdeSpec {
    pub fn new(coeffs: Vec<Mat>, k_boundary: Mat, k_input: Mat, output: Mat) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Domain("PDE needs at least F_0 and F_1".into()));
        }
        let order = coeffs.len() - 1;
        let width = coeffs[0].nrows();
        if coeffs.iter().any(|f| f.shape() != (width, width)) {
            return Err(Error::Dimension("all F_k must be l×l".into()));
        }
        if coeffs[order].iter().all(|&v| v == 0.0) {
            return Err(Error::Domain("leading coefficient F_m is zero".into()));
        }
        let ml = order * width;
        if k_boundary.shape() != (ml, 2 * ml) {
            return Err(Error::Dimension(format!("K_B is {:?}, expected ({ml}, {})", k_boundary.shape(), 2 * ml)));
        }
        if k_input.nrows() != ml {
            return Err(Error::Dimension(format!("K has {} rows, expected {ml}", k_input.nrows())));
        }
        if output.ncols() != 2 * ml {
            return Err(Error::Dimension(format!("L has {} columns, expected {}", output.ncols(), 2 * ml)));
        }
        if rank(&k_boundary, 1e-9) < ml {
            return Err(Error::Domain("K_B is not full row rank".into()));
        }
        Ok(Self { order, width, coeffs, k_boundary, k_input, output })
    }

    /// Transport equation `z_t = −ρ z_x`, inflow `z(0) = y`, outflow `w = z(1)`.
    pub fn transport(width: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("transport speed must be positive, got {rho}")));
        }
        let i = Mat::identity(width, width);
        let z = Mat::zeros(width, width);
        Self::new(vec![z.clone(), -&i * rho], hstack(&[&i, &z]), i.clone(), hstack(&[&z, &i]))
    }

    /// Width of the boundary trace, `2ml`.
    pub fn trace_width(&self) -> usize {
        2 * self.order * self.width
    }

    /// Width of the boundary-condition input `y`.
    pub fn input_width(&self) -> usize {
        self.k_input.ncols()
    }
}

/// Projection filter `Ψ_N` producing `ψ_N = col(𝓑_m(z), ξ_N)`.
///
/// `inner` packs `B = [B_y B_𝓑]` and `D = [D_y D_𝓑]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRealization {
    pub inner: LtiSystem,
    pub order: usize,
    pub n_xi: usize,
    pub p_psi: usize,
    pub input_width: usize,
    pub trace_width: usize,
}

impl FilterRealization {
    pub fn a_psi(&self) -> &Mat {
        &self.inner.a
    }

    pub fn b_y(&self) -> Mat {
        self.inner.b.columns(0, self.input_width).into_owned()
    }

    pub fn b_trace(&self) -> Mat {
        self.inner.b.columns(self.input_width, self.trace_width).into_owned()
    }

    pub fn c_psi(&self) -> &Mat {
        &self.inner.c
    }

    pub fn d_y(&self) -> Mat {
        self.inner.d.columns(0, self.input_width).into_owned()
    }

    pub fn d_trace(&self) -> Mat {
        self.inner.d.columns(self.input_width, self.trace_width).into_owned()
    }
}

/// Builds `Ψ_N` for a first- or second-order PDE.
pub fn build_filter(pde: &PdeSpec, order: usize) -> Result<FilterRealization> {
    let m = pde.order;
    if !(1..=2).contains(&m) {
        return Err(Error::UnsupportedOrder(m));
    }
    let l = pde.width;
    let n_xi = (order + 1) * l;
    let tw = pde.trace_width();
    let p = pde.input_width();
    let p_psi = tw + n_xi;

    let lmat = legendre::deriv_matrix(order, l);
    let f_tilde: Vec<Mat> = pde.coeffs.iter().map(|f| block_diag(&vec![f.clone(); order + 1])).collect();

    // A_Ψ = Σ_i (−1)^i F̃_i L_Nⁱ
    let mut a_psi = Mat::zeros(n_xi, n_xi);
    let mut lpow = Mat::identity(n_xi, n_xi);
    for (i, ft) in f_tilde.iter().enumerate() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        a_psi += ft * &lpow * sign;
        lpow = &lpow * &lmat;
    }

    // [−𝟙*_N  𝟙_N] acting on (∂ⁱz(0), ∂ⁱz(1))
    let mut ends = Mat::zeros(n_xi, 2 * l);
    for k in 0..=order {
        let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
        for d in 0..l {
            ends[(k * l + d, d)] = -alt;
            ends[(k * l + d, l + d)] = 1.0;
        }
    }
    let neg_l = -&lmat;
    let mut b_cols = Vec::with_capacity(m);
    for i in 1..=m {
        // B_i = Σ_{j=i}^m F̃_j (−L_N)^{j−i} [−𝟙* 𝟙]
        let mut bi = Mat::zeros(n_xi, 2 * l);
        let mut pw = Mat::identity(n_xi, n_xi);
        for ft in &f_tilde[i..=m] {
            bi += ft * &pw * &ends;
            pw = &pw * &neg_l;
        }
        b_cols.push(bi);
    }
    let b_trace = hstack(&b_cols.iter().collect::<Vec<_>>());
    let b_y = Mat::zeros(n_xi, p);

    let c_psi = vstack(&[&Mat::zeros(tw, n_xi), &Mat::identity(n_xi, n_xi)]);
    let d_trace = vstack(&[&Mat::identity(tw, tw), &Mat::zeros(n_xi, tw)]);
    let d_y = Mat::zeros(p_psi, p);

    let inner = LtiSystem::new(a_psi, hstack(&[&b_y, &b_trace]), c_psi, hstack(&[&d_y, &d_trace]))?;
    Ok(FilterRealization { inner, order, n_xi, p_psi, input_width: p, trace_width: tw })
}

/// Realization of `Ψ col(G L, I)` with state `col(ξ, X)` and input `𝓑_m(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interconnection {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl Interconnection {
    /// Dimension of `col(ξ, X)`.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn trace_width(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }
}

pub fn build_interconnection(plant: &LtiSystem, filt: &FilterRealization, output: &Mat) -> Result<Interconnection> {
    let tw = filt.trace_width;
    if output.shape() != (plant.r(), tw) {
        return Err(Error::Dimension(format!(
            "L is {:?}, expected ({}, {tw})",
            output.shape(),
            plant.r()
        )));
    }
    if plant.p() != filt.input_width {
        return Err(Error::Dimension(format!(
            "plant output width {} does not match filter input width {}",
            plant.p(),
            filt.input_width
        )));
    }
    let (n, nx) = (plant.n(), filt.n_xi);
    let b_y = filt.b_y();
    let d_y = filt.d_y();

    let a = vstack(&[&hstack(&[filt.a_psi(), &(&b_y * &plant.c)]), &hstack(&[&Mat::zeros(n, nx), &plant.a])]);
    let b = vstack(&[&(&b_y * &plant.d * output + filt.b_trace()), &(&plant.b * output)]);
    let c = hstack(&[filt.c_psi(), &(&d_y * &plant.c)]);
    let d = &d_y * &plant.d * output + filt.d_trace();
    Ok(Interconnection { a, b, c, d })
}

/// Time-delay system `Ẋ = A X + B X(t−h)` written as a plant coupled to a
/// transport equation with speed `ρ = 1/h`.
pub fn example_tds(a: &Mat, b: &Mat, h: f64) -> Result<(LtiSystem, PdeSpec)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("delay must be positive, got {h}")));
    }
    let n = a.nrows();
    if !a.is_square() || b.shape() != (n, n) {
        return Err(Error::Dimension(format!("A {:?} and B {:?} must be square of equal size", a.shape(), b.shape())));
    }
    let plant = LtiSystem::new(a.clone(), b.clone(), Mat::identity(n, n), Mat::zeros(n, n))?;
    Ok((plant, PdeSpec::transport(n, 1.0 / h)?))
}

/// Heat equation `z_t = γ z_xx` with `z(0) = C X`, `z_x(1) = 0`, and `w = z(1)`.
pub fn example_heat(plant: &LtiSystem, gamma: f64) -> Result<PdeSpec> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("diffusivity must be positive, got {gamma}")));
    }
    let l = plant.p();
    let i = Mat::identity(l, l);
    let z = Mat::zeros(l, l);
    let k_boundary = vstack(&[&hstack(&[&i, &z, &z, &z]), &hstack(&[&z, &z, &z, &i])]);
    let k_input = vstack(&[&i, &z]);
    let output = hstack(&[&z, &i, &z, &z]);
    PdeSpec::new(vec![z.clone(), z, &i * gamma], k_boundary, k_input, output)
}

/// Regenerative chatter benchmark: a four-state machining model with gain `k`.
pub fn chatter(k: f64) -> (Mat, Mat) {
    #[rustfmt::skip]
    let a = Mat::from_row_slice(4, 4, &[
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        -10.0 - k, 10.0, 0.0, 0.0,
        5.0, -15.0, 0.0, -0.25,
    ]);
    let mut b = Mat::zeros(4, 4);
    b[(2, 0)] = k;
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    #[test]
    fn transport_filter_order_zero() {
        let rho = 2.5;
        let pde = PdeSpec::transport(3, rho).unwrap();
        let f = build_filter(&pde, 0).unwrap();
        assert_eq!(f.a_psi(), &Mat::zeros(3, 3));
        let i = Mat::identity(3, 3);
        assert_eq!(f.b_trace(), hstack(&[&(&i * rho), &(&i * -rho)]));
        assert_eq!(f.n_xi, 3);
        assert_eq!(f.p_psi, 6 + 3);
    }

    #[test]
    fn transport_filter_order_one_scalar() {
        let rho = 0.7;
        let f = build_filter(&PdeSpec::transport(1, rho).unwrap(), 1).unwrap();
        assert_eq!(f.a_psi(), &(Mat::from_row_slice(2, 2, &[0.0, 0.0, 2.0, 0.0]) * rho));
        assert_eq!(f.b_trace(), Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, -1.0]) * rho);
    }

    #[test]
    fn filter_output_stacks_trace_over_state() {
        for (pde, n) in [(PdeSpec::transport(2, 1.0).unwrap(), 3), (heat_scalar(), 2)] {
            let f = build_filter(&pde, n).unwrap();
            let tw = pde.trace_width();
            let d = f.d_trace();
            assert_eq!(d.rows(0, tw).into_owned(), Mat::identity(tw, tw));
            assert!(d.rows(tw, f.n_xi).iter().all(|&v| v == 0.0));
            assert!(f.b_y().iter().all(|&v| v == 0.0));
            assert!(f.d_y().iter().all(|&v| v == 0.0));
            assert_eq!(f.p_psi, tw + f.n_xi);
        }
    }

    fn heat_scalar() -> PdeSpec {
        let plant = LtiSystem::new(
            Mat::from_element(1, 1, -1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::zeros(1, 1),
        )
        .unwrap();
        example_heat(&plant, 1.0).unwrap()
    }

    #[test]
    fn heat_example_shapes() {
        let pde = heat_scalar();
        assert_eq!(pde.order, 2);
        assert_eq!(pde.k_boundary, Mat::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]));
        assert_eq!(pde.k_input, Mat::from_row_slice(2, 1, &[1.0, 0.0]));
        let f = build_filter(&pde, 0).unwrap();
        assert_eq!(f.a_psi(), &Mat::zeros(1, 1));
    }

    #[test]
    fn rejects_third_order() {
        let z = Mat::zeros(1, 1);
        let one = Mat::from_element(1, 1, 1.0);
        let kb = Mat::from_fn(3, 6, |i, j| if i == j { 1.0 } else { 0.0 });
        let pde = PdeSpec::new(vec![z.clone(), z.clone(), z, one], kb, Mat::zeros(3, 1), Mat::zeros(1, 6)).unwrap();
        assert_eq!(build_filter(&pde, 2), Err(Error::UnsupportedOrder(3)));
    }

    #[test]
    fn tds_example_selectors() {
        let (a, b) = chatter(2.0);
        let (plant, pde) = example_tds(&a, &b, 0.5).unwrap();
        assert_eq!(pde.coeffs[1], Mat::identity(4, 4) * -2.0);
        assert_eq!(plant.c, Mat::identity(4, 4));
        let trace = Vector::from_fn(8, |i, _| i as f64 + 1.0);
        let z0 = Vector::from_fn(4, |i, _| i as f64 + 1.0);
        let z1 = Vector::from_fn(4, |i, _| i as f64 + 5.0);
        assert_eq!(&pde.k_boundary * &trace, z0);
        assert_eq!(&pde.output * &trace, z1);
        assert!(example_tds(&a, &b, 0.0).is_err());
        assert!(example_tds(&a, &b, -1.0).is_err());
    }

    #[test]
    fn interconnection_reduces_for_projection_filter() {
        let (a, b) = chatter(2.0);
        let (plant, pde) = example_tds(&a, &b, 0.3).unwrap();
        for order in [0, 2] {
            let f = build_filter(&pde, order).unwrap();
            let sys = build_interconnection(&plant, &f, &pde.output).unwrap();
            assert_eq!(sys.a, block_diag(&[f.a_psi().clone(), plant.a.clone()]));
            assert_eq!(sys.b, vstack(&[&f.b_trace(), &(&plant.b * &pde.output)]));
            assert_eq!(sys.c, hstack(&[f.c_psi(), &Mat::zeros(f.p_psi, 4)]));
            assert_eq!(sys.d, f.d_trace());
        }
    }

    #[test]
    fn zero_plant_interconnection() {
        let z = Mat::zeros(1, 1);
        let plant = LtiSystem::new(z.clone(), z.clone(), z.clone(), z).unwrap();
        let pde = PdeSpec::transport(1, 3.0).unwrap();
        let f = build_filter(&pde, 0).unwrap();
        let sys = build_interconnection(&plant, &f, &pde.output).unwrap();
        assert_eq!(sys.a, block_diag(&[f.a_psi().clone(), Mat::zeros(1, 1)]));
    }

    #[test]
    fn chatter_interconnection_is_block_diagonal() {
        let (a, b) = chatter(2.0);
        let (plant, pde) = example_tds(&a, &b, 0.5).unwrap();
        let f = build_filter(&pde, 0).unwrap();
        let sys = build_interconnection(&plant, &f, &pde.output).unwrap();
        assert_eq!(sys.a.shape(), (8, 8));
        assert!(sys.a.view((0, 4), (4, 4)).iter().all(|&v| v == 0.0));
        assert!(sys.a.view((4, 0), (4, 4)).iter().all(|&v| v == 0.0));
        assert_eq!(sys.a.view((4, 4), (4, 4)).into_owned(), a);
    }

    #[test]
    fn output_map_reproduces_psi() {
        let (a, b) = chatter(2.0);
        let (plant, pde) = example_tds(&a, &b, 0.5).unwrap();
        let f = build_filter(&pde, 2).unwrap();
        let sys = build_interconnection(&plant, &f, &pde.output).unwrap();
        let xi = Vector::from_fn(12, |i, _| (i as f64 * 0.37).sin());
        let x = Vector::from_fn(4, |i, _| (i as f64 * 1.1).cos());
        let trace = Vector::from_fn(8, |i, _| i as f64 - 2.5);
        let state = Vector::from_iterator(16, xi.iter().chain(x.iter()).copied());
        let psi = &sys.c * state + &sys.d * &trace;
        let want = Vector::from_iterator(20, trace.iter().chain(xi.iter()).copied());
        assert_eq!(psi, want);
    }

    #[test]
    fn interconnection_dimension_checks() {
        let (a, b) = chatter(2.0);
        let (plant, pde) = example_tds(&a, &b, 0.5).unwrap();
        let f = build_filter(&pde, 1).unwrap();
        assert!(build_interconnection(&plant, &f, &Mat::zeros(3, 8)).is_err());
    }

    #[test]
    fn pde_validation() {
        let i = Mat::identity(1, 1);
        let z = Mat::zeros(1, 1);
        // zero leading coefficient
        assert!(PdeSpec::new(vec![i.clone(), z.clone()], hstack(&[&i, &z]), i.clone(), hstack(&[&z, &i])).is_err());
        // rank-deficient K_B
        assert!(PdeSpec::new(vec![z.clone(), i.clone()], Mat::zeros(1, 2), i.clone(), hstack(&[&z, &i])).is_err());
        assert!(example_heat(&LtiSystem::new(z.clone(), z.clone(), i.clone(), z.clone()).unwrap(), 0.0).is_err());
    }
}
