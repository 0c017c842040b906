//! Slack integral constructions: quadratic forms that vanish identically on
//! the state space (fundamental theorem of calculus, Green's theorem) or on
//! the boundary-condition subspace, used to cancel conservatism in the
//! derivative inequality.

use crate::basisproj::{projection_matrices, BasisError, StackLayout};
use crate::funceval::{EvalError, FunctionalForm};
use crate::polyalg::{Poly, PolyError, PolyMatrix, Var};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SlackError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("slack shape error: {0}")]
    Shape(String),
}

/// Projection matrices for one layout, computed once per assembly.
#[derive(Clone, Debug)]
pub struct Projections {
    pub nd: PolyMatrix,
    pub n: PolyMatrix,
    pub n0: PolyMatrix,
    pub n1: PolyMatrix,
    pub layout: StackLayout,
}

impl Projections {
    pub fn new(layout: StackLayout) -> Result<Self, BasisError> {
        let (nd, n, n0, n1) = projection_matrices(&layout)?;
        Ok(Self {
            nd,
            n,
            n0,
            n1,
            layout,
        })
    }
}

/// Free parameters of the combined slack functional.
///
/// Shapes (`ba = beta*alpha`): `k1: ba x ba` in x; `k2: ba x 2ba` in x;
/// `h1, h2: ba x ba` in (x,y); `b1: beta(alpha+1) x ba` in x;
/// `b2: 2ba x ba` in x.
#[derive(Clone, Debug)]
pub struct SlackParams {
    pub k1: PolyMatrix,
    pub k2: PolyMatrix,
    pub h1: PolyMatrix,
    pub h2: PolyMatrix,
    pub b1: PolyMatrix,
    pub b2: PolyMatrix,
}

impl SlackParams {
    pub fn zero(layout: &StackLayout) -> Self {
        let ba = layout.beta * layout.alpha;
        Self {
            k1: PolyMatrix::zeros(ba, ba),
            k2: PolyMatrix::zeros(ba, 2 * ba),
            h1: PolyMatrix::zeros(ba, ba),
            h2: PolyMatrix::zeros(ba, ba),
            b1: PolyMatrix::zeros(layout.dim_stack(), ba),
            b2: PolyMatrix::zeros(2 * ba, ba),
        }
    }

    pub fn eval_decisions(&self, values: &[f64]) -> Self {
        Self {
            k1: self.k1.eval_decisions(values),
            k2: self.k2.eval_decisions(values),
            h1: self.h1.eval_decisions(values),
            h2: self.h2.eval_decisions(values),
            b1: self.b1.eval_decisions(values),
            b2: self.b2.eval_decisions(values),
        }
    }
}

fn expect_shape(m: &PolyMatrix, r: usize, c: usize, what: &str) -> Result<(), SlackError> {
    if m.rows() != r || m.cols() != c {
        return Err(SlackError::Shape(format!(
            "{what} must be {r}x{c}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// The FTC quadratic form `K_b`, built from
///
/// ```text
/// K_b1 = N^T dx K1 N + N^T K1 Nd + Nd^T K1 N
/// K_b2 = Nd^T K2 + N^T dx K2
/// K_b3 = N0^T K1(0) N0 - N1^T K1(1) N1 + N0^T K2(0) - N1^T K2(1)
/// ```
///
/// so that `int wbar^T He(K_b) wbar dx = 0` for every state. The boundary
/// block uses `N0^T`/`N1^T` on the `K2` terms; that is the unique placement
/// that makes the block `2*beta*alpha` square and the identity hold.
pub fn make_kb(
    k1: &PolyMatrix,
    k2: &PolyMatrix,
    proj: &Projections,
) -> Result<PolyMatrix, SlackError> {
    let layout = &proj.layout;
    let ba = layout.beta * layout.alpha;
    expect_shape(k1, ba, ba, "K1")?;
    expect_shape(k2, ba, 2 * ba, "K2")?;
    let (n, nd, n0, n1) = (&proj.n, &proj.nd, &proj.n0, &proj.n1);
    let nt = n.transpose();
    let ndt = nd.transpose();

    let kb1 = nt
        .mul(&k1.diff(Var::X))?
        .mul(n)?
        .add(&nt.mul(k1)?.mul(nd)?)?
        .add(&ndt.mul(k1)?.mul(n)?)?;
    let kb2 = ndt.mul(k2)?.add(&nt.mul(&k2.diff(Var::X))?)?;
    let k1_0 = k1.substitute_num(Var::X, 0.0)?;
    let k1_1 = k1.substitute_num(Var::X, 1.0)?;
    let k2_0 = k2.substitute_num(Var::X, 0.0)?;
    let k2_1 = k2.substitute_num(Var::X, 1.0)?;
    let kb3 = n0
        .transpose()
        .mul(&k1_0)?
        .mul(n0)?
        .sub(&n1.transpose().mul(&k1_1)?.mul(n1)?)?
        .add(&n0.transpose().mul(&k2_0)?)?
        .sub(&n1.transpose().mul(&k2_1)?)?;

    let nf = layout.dim_full();
    let ns = layout.dim_stack();
    let mut kb = PolyMatrix::zeros(nf, nf);
    kb.insert_block(0, 0, &kb1);
    kb.insert_block(0, ns, &kb2);
    kb.insert_block(ns, ns, &kb3);
    Ok(kb)
}

/// The Green's-theorem pair `(H_b, Hbar)`:
///
/// ```text
/// H_b = [[-N^T (H1(x,x)+H2(x,x)) N,  N^T H1(x,0) N0],
///        [N1^T H2(1,x) N,            0             ]]
/// Hbar = 1/2 N^T (dy H1 - dx H2) N + 1/2 (N^T H1 Nd - Nd^T H2 N)
/// ```
///
/// satisfying `int wbar^T He(H_b) wbar dx + int_D w_a^T Gamma[Hbar] w_a = 0`.
pub fn make_hb_hbar(
    h1: &PolyMatrix,
    h2: &PolyMatrix,
    proj: &Projections,
) -> Result<(PolyMatrix, PolyMatrix), SlackError> {
    let layout = &proj.layout;
    let ba = layout.beta * layout.alpha;
    expect_shape(h1, ba, ba, "H1")?;
    expect_shape(h2, ba, ba, "H2")?;
    let (n, nd, n0, n1) = (&proj.n, &proj.nd, &proj.n0, &proj.n1);
    let nt = n.transpose();

    let x = Poly::var(Var::X);
    let h1_diag = h1.substitute_poly(Var::Y, &x)?;
    let h2_diag = h2.substitute_poly(Var::Y, &x)?;
    let hb1 = nt.mul(&h1_diag.add(&h2_diag)?)?.mul(n)?.neg();
    let h1_x0 = h1.substitute_num(Var::Y, 0.0)?;
    let hb2 = nt.mul(&h1_x0)?.mul(n0)?;
    // H2(1, x): first argument 1, second x.
    let h2_1x = h2
        .substitute_num(Var::X, 1.0)?
        .substitute_poly(Var::Y, &x)?;
    let hb3 = n1.transpose().mul(&h2_1x)?.mul(n)?;

    let nf = layout.dim_full();
    let ns = layout.dim_stack();
    let mut hb = PolyMatrix::zeros(nf, nf);
    hb.insert_block(0, 0, &hb1);
    hb.insert_block(0, ns, &hb2);
    hb.insert_block(ns, 0, &hb3);

    let hbar = nt
        .mul(&h1.diff(Var::Y).sub(&h2.diff(Var::X))?)?
        .mul(n)?
        .scale(0.5)
        .add(
            &nt.mul(h1)?
                .mul(nd)?
                .sub(&nd.transpose().mul(h2)?.mul(n)?)?
                .scale(0.5),
        )?;
    Ok((hb, hbar))
}

/// The boundary quadratic form `B_b = [[0, B1 F], [0, B2 F]]`, identically
/// zero on the subspace where `F w_alpha^b = 0`.
pub fn make_bb(
    b1: &PolyMatrix,
    b2: &PolyMatrix,
    f: &PolyMatrix,
    layout: &StackLayout,
) -> Result<PolyMatrix, SlackError> {
    let ba = layout.beta * layout.alpha;
    expect_shape(b1, layout.dim_stack(), ba, "B1")?;
    expect_shape(b2, 2 * ba, ba, "B2")?;
    expect_shape(f, ba, 2 * ba, "F")?;
    let nf = layout.dim_full();
    let ns = layout.dim_stack();
    let mut bb = PolyMatrix::zeros(nf, nf);
    bb.insert_block(0, ns, &b1.mul(f)?);
    bb.insert_block(ns, ns, &b2.mul(f)?);
    Ok(bb)
}

/// The combined slack functional
/// `S(w) = int wbar^T He(K_b + H_b + B_b) wbar dx + int_D w_a Gamma[Hbar] w_a`,
/// vanishing on the boundary-condition subspace.
pub fn make_slack(
    params: &SlackParams,
    f: &PolyMatrix,
    proj: &Projections,
) -> Result<FunctionalForm, SlackError> {
    let kb = make_kb(&params.k1, &params.k2, proj)?;
    let (hb, hbar) = make_hb_hbar(&params.h1, &params.h2, proj)?;
    let bb = make_bb(&params.b1, &params.b2, f, &proj.layout)?;
    let total = kb.add(&hb)?.add(&bb)?.he()?;
    FunctionalForm::new_alpha(proj.layout, total, hbar).map_err(|e| match e {
        EvalError::Shape(s) => SlackError::Shape(s),
        other => SlackError::Shape(other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funceval::{evaluate, TestFunction};
    use crate::pdemodel::builtin;
    use crate::polyalg::parse_poly;

    fn proj11() -> Projections {
        Projections::new(StackLayout::new(1, 1)).unwrap()
    }

    #[test]
    fn ftc_unit_k1_block() {
        // alpha=1, beta=1, K1 = 1, K2 = 0:
        // He(K_b) = [[0,1,0,0],[1,0,0,0],[0,0,-1,0],[0,0,0,1]]
        let proj = proj11();
        let kb = make_kb(
            &PolyMatrix::identity(1),
            &PolyMatrix::zeros(1, 2),
            &proj,
        )
        .unwrap();
        let he = kb.he().unwrap();
        let expect = PolyMatrix::from_real(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        assert_eq!(he, expect);

        // zero params -> zero
        let kb0 = make_kb(&PolyMatrix::zeros(1, 1), &PolyMatrix::zeros(1, 2), &proj).unwrap();
        assert!(kb0.is_zero());
    }

    #[test]
    fn ftc_linear_k1_blocks() {
        // K1 = x: K_b1 = [[1,x],[x,0]], K_b3 = diag(-1, 0)
        let proj = proj11();
        let k1 = PolyMatrix::from_fn(1, 1, |_, _| Poly::var(Var::X));
        let kb = make_kb(&k1, &PolyMatrix::zeros(1, 2), &proj).unwrap();
        assert_eq!(kb.get(0, 0).as_constant(), Some(1.0));
        assert_eq!(kb.get(0, 1), &parse_poly("x").unwrap());
        assert_eq!(kb.get(1, 0), &parse_poly("x").unwrap());
        assert!(kb.get(1, 1).is_zero());
        assert_eq!(kb.get(2, 2).as_constant(), Some(-1.0));
        assert!(kb.get(3, 3).is_zero());
    }

    #[test]
    fn greens_unit_h1_blocks() {
        // alpha=1, beta=1, H1 = 1, H2 = 0:
        // Hbar = 1/2 N^T Nd = [[0, 1/2],[0,0]], H_b1 = -N^T N, H_b2 = N^T N0
        let proj = proj11();
        let (hb, hbar) = make_hb_hbar(&PolyMatrix::identity(1), &PolyMatrix::zeros(1, 1), &proj)
            .unwrap();
        assert_eq!(hbar.get(0, 1).as_constant(), Some(0.5));
        assert!(hbar.get(0, 0).is_zero() && hbar.get(1, 0).is_zero() && hbar.get(1, 1).is_zero());
        assert_eq!(hb.get(0, 0).as_constant(), Some(-1.0));
        assert_eq!(hb.get(0, 2).as_constant(), Some(0.0));
        assert_eq!(hb.get(0, 3).as_constant(), Some(1.0)); // N^T H1(x,0) N0
    }

    #[test]
    fn greens_bilinear_h1() {
        // H1 = x*y: dy H1 = x, so Hbar(0,0) = x/2
        let proj = proj11();
        let h1 = PolyMatrix::from_fn(1, 1, |_, _| parse_poly("x").unwrap()
            .try_mul(&Poly::var(Var::Y)).unwrap());
        let (_, hbar) = make_hb_hbar(&h1, &PolyMatrix::zeros(1, 1), &proj).unwrap();
        assert_eq!(hbar.get(0, 0), &parse_poly("0.5*x").unwrap());
    }

    #[test]
    fn boundary_block_placement() {
        // alpha=1, beta=1, F=[1,-1], B1=[1;0], B2=0: top-right row = [1,-1]
        let layout = StackLayout::new(1, 1);
        let f = PolyMatrix::from_real(1, 2, &[1.0, -1.0]);
        let b1 = PolyMatrix::from_real(2, 1, &[1.0, 0.0]);
        let b2 = PolyMatrix::zeros(2, 1);
        let bb = make_bb(&b1, &b2, &f, &layout).unwrap();
        assert_eq!(bb.get(0, 2).as_constant(), Some(1.0));
        assert_eq!(bb.get(0, 3).as_constant(), Some(-1.0));
        assert!(bb.get(1, 2).is_zero());
        // zero B -> zero
        let bb0 = make_bb(&PolyMatrix::zeros(2, 1), &b2, &f, &layout).unwrap();
        assert!(bb0.is_zero());
    }

    #[test]
    fn b_slack_vanishes_on_boundary_functions() {
        // Example 1 boundary conditions; w = 3x^2 - 2x^3 has w(0)=0, w'(1)=0
        let model = builtin("example1").unwrap().instantiate(1.0).unwrap();
        let proj = Projections::new(model.layout).unwrap();
        let mut params = SlackParams::zero(&model.layout);
        params.b1 = PolyMatrix::from_fn(3, 2, |i, j| {
            Poly::constant(((i + 2 * j) % 3) as f64 - 1.0)
        });
        params.b2 = PolyMatrix::from_fn(4, 2, |i, j| Poly::constant((i as f64) - (j as f64)));
        let form = make_slack(&params, &model.f, &proj).unwrap();
        let w = TestFunction::new(vec![parse_poly("3*x^2-2*x^3").unwrap()]);
        assert!(w.in_boundary_set(&model.f, 2));
        let v = evaluate(&form, &w).unwrap();
        assert!(v.abs() < 1e-12, "B-slack value {v}");
    }
}
