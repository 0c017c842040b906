//! Lyapunov-side polynomial assembly: semi-separable kernels from their
//! parameter matrices, the associated block matrices whose positivity
//! certifies the integral functionals, and the derivative forms of the
//! Lyapunov functional along the PDE dynamics.

use crate::basisproj::BasisSpec;
use crate::funceval::{ArgOrder, EvalError, FunctionalForm};
use crate::pdemodel::PdeModel;
use crate::basisproj::build_y;
use crate::polyalg::{Bound, Poly, PolyError, PolyMatrix, Var};

/// Parameters of a semi-separable kernel and its block positivity matrix.
///
/// For the state-level functional (order-zero stack): `kb` is `beta x beta`
/// in x, `k12`/`k13` are `beta x q(0,beta,d)` in x, and `k22`, `k23`, `k33`
/// are constant `q x q`. For the derivative-level functional the row
/// dimension is `beta(3a+1)` for `kb` and `beta(a+1)` for `k12`/`k13`.
#[derive(Clone, Debug)]
pub struct KernelParams {
    pub kb: PolyMatrix,
    pub k12: PolyMatrix,
    pub k13: PolyMatrix,
    pub k22: PolyMatrix,
    pub k23: PolyMatrix,
    pub k33: PolyMatrix,
}

impl KernelParams {
    pub fn zero(kb_dim: usize, k1_rows: usize, q: usize) -> Self {
        Self {
            kb: PolyMatrix::zeros(kb_dim, kb_dim),
            k12: PolyMatrix::zeros(k1_rows, q),
            k13: PolyMatrix::zeros(k1_rows, q),
            k22: PolyMatrix::zeros(q, q),
            k23: PolyMatrix::zeros(q, q),
            k33: PolyMatrix::zeros(q, q),
        }
    }

    fn check(&self, basis: &BasisSpec, kb_dim: usize) -> Result<(), PolyError> {
        let q = basis.q();
        let n = basis.layout.dim_stack();
        let ok = self.kb.rows() == kb_dim
            && self.kb.is_square()
            && self.k12.rows() == n
            && self.k12.cols() == q
            && self.k13.rows() == n
            && self.k13.cols() == q
            && self.k22.rows() == q
            && self.k22.is_square()
            && self.k23.rows() == q
            && self.k23.is_square()
            && self.k33.rows() == q
            && self.k33.is_square();
        if !ok {
            return Err(PolyError::DimensionMismatch {
                what: format!(
                    "kernel params inconsistent with basis (q = {q}, stack = {n}, kb = {kb_dim})"
                ),
            });
        }
        Ok(())
    }

    /// Substitutes decision-variable values into every parameter block.
    pub fn eval_decisions(&self, values: &[f64]) -> Self {
        Self {
            kb: self.kb.eval_decisions(values),
            k12: self.k12.eval_decisions(values),
            k13: self.k13.eval_decisions(values),
            k22: self.k22.eval_decisions(values),
            k23: self.k23.eval_decisions(values),
            k33: self.k33.eval_decisions(values),
        }
    }
}

/// Expands the semi-separable kernel to an explicit polynomial matrix in
/// `(x, y)`:
///
/// ```text
/// K(x,y) = K12(x) Y(x,y) + Y(y,x)^T K13(y)^T
///        + int_0^y Y(z,x)^T K33 Y(z,y) dz
///        + int_y^x Y(z,x)^T K23^T Y(z,y) dz
///        + int_x^1 Y(z,x)^T K22 Y(z,y) dz
/// ```
pub fn make_kernel(params: &KernelParams, basis: &BasisSpec) -> Result<PolyMatrix, PolyError> {
    params.check(basis, params.kb.rows())?;
    let y = build_y(basis);

    // Y with arguments renamed; z is free in Y so the substitutions commute.
    let y_zx = y
        .substitute_poly(Var::X, &Poly::var(Var::Z))?
        .substitute_poly(Var::Y, &Poly::var(Var::X))?;
    let y_zy = y.substitute_poly(Var::X, &Poly::var(Var::Z))?;
    let y_yx = y
        .substitute_poly(Var::X, &Poly::var(Var::Z))?
        .substitute_poly(Var::Y, &Poly::var(Var::X))?
        .substitute_poly(Var::Z, &Poly::var(Var::Y))?;

    let k13_y = params.k13.substitute_poly(Var::X, &Poly::var(Var::Y))?;

    let mut acc = params.k12.mul(&y)?;
    acc = acc.add(&y_yx.transpose().mul(&k13_y.transpose())?)?;

    let y_zx_t = y_zx.transpose();
    let seg = |m: &PolyMatrix, lo: Bound, hi: Bound| -> Result<PolyMatrix, PolyError> {
        y_zx_t.mul(m)?.mul(&y_zy)?.integrate(Var::Z, lo, hi)
    };
    acc = acc.add(&seg(&params.k33, Bound::Zero, Bound::Var(Var::Y))?)?;
    acc = acc.add(&seg(
        &params.k23.transpose(),
        Bound::Var(Var::Y),
        Bound::Var(Var::X),
    )?)?;
    acc = acc.add(&seg(&params.k22, Bound::Var(Var::X), Bound::One)?)?;
    Ok(acc)
}

/// The symmetric block matrix whose pointwise positivity certifies the
/// functional. `pad_rows` is the number of zero rows under `k12`/`k13`
/// (`2*beta*alpha` for the derivative-level matrix, 0 for the state-level
/// one).
pub fn make_block(params: &KernelParams, pad_rows: usize) -> Result<PolyMatrix, PolyError> {
    let nb = params.kb.rows();
    let q = params.k22.rows();
    if params.k12.rows() + pad_rows != nb {
        return Err(PolyError::DimensionMismatch {
            what: format!(
                "k12 rows {} + padding {} must equal kb dimension {}",
                params.k12.rows(),
                pad_rows,
                nb
            ),
        });
    }
    let total = nb + 2 * q;
    let mut m = PolyMatrix::zeros(total, total);
    m.insert_block(0, 0, &params.kb);
    m.insert_block(0, nb, &params.k12);
    m.insert_block(0, nb + q, &params.k13);
    m.insert_block(nb, 0, &params.k12.transpose());
    m.insert_block(nb + q, 0, &params.k13.transpose());
    m.insert_block(nb, nb, &params.k22);
    m.insert_block(nb, nb + q, &params.k23);
    m.insert_block(nb + q, nb, &params.k23.transpose());
    m.insert_block(nb + q, nb + q, &params.k33);
    Ok(m)
}

/// The Lyapunov functional itself: `V(w) = 1/2 int w^T Kb w + 1/2 int_D
/// w^T Gamma[Kbar] w`, as an evaluable form on the bare state.
pub fn lyapunov_form(
    beta: usize,
    t_b: &PolyMatrix,
    t_bar: &PolyMatrix,
) -> Result<FunctionalForm, EvalError> {
    FunctionalForm::new_zero(beta, t_b.scale(0.5), t_bar.scale(0.5))
}

/// Derivative forms `(U_b, Ubar)` of `-d/dt V - 2 delta V` along
/// `dt w = A(x) w_alpha`:
///
/// ```text
/// U_b  = -He(embed(T_b A)) - He(embed(delta T_b))
/// Ubar = -1/2 (embed(Tbar(x,y)^T A(x))^T + embed(Tbar(x,y) A(y))) - delta embed(Tbar)
/// ```
///
/// where the embeddings pad with zeros to `beta(3a+1)` and `beta(a+1)`.
pub fn make_vd_forms(
    model: &PdeModel,
    t_b: &PolyMatrix,
    t_bar: &PolyMatrix,
    delta: f64,
) -> Result<(PolyMatrix, PolyMatrix), PolyError> {
    let layout = model.layout;
    let beta = layout.beta;
    let n_full = layout.dim_full();
    let n_stack = layout.dim_stack();
    if t_b.rows() != beta || !t_b.is_square() || t_bar.rows() != beta || !t_bar.is_square() {
        return Err(PolyError::DimensionMismatch {
            what: format!(
                "T_b and Tbar must be {beta} square, got {}x{} and {}x{}",
                t_b.rows(),
                t_b.cols(),
                t_bar.rows(),
                t_bar.cols()
            ),
        });
    }

    // U_b: -He of T_b A embedded at rows [0,beta), cols [0,beta(a+1)), minus
    // He of delta T_b embedded at the top-left corner.
    let tba = t_b.mul(&model.a)?;
    let mut e1 = PolyMatrix::zeros(n_full, n_full);
    e1.insert_block(0, 0, &tba);
    let mut e2 = PolyMatrix::zeros(n_full, n_full);
    e2.insert_block(0, 0, &t_b.scale(delta));
    let u_b = e1.he()?.add(&e2.he()?)?.neg();

    // Ubar on the w_alpha stack.
    let a_x = &model.a;
    let a_y = model.a.substitute_poly(Var::X, &Poly::var(Var::Y))?;
    let m1 = t_bar.transpose().mul(a_x)?; // beta x beta(a+1)
    let m2 = t_bar.mul(&a_y)?;
    let mut s1 = PolyMatrix::zeros(n_stack, n_stack);
    s1.insert_block(0, 0, &m1);
    let s1t = s1.transpose();
    let mut s2 = PolyMatrix::zeros(n_stack, n_stack);
    s2.insert_block(0, 0, &m2);
    let mut s3 = PolyMatrix::zeros(n_stack, n_stack);
    s3.insert_block(0, 0, t_bar);
    let u_bar = s1t
        .add(&s2)?
        .scale(-0.5)
        .add(&s3.scale(-delta))?;
    Ok((u_b, u_bar))
}

/// The derivative functional as an evaluable form on the alpha stack.
pub fn vd_form(
    model: &PdeModel,
    t_b: &PolyMatrix,
    t_bar: &PolyMatrix,
    delta: f64,
) -> Result<FunctionalForm, EvalError> {
    let (u_b, u_bar) = make_vd_forms(model, t_b, t_bar, delta)?;
    FunctionalForm::new_alpha(model.layout, u_b, u_bar)
}

/// `int_0^1 f(x)^T M(x) f(x) dx` with
/// `f = [stack; int_0^x Y(x,y) s(y) dy; int_x^1 Y(x,y) s(y) dy]`, the
/// Gram-integral route to the same functional value as the kernel form.
/// `stack` is the full stack for the derivative-level matrix (with `s` its
/// `w_alpha` part) or the state itself for the state-level matrix.
pub fn block_route_value(
    block: &PolyMatrix,
    basis: &BasisSpec,
    stack_full: &PolyMatrix,
    stack_s: &PolyMatrix,
) -> Result<f64, EvalError> {
    let y = build_y(basis);
    let s_y = stack_s.substitute_poly(Var::X, &Poly::var(Var::Y))?;
    let integrand = y.mul(&s_y)?;
    let g1 = integrand.integrate(Var::Y, Bound::Zero, Bound::Var(Var::X))?;
    let g2 = integrand.integrate(Var::Y, Bound::Var(Var::X), Bound::One)?;
    let n = stack_full.rows();
    let q = basis.q();
    let mut f = PolyMatrix::zeros(n + 2 * q, 1);
    f.insert_block(0, 0, stack_full);
    f.insert_block(n, 0, &g1);
    f.insert_block(n + q, 0, &g2);
    let quad = f.transpose().mul(block)?.mul(&f)?;
    Ok(quad
        .get(0, 0)
        .integrate(Var::X, Bound::Zero, Bound::One)?
        .as_constant()
        .expect("numeric integral"))
}

/// Kernel-route value of the same functional: `int s_b^T Kb s_b +
/// int_D s^T Gamma[Kbar] s`.
pub fn kernel_route_value(
    params: &KernelParams,
    basis: &BasisSpec,
    form_order: ArgOrder,
    w: &crate::funceval::TestFunction,
) -> Result<f64, EvalError> {
    let kbar = make_kernel(params, basis)?;
    let form = match form_order {
        ArgOrder::Alpha(layout) => {
            FunctionalForm::new_alpha(layout, params.kb.clone(), kbar)?
        }
        ArgOrder::Zero { beta } => FunctionalForm::new_zero(beta, params.kb.clone(), kbar)?,
    };
    crate::funceval::evaluate(&form, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basisproj::StackLayout;
    use crate::pdemodel::builtin;
    use crate::polyalg::parse_poly;

    fn scalar_basis(d: usize) -> BasisSpec {
        BasisSpec::new(d, StackLayout::new(0, 1))
    }

    #[test]
    fn zero_params_give_zero_kernel() {
        let basis = scalar_basis(1);
        let params = KernelParams::zero(1, 1, basis.q());
        assert!(make_kernel(&params, &basis).unwrap().is_zero());
    }

    #[test]
    fn unit_k12_gives_unit_kernel() {
        // beta=1, alpha=0, d=0: q=1, Y = [1]; K12 = 1 -> K(x,y) = 1
        let basis = scalar_basis(0);
        let mut params = KernelParams::zero(1, 1, 1);
        params.k12 = PolyMatrix::from_real(1, 1, &[1.0]);
        let k = make_kernel(&params, &basis).unwrap();
        assert_eq!(k.get(0, 0).as_constant(), Some(1.0));
    }

    #[test]
    fn unit_k22_gives_one_minus_x() {
        let basis = scalar_basis(0);
        let mut params = KernelParams::zero(1, 1, 1);
        params.k22 = PolyMatrix::from_real(1, 1, &[1.0]);
        let k = make_kernel(&params, &basis).unwrap();
        assert_eq!(k.get(0, 0), &parse_poly("1-x").unwrap());
    }

    #[test]
    fn block_sizes_match_formulas() {
        // zero params -> zero matrix of size beta + 2 q
        let basis = scalar_basis(2);
        let params = KernelParams::zero(1, 1, basis.q());
        let t = make_block(&params, 0).unwrap();
        assert_eq!(t.rows(), 1 + 2 * 6);
        assert!(t.is_zero());

        // R block for alpha=2, beta=1, d=2: (7 + 2*18) = 43 square
        let layout = StackLayout::new(2, 1);
        let rbasis = BasisSpec::new(2, layout);
        assert_eq!(rbasis.q(), 18);
        let rparams = KernelParams::zero(layout.dim_full(), layout.dim_stack(), rbasis.q());
        let r = make_block(&rparams, layout.dim_boundary()).unwrap();
        assert_eq!(r.rows(), 43);

        // T block for beta=1, d=2 is 13 square
        let t = make_block(&KernelParams::zero(1, 1, 6), 0).unwrap();
        assert_eq!(t.rows(), 13);
    }

    #[test]
    fn vd_forms_example1_hand_expansion() {
        // Example 1, T_b = 1, Tbar = 0, delta = 0:
        // U_b = -He(embed(A)) with A = [lambda, 0.5x, x^2+1]
        let lambda = 2.0;
        let model = builtin("example1").unwrap().instantiate(lambda).unwrap();
        let t_b = PolyMatrix::identity(1);
        let t_bar = PolyMatrix::zeros(1, 1);
        let (u_b, u_bar) = make_vd_forms(&model, &t_b, &t_bar, 0.0).unwrap();
        assert!(u_bar.is_zero());
        assert_eq!(u_b.rows(), 7);
        // (1,1) = -lambda, (1,3) = (3,1) = -(x^2+1)/2
        assert_eq!(u_b.get(0, 0).as_constant(), Some(-lambda));
        assert_eq!(u_b.get(0, 2), &parse_poly("-0.5*x^2-0.5").unwrap());
        assert_eq!(u_b.get(2, 0), &parse_poly("-0.5*x^2-0.5").unwrap());
        assert_eq!(u_b.get(0, 1), &parse_poly("-0.25*x").unwrap());
        // rows past the first are zero
        for i in 1..7 {
            for j in 1..7 {
                assert!(u_b.get(i, j).is_zero());
            }
        }

        // delta > 0 adds -delta at (1,1) only
        let delta = 0.25;
        let (u_b_d, _) = make_vd_forms(&model, &t_b, &t_bar, delta).unwrap();
        assert_eq!(u_b_d.get(0, 0).as_constant(), Some(-lambda - delta));
        assert_eq!(u_b_d.get(0, 2), u_b.get(0, 2));

        // both zero -> both forms zero
        let (u_b0, u_bar0) =
            make_vd_forms(&model, &PolyMatrix::zeros(1, 1), &t_bar, delta).unwrap();
        assert!(u_b0.is_zero() && u_bar0.is_zero());
    }
}
