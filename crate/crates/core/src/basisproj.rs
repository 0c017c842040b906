//! Stacked-state layouts, the bivariate monomial basis, and the projection
//! matrices relating a state stack to its derivative and boundary values.
//!
//! For a state `w : [0,1] -> R^beta` with highest derivative order `alpha`,
//! the stacks are
//!
//! ```text
//! w_a(x)  = [w(x); dx w(x); ...; dx^a w(x)]            (beta*(alpha+1))
//! w_a^b   = [w_{a-1}(1); w_{a-1}(0)]                   (2*beta*alpha)
//! wbar(x) = [w_a(x); w_a^b]                            (beta*(3*alpha+1))
//! ```
//!
//! and the projections satisfy `w_{a-1}(x) = N w_a(x)`,
//! `dx w_{a-1}(x) = Nd w_a(x)`, `w_{a-1}(0) = N0 w_a^b`,
//! `w_{a-1}(1) = N1 w_a^b`.

use crate::polyalg::{Expo, Poly, PolyMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("projection matrices require alpha >= 1 (no boundary stack exists for alpha = 0)")]
    NoBoundaryStack,
}

/// Dimensions of the stacked state vectors for a `(alpha, beta)` model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StackLayout {
    pub alpha: usize,
    pub beta: usize,
}

impl StackLayout {
    pub fn new(alpha: usize, beta: usize) -> Self {
        assert!(beta >= 1, "state dimension must be positive");
        Self { alpha, beta }
    }

    /// dim(w_alpha) = beta*(alpha+1)
    pub fn dim_stack(&self) -> usize {
        self.beta * (self.alpha + 1)
    }

    /// dim(w_alpha^b) = 2*beta*alpha
    pub fn dim_boundary(&self) -> usize {
        2 * self.beta * self.alpha
    }

    /// dim(wbar_alpha) = beta*(3*alpha+1)
    pub fn dim_full(&self) -> usize {
        self.beta * (3 * self.alpha + 1)
    }

    /// Index of derivative `k` of component `c` inside `w_alpha`.
    pub fn stack_index(&self, k: usize, c: usize) -> usize {
        debug_assert!(k <= self.alpha && c < self.beta);
        k * self.beta + c
    }

    /// Index inside `w_alpha^b`; the x = 1 block stacks above the x = 0 block.
    pub fn boundary_index(&self, at_one: bool, k: usize, c: usize) -> usize {
        debug_assert!(k < self.alpha && c < self.beta);
        let base = if at_one { 0 } else { self.beta * self.alpha };
        base + k * self.beta + c
    }
}

/// Monomial basis specification for the semi-separable kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisSpec {
    pub d: usize,
    pub layout: StackLayout,
}

impl BasisSpec {
    pub fn new(d: usize, layout: StackLayout) -> Self {
        Self { d, layout }
    }

    /// Length of the monomial vector z(x,y): (d+2)(d+1)/2.
    pub fn z_len(&self) -> usize {
        (self.d + 2) * (self.d + 1) / 2
    }

    /// q(alpha, beta, d) = beta*(alpha+1)*(d+2)*(d+1)/2.
    pub fn q(&self) -> usize {
        self.layout.dim_stack() * self.z_len()
    }
}

/// All monomials in `x`, `y` of total degree <= d, in graded-lex order:
/// `[1, x, y, x^2, xy, y^2, ...]`.
pub fn monomial_vector(d: usize) -> Vec<Poly> {
    let mut out = Vec::with_capacity((d + 2) * (d + 1) / 2);
    for deg in 0..=d {
        for ey in 0..=deg {
            let ex = deg - ey;
            out.push(Poly::monomial(
                Expo::new(ex as u16, ey as u16, 0),
                crate::polyalg::AffineCoeff::constant(1.0),
            ));
        }
    }
    out
}

/// The block basis `Y_q(x,y) = I_{beta(alpha+1)} kron z(x,y)`, of shape
/// `q x beta(alpha+1)`.
pub fn build_y(spec: &BasisSpec) -> PolyMatrix {
    let z = monomial_vector(spec.d);
    let n = spec.layout.dim_stack();
    let l = z.len();
    let mut m = PolyMatrix::zeros(n * l, n);
    for i in 0..n {
        for (k, zk) in z.iter().enumerate() {
            m.set(i * l + k, i, zk.clone());
        }
    }
    m
}

/// Projection matrices `(Nd, N, N0, N1)` as constant polynomial matrices.
///
/// Shapes: `Nd, N: beta*alpha x beta*(alpha+1)`; `N0, N1: beta*alpha x
/// 2*beta*alpha`.
pub fn projection_matrices(
    layout: &StackLayout,
) -> Result<(PolyMatrix, PolyMatrix, PolyMatrix, PolyMatrix), BasisError> {
    if layout.alpha == 0 {
        return Err(BasisError::NoBoundaryStack);
    }
    let ba = layout.beta * layout.alpha;
    let selector = |rows: usize, cols: usize, offset: usize| {
        PolyMatrix::from_fn(rows, cols, |i, j| {
            if j == i + offset {
                Poly::one()
            } else {
                Poly::zero()
            }
        })
    };
    // w_{a-1} is the first beta*alpha entries of w_a, its derivative the last.
    let n = selector(ba, layout.dim_stack(), 0);
    let nd = selector(ba, layout.dim_stack(), layout.beta);
    // w_a^b stacks the x = 1 block first.
    let n1 = selector(ba, layout.dim_boundary(), 0);
    let n0 = selector(ba, layout.dim_boundary(), ba);
    Ok((nd, n, n0, n1))
}
