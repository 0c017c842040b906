//! Exact arithmetic for multivariate polynomials in the ordered variable set
//! `{x, y, z}` and matrices thereof, with coefficients affine in a global list
//! of scalar decision variables.
//!
//! All types are immutable values after construction. Coefficients are
//! double-precision reals; the assembly pipeline only produces small
//! rational combinations, so identities hold to roundoff.

mod affine;
mod matrix;
mod poly;

pub use affine::{AffineCoeff, BilinearProduct, VarId};
pub use matrix::{coeff_equations, AffineEq, PolyMatrix};
pub use poly::{parse_poly, Bound, Expo, Poly, Var};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },
    #[error("product of two decision-variable expressions is bilinear")]
    BilinearProduct,
    #[error("integration bound refers to the integration variable {0}")]
    BadBound(Var),
    #[error("expression still contains decision variables")]
    DecisionVarsPresent,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
