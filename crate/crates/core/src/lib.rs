//! Algorithmic stability certificates for 1-D linear PDEs with polynomial
//! data.
//!
//! The library certifies exponential stability of
//! `dt w(x,t) = A(x) w_alpha(x,t)` on the unit interval, subject to
//! homogeneous boundary conditions `F w_alpha^b = 0`, by constructing a
//! quadratic Lyapunov functional as the solution of a sum-of-squares
//! feasibility problem compiled to a semidefinite program:
//!
//! * [`polyalg`] — multivariate polynomial matrices with decision-variable
//!   coefficients,
//! * [`basisproj`] — state stacks, monomial bases, projection matrices,
//! * [`pdemodel`] — the PDE class, built-in examples, model file format,
//! * [`lyapforms`] / [`slackforms`] — the functional and slack assemblies,
//! * [`sosprog`] — compilation of the certificate conditions to an SDP,
//! * [`sdpsolve`] — a dense primal-dual interior-point solver and a sparse
//!   interchange format,
//! * [`funceval`] — exact evaluation of the functionals on polynomial test
//!   functions,
//! * [`certify`] — the end-to-end pipeline with bisection over the model
//!   parameter,
//! * [`fdoracle`] — an independent finite-difference spectral cross-check.

pub mod basisproj;
pub mod certify;
pub mod fdoracle;
pub mod funceval;
pub mod lyapforms;
pub mod pdemodel;
pub mod polyalg;
pub mod sdpsolve;
pub mod slackforms;
pub mod sosprog;


pub use pdemodel::{builtin, parse_model, ParamModel, PdeModel};

