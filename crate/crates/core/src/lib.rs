//! The p-plurisubharmonic Monge–Ampère type operator
//! `M_p(A) = Π_{i1<…<ip} (λ_{i1} + … + λ_{ip})`.
//!
//! The crate evaluates the operator and its derivatives, works with the
//! cone `P_p` where it is elliptic, reduces it exactly to elementary
//! symmetric polynomials, checks the supporting matrix inequalities on
//! seeded samples, and solves the Dirichlet problem `M_p(u) = f(x, u)` on
//! boxes with a damped Newton method.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calculus;
pub mod cone;
pub mod error;
pub mod expr;
pub mod operator;
pub mod ptuples;
pub mod solver;
pub mod sympoly;
pub mod verifier;

pub use error::{Error, Result};
