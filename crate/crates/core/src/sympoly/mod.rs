//! Exact expansion of `M_p` over the eigenvalues and its rewriting in the
//! elementary symmetric polynomials `σ_1..σ_n`.

mod lambda;
mod parse;
mod sigma;

pub use lambda::{expand_mp, rational, LambdaPolynomial, EXPANSION_CAP};
pub use parse::parse_sigma;
pub use sigma::{
    closed_form_nminus1, elementary_values, eval_sigma, reduce_to_sigma, weighted_degree,
    SigmaJson, SigmaPolynomial, SigmaTermJson,
};

use crate::error::Result;

/// `M_p` for `n × n` matrices written in `σ_1..σ_n`.
pub fn mp_sigma(n: usize, p: usize) -> Result<SigmaPolynomial> {
    reduce_to_sigma(&expand_mp(n, p)?)
}
