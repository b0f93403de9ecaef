//! Exact scalar arithmetic: polynomials, rational functions and the
//! expression grammar.

mod expr;
mod parse;
mod poly;

pub use expr::ScalarExpr;
pub use parse::parse_scalar;
pub use poly::{Monomial, Poly, Rational, MAX_VARS};
