//! Seeded random operands for property trials.

use rand::Rng;

use crate::form::TensorValuedForm;
use crate::scalar::{Rational, ScalarExpr, MAX_VARS};

/// Bounds for random forms and polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormBounds {
    pub dimension: usize,
    pub max_poly_degree: usize,
    pub max_form_degree: usize,
    pub max_rank: usize,
}

/// A random integer polynomial with one to three terms of total degree at
/// most `max_degree` and coefficients in `-3..=3`.
pub fn random_polynomial<R: Rng>(rng: &mut R, dim: usize, max_degree: usize) -> ScalarExpr {
    let terms = rng.gen_range(1..=3);
    let mut acc = ScalarExpr::zero(dim);
    for _ in 0..terms {
        let deg = rng.gen_range(0..=max_degree);
        let mut exps = [0u16; MAX_VARS];
        for _ in 0..deg {
            exps[rng.gen_range(0..dim)] += 1;
        }
        let mut c: i64 = rng.gen_range(1..=3);
        if rng.gen_bool(0.5) {
            c = -c;
        }
        acc = acc.add(&ScalarExpr::monomial_term(
            dim,
            &exps[..dim],
            Rational::from_integer(c.into()),
        ));
    }
    acc
}

fn index_tuples(dim: usize, len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..dim as u8).map(move |i| {
                    let mut n = t.clone();
                    n.push(i);
                    n
                })
            })
            .collect();
    }
    out
}

fn increasing_tuples(dim: usize, len: usize) -> Vec<Vec<u8>> {
    index_tuples(dim, len)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[0] < w[1]))
        .collect()
}

/// A random form of the given shape; each component is present with
/// probability 1/2.
pub fn random_form_of_shape<R: Rng>(
    rng: &mut R,
    dim: usize,
    upper: usize,
    lower: usize,
    degree: usize,
    max_poly_degree: usize,
) -> TensorValuedForm {
    let mut out = TensorValuedForm::zero(dim, upper, lower, degree);
    for tensor in index_tuples(dim, upper + lower) {
        for form in increasing_tuples(dim, degree) {
            if rng.gen_bool(0.5) {
                let v = random_polynomial(rng, dim, max_poly_degree);
                out.add_term(&tensor[..upper], &tensor[upper..], &form, v);
            }
        }
    }
    out
}

/// A random form with ranks and degree drawn uniformly within `bounds`.
pub fn random_form<R: Rng>(rng: &mut R, bounds: &FormBounds) -> TensorValuedForm {
    let d = bounds.dimension;
    let upper = rng.gen_range(0..=bounds.max_rank);
    let lower = rng.gen_range(0..=bounds.max_rank);
    let degree = rng.gen_range(0..=bounds.max_form_degree.min(d));
    random_form_of_shape(rng, d, upper, lower, degree, bounds.max_poly_degree)
}
