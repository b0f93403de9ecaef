//! Rational functions of the chart coordinates.
//!
//! A [`ScalarExpr`] is `numerator / (p1^e1 * ... * pn^en)` where every `pi`
//! is a monic, non-constant polynomial. Common denominators are formed by
//! taking the maximum exponent of structurally equal factors, and after each
//! operation the numerator is divided by any factor that divides it exactly.
//! The representation is not unique, but zero is: an expression is zero
//! exactly when its numerator is the zero polynomial, so equality is decided
//! by expanding the cross-multiplied difference.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::{Monomial, Poly, Rational, MAX_VARS};
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct ScalarExpr {
    dim: usize,
    num: Poly,
    den: Vec<(Poly, u32)>,
}

fn cmp_poly(a: &Poly, b: &Poly) -> Ordering {
    let (ta, tb) = (a.terms(), b.terms());
    for (x, y) in ta.iter().zip(tb.iter()) {
        let o = x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1));
        if o != Ordering::Equal {
            return o;
        }
    }
    ta.len().cmp(&tb.len())
}

fn sort_factors(f: &mut [(Poly, u32)]) {
    f.sort_by(|a, b| cmp_poly(&a.0, &b.0));
}

/// Adds `exp` copies of `p` into a sorted factor list.
fn push_factor(list: &mut Vec<(Poly, u32)>, p: Poly, exp: u32) {
    if exp == 0 {
        return;
    }
    match list.binary_search_by(|(q, _)| cmp_poly(q, &p)) {
        Ok(i) => list[i].1 += exp,
        Err(i) => list.insert(i, (p, exp)),
    }
}

fn expand(factors: &[(Poly, u32)]) -> Poly {
    let mut acc = Poly::one();
    for (p, e) in factors {
        acc = acc.mul(&p.pow(*e));
    }
    acc
}

/// Divides `num` by factors of `den` while the division is exact.
fn cancel(mut num: Poly, den: Vec<(Poly, u32)>) -> (Poly, Vec<(Poly, u32)>) {
    if num.is_zero() {
        return (num, Vec::new());
    }
    let mut out = Vec::with_capacity(den.len());
    for (p, mut e) in den {
        while e > 0 {
            match num.try_div(&p) {
                Some(q) => {
                    num = q;
                    e -= 1;
                }
                None => break,
            }
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    (num, out)
}

/// Splits a nonzero polynomial into `c * x^m * r1^a1 ... * rest`, using
/// `known` factors for trial division. Returns the constant and the monic
/// factor list.
fn factor_polynomial(p: &Poly, known: &[&(Poly, u32)]) -> (Rational, Vec<(Poly, u32)>) {
    let (c, monic) = p.monic();
    let content = monic.monomial_content();
    let mut rest = monic.div_monomial(&content);
    let mut factors = Vec::new();
    for (i, &e) in content.exponents().iter().enumerate() {
        if e > 0 {
            push_factor(&mut factors, Poly::var(i), e as u32);
        }
    }
    for (k, _) in known {
        if k.as_constant().is_some() {
            continue;
        }
        let mut count = 0;
        while rest.as_constant().is_none() {
            match rest.try_div(k) {
                Some(q) => {
                    rest = q;
                    count += 1;
                }
                None => break,
            }
        }
        push_factor(&mut factors, k.clone(), count);
    }
    let rc = rest.as_constant();
    match rc {
        Some(r) => (c * r, factors),
        None => {
            let (lc, m) = rest.monic();
            push_factor(&mut factors, m, 1);
            (c * lc, factors)
        }
    }
}

impl ScalarExpr {
    pub fn zero(dim: usize) -> Self {
        ScalarExpr {
            dim,
            num: Poly::zero(),
            den: Vec::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::from_poly(dim, Poly::one())
    }

    pub fn from_int(dim: usize, n: i64) -> Self {
        Self::from_poly(dim, Poly::from_int(n))
    }

    pub fn from_rational(dim: usize, c: Rational) -> Self {
        Self::from_poly(dim, Poly::constant(c))
    }

    /// The coordinate `x_{index+1}` (0-based index).
    pub fn coordinate(dim: usize, index: usize) -> Self {
        assert!(index < dim, "coordinate index out of range");
        Self::from_poly(dim, Poly::var(index))
    }

    pub fn from_poly(dim: usize, p: Poly) -> Self {
        debug_assert!(p.used_vars() <= dim);
        ScalarExpr {
            dim,
            num: p,
            den: Vec::new(),
        }
    }

    /// Builds `num / den`, failing when `den` is the zero polynomial.
    pub fn from_fraction(dim: usize, num: Poly, den: &Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::from_poly(dim, num).div(&Self::from_poly(dim, den.clone()))
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    /// Denominator factors `(p, e)` with monic `p`.
    pub fn denominator_factors(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn denominator(&self) -> Poly {
        expand(&self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    fn check_dim(&self, other: &ScalarExpr) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &ScalarExpr) -> Result<ScalarExpr> {
        self.check_dim(other)?;
        Ok(self.add(other))
    }

    pub fn try_sub(&self, other: &ScalarExpr) -> Result<ScalarExpr> {
        self.check_dim(other)?;
        Ok(self.sub(other))
    }

    pub fn try_mul(&self, other: &ScalarExpr) -> Result<ScalarExpr> {
        self.check_dim(other)?;
        Ok(self.mul(other))
    }

    pub fn try_div(&self, other: &ScalarExpr) -> Result<ScalarExpr> {
        self.check_dim(other)?;
        self.div(other)
    }

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        debug_assert_eq!(self.dim, other.dim);
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den.is_empty() && other.den.is_empty() {
            return ScalarExpr::from_poly(self.dim, self.num.add(&other.num));
        }
        // lcm of the two factor lists
        let mut lcm: Vec<(Poly, u32)> = self.den.clone();
        for (p, e) in &other.den {
            match lcm.binary_search_by(|(q, _)| cmp_poly(q, p)) {
                Ok(i) => lcm[i].1 = lcm[i].1.max(*e),
                Err(i) => lcm.insert(i, (p.clone(), *e)),
            }
        }
        let scale_for = |den: &[(Poly, u32)]| -> Poly {
            let mut acc = Poly::one();
            for (p, e) in &lcm {
                let have = den
                    .iter()
                    .find(|(q, _)| cmp_poly(q, p) == Ordering::Equal)
                    .map_or(0, |(_, e)| *e);
                if *e > have {
                    acc = acc.mul(&p.pow(e - have));
                }
            }
            acc
        };
        let a = self.num.mul(&scale_for(&self.den));
        let b = other.num.mul(&scale_for(&other.den));
        let (num, den) = cancel(a.add(&b), lcm);
        ScalarExpr {
            dim: self.dim,
            num,
            den,
        }
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr {
            dim: self.dim,
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        debug_assert_eq!(self.dim, other.dim);
        if self.is_zero() || other.is_zero() {
            return ScalarExpr::zero(self.dim);
        }
        if self.den.is_empty() && other.den.is_empty() {
            return ScalarExpr::from_poly(self.dim, self.num.mul(&other.num));
        }
        let (an, bden) = cancel(self.num.clone(), other.den.clone());
        let (bn, aden) = cancel(other.num.clone(), self.den.clone());
        let mut den = aden;
        for (p, e) in bden {
            push_factor(&mut den, p, e);
        }
        ScalarExpr {
            dim: self.dim,
            num: an.mul(&bn),
            den,
        }
    }

    pub fn scale(&self, c: &Rational) -> ScalarExpr {
        if c.is_zero() {
            return ScalarExpr::zero(self.dim);
        }
        ScalarExpr {
            dim: self.dim,
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn scale_int(&self, n: i64) -> ScalarExpr {
        self.scale(&Rational::from_integer(BigInt::from(n)))
    }

    pub fn recip(&self) -> Result<ScalarExpr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let known: Vec<&(Poly, u32)> = self.den.iter().collect();
        let (c, mut factors) = factor_polynomial(&self.num, &known);
        sort_factors(&mut factors);
        let num = expand(&self.den).scale(&c.recip());
        let (num, den) = cancel(num, factors);
        Ok(ScalarExpr {
            dim: self.dim,
            num,
            den,
        })
    }

    pub fn div(&self, other: &ScalarExpr) -> Result<ScalarExpr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(c) = other.as_constant() {
            return Ok(self.scale(&c.recip()));
        }
        // Trial-divide the divisor's numerator by our own factors as well.
        let mut known: Vec<&(Poly, u32)> = other.den.iter().collect();
        known.extend(self.den.iter());
        let (c, mut factors) = factor_polynomial(&other.num, &known);
        sort_factors(&mut factors);
        let inv = ScalarExpr {
            dim: self.dim,
            num: expand(&other.den).scale(&c.recip()),
            den: factors,
        };
        let (num, den) = cancel(inv.num, inv.den);
        Ok(self.mul(&ScalarExpr {
            dim: self.dim,
            num,
            den,
        }))
    }

    pub fn pow(&self, e: u32) -> ScalarExpr {
        if e == 0 {
            return ScalarExpr::one(self.dim);
        }
        ScalarExpr {
            dim: self.dim,
            num: self.num.pow(e),
            den: self.den.iter().map(|(p, k)| (p.clone(), k * e)).collect(),
        }
    }

    /// Partial derivative with respect to `x_{index+1}` (0-based index).
    pub fn derivative(&self, index: usize) -> ScalarExpr {
        assert!(index < self.dim, "coordinate index out of range");
        let dn = self.num.derivative(index);
        let moving: Vec<usize> = (0..self.den.len())
            .filter(|&i| self.den[i].0.depends_on(index))
            .collect();
        if moving.is_empty() {
            return ScalarExpr {
                dim: self.dim,
                num: dn,
                den: if self.num.is_zero() {
                    Vec::new()
                } else {
                    self.den.clone()
                },
            }
            .normalized();
        }
        // d(N / prod p_i^e_i) = (N' prod p_i - N sum e_i p_i' prod_{j != i} p_j) / prod p_i^(e_i+1)
        let prod_all = moving
            .iter()
            .fold(Poly::one(), |acc, &i| acc.mul(&self.den[i].0));
        let mut num = dn.mul(&prod_all);
        for &i in &moving {
            let (p, e) = &self.den[i];
            let mut term = self
                .num
                .mul(&p.derivative(index))
                .scale(&Rational::from_integer(BigInt::from(*e)));
            for &j in &moving {
                if j != i {
                    term = term.mul(&self.den[j].0);
                }
            }
            num = num.sub(&term);
        }
        let mut den = self.den.clone();
        for &i in &moving {
            den[i].1 += 1;
        }
        let (num, den) = cancel(num, den);
        ScalarExpr {
            dim: self.dim,
            num,
            den,
        }
    }

    fn normalized(self) -> ScalarExpr {
        let (num, den) = cancel(self.num, self.den);
        ScalarExpr {
            dim: self.dim,
            num,
            den,
        }
    }

    /// Exact value at a point; errors when the denominator vanishes there.
    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let mut d = Rational::one();
        for (p, e) in &self.den {
            d *= num_traits::pow(p.evaluate(point), *e as usize);
        }
        if d.is_zero() {
            return Err(Error::Pole);
        }
        Ok(self.num.evaluate(point) / d)
    }

    /// Prints in the scalar expression grammar.
    pub fn to_expr_string(&self) -> String {
        let num = self.num.to_expr_string();
        if self.den.is_empty() {
            return num;
        }
        let num = if self.num.is_single_term() && !num.starts_with('-') {
            num
        } else {
            format!("({num})")
        };
        let parts: Vec<String> = self
            .den
            .iter()
            .map(|(p, e)| {
                let s = p.to_expr_string();
                let bare = p.is_single_term()
                    && p.terms()[0].0.total_degree() == 1
                    && p.terms()[0].1.is_one();
                let base = if bare { s } else { format!("({s})") };
                if *e == 1 {
                    base
                } else {
                    format!("{base}^{e}")
                }
            })
            .collect();
        if parts.len() == 1 {
            format!("{num}/{}", parts[0])
        } else {
            format!("{num}/({})", parts.join("*"))
        }
    }

    pub fn monomial_term(dim: usize, exponents: &[u16], c: Rational) -> ScalarExpr {
        let mut m = Monomial::one();
        for (i, &e) in exponents.iter().enumerate().take(MAX_VARS) {
            for _ in 0..e {
                m = m.mul(&Monomial::var(i));
            }
        }
        ScalarExpr::from_poly(dim, Poly::monomial(m, c))
    }
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.sub(other).is_zero()
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}

impl std::iter::Sum for ScalarExpr {
    fn sum<I: Iterator<Item = ScalarExpr>>(mut iter: I) -> ScalarExpr {
        let first = iter
            .next()
            .expect("sum of an empty iterator has no dimension");
        iter.fold(first, |acc, x| acc.add(&x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> ScalarExpr {
        ScalarExpr::coordinate(2, i)
    }

    fn c(n: i64) -> ScalarExpr {
        ScalarExpr::from_int(2, n)
    }

    #[test]
    fn inverse_cancels() {
        let p = c(1).add(&x(0));
        let inv = c(1).div(&p).unwrap();
        let prod = inv.mul(&p);
        assert!(prod.is_polynomial());
        assert_eq!(prod.as_constant(), Some(Rational::one()));
    }

    #[test]
    fn common_denominator() {
        let a = x(0).div(&x(1)).unwrap();
        let b = x(1).div(&x(0)).unwrap();
        let s = a.add(&b);
        let expected = x(0)
            .mul(&x(0))
            .add(&x(1).mul(&x(1)))
            .div(&x(0).mul(&x(1)))
            .unwrap();
        assert!(s.sub(&expected).is_zero());
        assert_eq!(s.denominator(), x(0).mul(&x(1)).numerator().clone());
    }

    #[test]
    fn quotient_rule() {
        let p = c(1).add(&x(0));
        let f = c(1).div(&p).unwrap();
        let df = f.derivative(0);
        let expected = c(-1).div(&p.mul(&p)).unwrap();
        assert!(df.sub(&expected).is_zero());
        assert!(f.derivative(1).is_zero());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            x(0).div(&x(0).sub(&x(0))).unwrap_err(),
            Error::DivisionByZero
        );
        assert_eq!(c(1).recip().unwrap(), c(1));
    }

    #[test]
    fn pole_detection() {
        let f = c(1).div(&c(1).add(&x(0))).unwrap();
        let point = [Rational::from_integer((-1).into()), Rational::zero()];
        assert_eq!(f.evaluate(&point), Err(Error::Pole));
    }

    #[test]
    fn repeated_factor_splits_against_known_factors() {
        let p = c(1).add(&x(0));
        let a = c(1).div(&p).unwrap();
        // a / (1+x1)^2 should record (1+x1)^3, not a new expanded factor
        let b = a.div(&p.mul(&p)).unwrap();
        assert_eq!(b.denominator_factors().len(), 1);
        assert_eq!(b.denominator_factors()[0].1, 3);
    }
}
