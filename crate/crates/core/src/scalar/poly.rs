//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept sorted by descending graded lexicographic order, so the
//! first term is always the leading term. No term has a zero coefficient.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Largest number of coordinates a chart may have.
pub const MAX_VARS: usize = 8;

pub type Rational = BigRational;

/// Exponent vector of a monomial `x1^e1 ... xd^ed`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial([u16; MAX_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; MAX_VARS])
    }

    pub fn var(index: usize) -> Self {
        let mut m = Self::one();
        m.0[index] = 1;
        m
    }

    pub fn exponent(&self, index: usize) -> u16 {
        self.0[index]
    }

    pub fn exponents(&self) -> &[u16; MAX_VARS] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = [0u16; MAX_VARS];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i]
                .checked_add(other.0[i])
                .expect("monomial exponent overflow");
        }
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = [0u16; MAX_VARS];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i].checked_sub(other.0[i])?;
        }
        Some(Monomial(out))
    }

    fn with_exponent(&self, index: usize, e: u16) -> Monomial {
        let mut m = *self;
        m.0[index] = e;
        m
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order with `x1 > x2 > ... > xd`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Rational)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn var(index: usize) -> Self {
        Poly {
            terms: vec![(Monomial::var(index), Rational::one())],
        }
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(m, c)],
            }
        }
    }

    /// Builds a polynomial from unsorted terms, merging duplicates.
    pub fn from_terms(mut terms: Vec<(Monomial, Rational)>) -> Self {
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        let mut out: Vec<(Monomial, Rational)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => {
                    if let Some((_, lc)) = out.last() {
                        if lc.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c));
                }
            }
        }
        if let Some((_, lc)) = out.last() {
            if lc.is_zero() {
                out.pop();
            }
        }
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Rational)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |(m, _)| m.total_degree())
    }

    /// Highest power of `x_index` present.
    pub fn degree_in(&self, index: usize) -> u16 {
        self.terms
            .iter()
            .map(|(m, _)| m.exponent(index))
            .max()
            .unwrap_or(0)
    }

    pub fn depends_on(&self, index: usize) -> bool {
        self.terms.iter().any(|(m, _)| m.exponent(index) > 0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for (m, c) in &b[j..] {
            out.push((*m, if negate { -c } else { c.clone() }));
        }
        Poly { terms: out }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                terms.push((ma.mul(mb), ca * cb));
            }
        }
        Poly::from_terms(terms)
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, index: usize) -> Poly {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let e = m.exponent(index);
            if e > 0 {
                let factor = Rational::from_integer(BigInt::from(e));
                terms.push((m.with_exponent(index, e - 1), c * factor));
            }
        }
        // Lowering one exponent can reorder terms of equal degree.
        Poly::from_terms(terms)
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a
    /// remainder.
    pub fn try_div(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if self.total_degree() < divisor.total_degree() {
            return None;
        }
        for v in 0..MAX_VARS {
            if divisor.degree_in(v) > self.degree_in(v) {
                return None;
            }
        }
        let mut rem = self.clone();
        let mut quotient = Vec::new();
        while let Some((rm, rc)) = rem.leading() {
            // A divisor of the remainder must divide its leading term.
            let qm = rm.div(lm)?;
            let qc = rc / lc;
            let step = Poly::monomial(qm, qc.clone());
            rem = rem.sub(&divisor.mul(&step));
            quotient.push((qm, qc));
        }
        Some(Poly::from_terms(quotient))
    }

    /// Splits off the leading coefficient: returns `(lc, self / lc)`.
    pub fn monic(&self) -> (Rational, Poly) {
        match self.leading() {
            None => (Rational::zero(), Poly::zero()),
            Some((_, lc)) => {
                let lc = lc.clone();
                (lc.clone(), self.scale(&lc.recip()))
            }
        }
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut out = [u16::MAX; MAX_VARS];
        if self.terms.is_empty() {
            return Monomial::one();
        }
        for (m, _) in &self.terms {
            for (o, e) in out.iter_mut().zip(m.exponents()) {
                *o = (*o).min(*e);
            }
        }
        Monomial(out)
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.div(m).expect("monomial does not divide term"), c.clone()))
                .collect(),
        }
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate() {
                let e = m.exponent(i);
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Highest variable index present plus one.
    pub fn used_vars(&self) -> usize {
        let mut n = 0;
        for (m, _) in &self.terms {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    n = n.max(i + 1);
                }
            }
        }
        n
    }

    /// Prints in the scalar expression grammar.
    pub fn to_expr_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if n == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono = monomial_string(m);
            if mono.is_empty() {
                out.push_str(&rational_string(&abs));
            } else if abs.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&rational_string(&abs));
                out.push('*');
                out.push_str(&mono);
            }
        }
        out
    }

    /// True when the printed form is a single factor that needs no
    /// parentheses when used as a product operand.
    pub(crate) fn is_single_term(&self) -> bool {
        self.terms.len() == 1
    }
}

fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn monomial_string(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}
