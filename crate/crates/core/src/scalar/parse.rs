//! Recursive-descent parser for the scalar expression grammar.
//!
//! ```text
//! expr     := term (("+"|"-") term)* ;
//! term     := factor (("*"|"/") factor)* ;
//! factor   := "-" factor | base ("^" uint)? ;
//! base     := rational | ident | "(" expr ")" ;
//! rational := int ("/" uint)? ; ident := "x" uint .
//! ```

use num_bigint::BigInt;
use num_traits::Zero;

use super::expr::ScalarExpr;
use super::poly::Rational;
use crate::error::{Error, Result};

/// Exponents above this are rejected rather than expanded.
const MAX_EXPONENT: u32 = 256;

pub fn parse_scalar(text: &str, dim: usize) -> Result<ScalarExpr> {
    if dim == 0 || dim > super::MAX_VARS {
        return Err(Error::UnsupportedDimension(dim));
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<&str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let rhs = self.factor()?;
                    if rhs.is_zero() {
                        if self.is_zero_literal(at) {
                            return Err(Error::DivisionByZeroLiteral { position: at });
                        }
                        return Err(Error::DivisionByZero);
                    }
                    acc = acc.div(&rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    /// Whether the text consumed since `at` is a literal zero such as `0`,
    /// `00` or `0/7`.
    fn is_zero_literal(&self, at: usize) -> bool {
        let text = std::str::from_utf8(&self.src[at..self.pos]).unwrap_or("");
        let head = text.split('/').next().unwrap_or("").trim();
        !head.is_empty() && head.bytes().all(|b| b == b'0')
    }

    fn factor(&mut self) -> Result<ScalarExpr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let e = match self.digits() {
                Some(s) => s.parse::<u32>().ok(),
                None => None,
            };
            let trailing = matches!(self.src.get(self.pos), Some(b'.'));
            match e {
                Some(e) if e <= MAX_EXPONENT && !trailing => Ok(base.pow(e)),
                _ => Err(Error::BadExponent { position: at }),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<ScalarExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.rational(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn rational(&mut self) -> Result<ScalarExpr> {
        let num: BigInt = self.digits().unwrap().parse().unwrap();
        // `int "/" uint` is a literal only when the slash is directly
        // followed (modulo whitespace) by digits.
        let save = self.pos;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            if let Some(d) = self.digits() {
                let den: BigInt = d.parse().unwrap();
                if den.is_zero() {
                    return Err(Error::DivisionByZeroLiteral { position: at });
                }
                return Ok(ScalarExpr::from_rational(self.dim, Rational::new(num, den)));
            }
            self.pos = save;
        }
        Ok(ScalarExpr::from_rational(
            self.dim,
            Rational::from_integer(num),
        ))
    }

    fn ident(&mut self) -> Result<ScalarExpr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let unknown = || Error::UnknownIdentifier {
            name: name.to_string(),
            position: start,
        };
        let index = name
            .strip_prefix('x')
            .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(unknown)?;
        if index == 0 || index > self.dim {
            return Err(unknown());
        }
        Ok(ScalarExpr::coordinate(self.dim, index - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_and_rational() {
        let e = parse_scalar("x1*x2 + 1/2", 2).unwrap();
        assert_eq!(e.to_expr_string(), "x1*x2 + 1/2");
        assert_eq!(parse_scalar("2/3^2", 1).unwrap().to_expr_string(), "4/9");
        assert_eq!(
            parse_scalar("x1/3^2", 1).unwrap().to_expr_string(),
            "1/9*x1"
        );
    }

    #[test]
    fn cancellation() {
        let e = parse_scalar("(1+x1)^2 / (1+x1)", 2).unwrap();
        assert!(e.is_polynomial());
        assert_eq!(e, parse_scalar("1 + x1", 2).unwrap());
        assert!(parse_scalar("x1 - x1", 1).unwrap().is_zero());
    }

    #[test]
    fn unary_minus_binds_to_factor() {
        assert_eq!(
            parse_scalar("-x1^2", 1).unwrap(),
            parse_scalar("0 - x1*x1", 1).unwrap()
        );
        assert_eq!(parse_scalar("--3", 1).unwrap().to_expr_string(), "3");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_scalar("x1 + ", 1),
            Err(Error::Syntax { position: 5, .. })
        ));
        assert!(matches!(
            parse_scalar("x0", 2),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_scalar("x3", 2),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_scalar("y", 2),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_scalar("x1^-1", 2),
            Err(Error::BadExponent { position: 3 })
        ));
        assert!(matches!(
            parse_scalar("x1^x2", 2),
            Err(Error::BadExponent { .. })
        ));
        assert!(matches!(
            parse_scalar("x1/0", 2),
            Err(Error::DivisionByZeroLiteral { position: 3 })
        ));
        assert!(matches!(
            parse_scalar("1/0", 2),
            Err(Error::DivisionByZeroLiteral { position: 2 })
        ));
        assert_eq!(parse_scalar("x1/(x2-x2)", 2), Err(Error::DivisionByZero));
        assert!(matches!(parse_scalar("(x1", 2), Err(Error::Syntax { .. })));
    }

    #[test]
    fn print_parse_roundtrip_with_denominators() {
        for src in [
            "1/(1+x1)",
            "-x1/(x1*x2)",
            "(x1^2 - 3/4*x2)/((1+x1)^2*(x2 - x1))",
            "x1/(x1*x2)^3",
        ] {
            let e = parse_scalar(src, 2).unwrap();
            let again = parse_scalar(&e.to_expr_string(), 2).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
    }
}
