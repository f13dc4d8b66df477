//! A tiny recursive-descent parser for target reals given on the command line.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | ident '(' expr ')' | '(' expr ')'
//! ident  := "sqrt" | "cbrt"
//! ```
//!
//! Values are evaluated once in double-double precision. When no irrational
//! function is involved the exact rational value is carried along as well.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dd::DoubleDouble;
use crate::error::{LabError, Result};

/// A parsed target real.
#[derive(Clone, Debug, PartialEq)]
pub struct RealValue {
    pub approx: DoubleDouble,
    pub exact: Option<BigRational>,
}

impl RealValue {
    pub fn from_f64(x: f64) -> Self {
        RealValue {
            approx: DoubleDouble::from_f64(x),
            exact: BigRational::from_float(x),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        RealValue {
            approx: rational_to_dd(&r),
            exact: Some(r),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.approx.to_f64()
    }
}

pub(crate) fn rational_to_dd(r: &BigRational) -> DoubleDouble {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    match BigRational::from_float(hi) {
        Some(h) => {
            let rest = (r - h).to_f64().unwrap_or(0.0);
            DoubleDouble::new(hi, rest)
        }
        None => DoubleDouble::from_f64(hi),
    }
}

/// Parse and evaluate an expression such as `cbrt(2)`, `1/3` or `-0.25`.
pub fn parse_real(src: &str) -> Result<RealValue> {
    let mut p = Parser {
        s: src.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    if !v.approx.is_finite() {
        return Err(LabError::Parse(format!("`{src}` is not finite")));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> LabError {
        LabError::Parse(format!(
            "{what} at offset {} in `{}`",
            self.pos,
            String::from_utf8_lossy(self.s)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<RealValue> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = combine(acc, rhs, op);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RealValue> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == b'/' && rhs.approx.hi == 0.0 {
                return Err(self.err("division by zero"));
            }
            acc = combine(acc, rhs, op);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RealValue> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let v = self.unary()?;
            return Ok(RealValue {
                approx: -v.approx,
                exact: v.exact.map(|e| -e),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<RealValue> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos])
                    .unwrap()
                    .to_string();
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                match name.as_str() {
                    "sqrt" => {
                        let approx = arg
                            .approx
                            .sqrt()
                            .ok_or_else(|| self.err("sqrt of negative"))?;
                        Ok(RealValue {
                            approx,
                            exact: None,
                        })
                    }
                    "cbrt" => Ok(RealValue {
                        approx: arg.approx.cbrt(),
                        exact: None,
                    }),
                    _ => Err(LabError::Parse(format!("unknown function `{name}`"))),
                }
            }
            _ => Err(self.err("expected a number, function or `(`")),
        }
    }

    fn number(&mut self) -> Result<RealValue> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.s.len() && p.s[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        let int_part = std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .to_string();
        let mut frac_part = String::new();
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            digits(self);
            frac_part = std::str::from_utf8(&self.s[fs..self.pos])
                .unwrap()
                .to_string();
        }
        let mut exp: i64 = 0;
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            self.pos += 1;
            let es = self.pos;
            if self.pos < self.s.len() && (self.s[self.pos] == b'-' || self.s[self.pos] == b'+') {
                self.pos += 1;
            }
            digits(self);
            exp = std::str::from_utf8(&self.s[es..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("bad exponent"))?;
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(self.err("malformed number"));
        }
        let mantissa: BigInt = format!("{int_part}{frac_part}0")
            .parse::<BigInt>()
            .map_err(|_| self.err("malformed number"))?
            / BigInt::from(10);
        let scale = exp - frac_part.len() as i64;
        if scale.abs() > 400 {
            return Err(self.err("exponent out of range"));
        }
        let ten = BigInt::from(10);
        let r = if scale >= 0 {
            BigRational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(RealValue::from_rational(r))
    }
}

fn combine(a: RealValue, b: RealValue, op: u8) -> RealValue {
    let approx = match op {
        b'+' => a.approx + b.approx,
        b'-' => a.approx - b.approx,
        b'*' => a.approx * b.approx,
        _ => a.approx / b.approx,
    };
    let exact = match (a.exact, b.exact) {
        (Some(x), Some(y)) => match op {
            b'+' => Some(x + y),
            b'-' => Some(x - y),
            b'*' => Some(x * y),
            _ if !y.is_zero() => Some(x / y),
            _ => None,
        },
        _ => None,
    };
    // Keep the approximation consistent with the exact value when we have one.
    match exact {
        Some(e) => RealValue {
            approx: rational_to_dd(&e),
            exact: Some(e),
        },
        None => RealValue {
            approx,
            exact: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_exact() {
        let v = parse_real("1/3").unwrap();
        assert_eq!(v.exact, Some(BigRational::new(1.into(), 3.into())));
        let v = parse_real("-0.25").unwrap();
        assert_eq!(v.to_f64(), -0.25);
        let v = parse_real("1.5e2").unwrap();
        assert_eq!(v.to_f64(), 150.0);
    }

    #[test]
    fn irrational_functions() {
        let v = parse_real("cbrt(4)").unwrap();
        assert!(v.exact.is_none());
        assert!((v.to_f64() - 4f64.cbrt()).abs() < 1e-15);
        let phi = parse_real("(1 + sqrt(5)) / 2").unwrap();
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(parse_real("").is_err());
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("foo(2)").is_err());
        assert!(parse_real("2 3").is_err());
        assert!(parse_real("sqrt(-1)").is_err());
    }
}
