//! Exact rotation angles of the form `p/q·π + r/s`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad angle expression at offset {offset}: {message}")]
pub struct AngleError {
    pub offset: usize,
    pub message: String,
}

/// A rational multiple of π plus a rational constant, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Angle {
    pi: Rational64,
    constant: Rational64,
}

impl Angle {
    pub const ZERO: Angle = Angle {
        pi: Rational64::new_raw(0, 1),
        constant: Rational64::new_raw(0, 1),
    };

    /// `numer/denom · π`. Panics if `denom` is zero.
    pub fn pi_fraction(numer: i64, denom: i64) -> Self {
        Self {
            pi: Rational64::new(numer, denom),
            constant: Rational64::zero(),
        }
    }

    pub fn new(pi: Rational64, constant: Rational64) -> Self {
        Self { pi, constant }
    }

    pub fn pi_coefficient(&self) -> Rational64 {
        self.pi
    }

    pub fn constant(&self) -> Rational64 {
        self.constant
    }

    pub fn radians(&self) -> f64 {
        ratio_f64(self.pi) * PI + ratio_f64(self.constant)
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn render_ratio(r: Rational64, out: &mut String) {
    out.push_str(&r.numer().to_string());
    if *r.denom() != 1 {
        out.push('/');
        out.push_str(&r.denom().to_string());
    }
}

impl fmt::Display for Angle {
    /// Renders `pi/2`, `-3*pi/4`, `2*pi+1/2`, `0`, ... which parse back to the same value
    /// and are valid OpenQASM 2.0 expressions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if !self.pi.is_zero() {
            let (n, d) = (*self.pi.numer(), *self.pi.denom());
            match n {
                1 => out.push_str("pi"),
                -1 => out.push_str("-pi"),
                _ => {
                    out.push_str(&n.to_string());
                    out.push_str("*pi");
                }
            }
            if d != 1 {
                out.push('/');
                out.push_str(&d.to_string());
            }
        }
        if !self.constant.is_zero() || out.is_empty() {
            if !out.is_empty() && !self.constant.is_negative() {
                out.push('+');
            }
            render_ratio(self.constant, &mut out);
        }
        f.write_str(&out)
    }
}

impl FromStr for Angle {
    type Err = AngleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser { src: s.as_bytes(), pos: 0 };
        let value = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(value)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> AngleError {
        AngleError {
            offset: self.pos,
            message: message.to_string(),
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

    fn expr(&mut self) -> Result<Angle, AngleError> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let overflow = || self.error("arithmetic overflow");
            acc = if op == b'+' {
                Angle::new(
                    acc.pi.checked_add(&rhs.pi).ok_or_else(overflow)?,
                    acc.constant.checked_add(&rhs.constant).ok_or_else(overflow)?,
                )
            } else {
                Angle::new(
                    acc.pi.checked_sub(&rhs.pi).ok_or_else(overflow)?,
                    acc.constant.checked_sub(&rhs.constant).ok_or_else(overflow)?,
                )
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Angle, AngleError> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' {
                self.mul(acc, rhs)?
            } else {
                self.div(acc, rhs)?
            };
        }
        Ok(acc)
    }

    fn mul(&self, a: Angle, b: Angle) -> Result<Angle, AngleError> {
        let (scalar, other) = if a.pi.is_zero() {
            (a.constant, b)
        } else if b.pi.is_zero() {
            (b.constant, a)
        } else {
            return Err(self.error("product of two pi terms is not an angle"));
        };
        let overflow = || self.error("arithmetic overflow");
        Ok(Angle::new(
            other.pi.checked_mul(&scalar).ok_or_else(overflow)?,
            other.constant.checked_mul(&scalar).ok_or_else(overflow)?,
        ))
    }

    fn div(&self, a: Angle, b: Angle) -> Result<Angle, AngleError> {
        if !b.pi.is_zero() {
            return Err(self.error("division by a pi term"));
        }
        if b.constant.is_zero() {
            return Err(self.error("division by zero"));
        }
        let overflow = || self.error("arithmetic overflow");
        Ok(Angle::new(
            a.pi.checked_div(&b.constant).ok_or_else(overflow)?,
            a.constant.checked_div(&b.constant).ok_or_else(overflow)?,
        ))
    }

    fn unary(&mut self) -> Result<Angle, AngleError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(Angle::new(-v.pi, -v.constant))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Angle, AngleError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    b"pi" => Ok(Angle::pi_fraction(1, 1)),
                    _ => {
                        self.pos = start;
                        Err(self.error("only literal angles built from numbers and pi are supported"))
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    /// Integer or decimal literal with optional exponent, converted exactly to a rational.
    fn number(&mut self) -> Result<Angle, AngleError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len: i32 = 0;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        let mut exponent: i32 = 0;
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            self.pos += 1;
            let negative = match self.src.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let exp_start = self.pos;
            while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[exp_start..self.pos]).unwrap_or("");
            exponent = text.parse().map_err(|_| self.error("malformed exponent"))?;
            if negative {
                exponent = -exponent;
            }
        }
        let mantissa: i64 = digits.parse().map_err(|_| self.error("number too large"))?;
        let scale = exponent - frac_len;
        let pow = 10i64
            .checked_pow(scale.unsigned_abs())
            .ok_or_else(|| self.error("number too large"))?;
        let value = if scale >= 0 {
            Rational64::from_integer(mantissa.checked_mul(pow).ok_or_else(|| self.error("number too large"))?)
        } else {
            Rational64::new(mantissa, pow)
        };
        Ok(Angle::new(Rational64::zero(), value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Angle {
        s.parse().unwrap()
    }

    #[test]
    fn literals() {
        assert_eq!(parse("0"), Angle::ZERO);
        assert_eq!(parse("pi"), Angle::pi_fraction(1, 1));
        assert_eq!(parse("pi/2"), Angle::pi_fraction(1, 2));
        assert_eq!(parse("-3*pi/4"), Angle::pi_fraction(-3, 4));
        assert_eq!(parse("3*pi/2"), Angle::pi_fraction(3, 2));
        assert_eq!(parse("-pi/2"), Angle::pi_fraction(-1, 2));
        assert_eq!(parse("(pi)/(4)"), Angle::pi_fraction(1, 4));
        assert_eq!(parse("0.5"), Angle::new(Rational64::zero(), Rational64::new(1, 2)));
        assert_eq!(parse("2.5e-1"), Angle::new(Rational64::zero(), Rational64::new(1, 4)));
        assert_eq!(parse("pi + 1/2").constant(), Rational64::new(1, 2));
    }

    #[test]
    fn rejections() {
        assert!("pi*pi".parse::<Angle>().is_err());
        assert!("1/0".parse::<Angle>().is_err());
        assert!("1/pi".parse::<Angle>().is_err());
        assert!("theta".parse::<Angle>().is_err());
        assert!("pi/2)".parse::<Angle>().is_err());
        assert!("".parse::<Angle>().is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(Angle::ZERO.to_string(), "0");
        assert_eq!(Angle::pi_fraction(1, 2).to_string(), "pi/2");
        assert_eq!(Angle::pi_fraction(-1, 1).to_string(), "-pi");
        assert_eq!(Angle::pi_fraction(-3, 4).to_string(), "-3*pi/4");
        assert_eq!(Angle::pi_fraction(2, 1).to_string(), "2*pi");
        assert_eq!(
            Angle::new(Rational64::new(1, 1), Rational64::new(-1, 3)).to_string(),
            "pi-1/3"
        );
    }

    #[test]
    fn radians() {
        assert!((parse("pi/2").radians() - PI / 2.0).abs() < 1e-15);
        assert!((parse("-3*pi/4").radians() + 0.75 * PI).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn display_parses_back(pn in -50i64..50, pd in 1i64..50, cn in -50i64..50, cd in 1i64..50) {
            let a = Angle::new(Rational64::new(pn, pd), Rational64::new(cn, cd));
            prop_assert_eq!(a.to_string().parse::<Angle>().unwrap(), a);
        }
    }
}
