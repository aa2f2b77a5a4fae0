//! Complex expressions in one variable `z`, for user-supplied fields.
//!
//! Grammar (left-associative binary operators, `^` binds tightest and takes
//! a signed integer literal):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' ['+' | '-'] INT)?
//! primary := NUMBER ['i'] | 'i' | 'z' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := 'conj' | 'exp'
//! ```

use num_complex::Complex64;

use crate::error::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Z,
    Neg(Box<Expr>),
    Conj(Box<Expr>),
    Exp(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, position: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position,
            message: message.into(),
        })
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.err(
                    self.pos,
                    format!("expected '{}', found '{}'", c as char, found as char),
                ),
                None => self.err(self.pos, format!("expected '{}', found end of input", c as char)),
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let negative = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "exponent must be an integer literal");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let n: i32 = match text.parse() {
            Ok(n) => n,
            Err(_) => return self.err(start, "exponent out of range"),
        };
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                // not an exponent after all; leave 'e' for the caller
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => self.err(start, format!("malformed number '{text}'")),
        }
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return self.err(self.pos, "unexpected end of input");
        };
        let start = self.pos;
        if c.is_ascii_digit() || c == b'.' {
            let v = self.number()?;
            if self.pos < self.src.len()
                && self.src[self.pos] == b'i'
                && !self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|b| b.is_ascii_alphanumeric())
            {
                self.pos += 1;
                return Ok(Expr::Const(Complex64::new(0.0, v)));
            }
            return Ok(Expr::Const(Complex64::new(v, 0.0)));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_alphabetic() {
            let name = self.ident();
            return match name {
                "z" => Ok(Expr::Z),
                "i" => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Expr::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                "conj" | "exp" => {
                    self.expect(b'(')?;
                    let arg = Box::new(self.expr()?);
                    self.expect(b')')?;
                    Ok(if name == "conj" {
                        Expr::Conj(arg)
                    } else {
                        Expr::Exp(arg)
                    })
                }
                _ => self.err(start, format!("unknown identifier '{name}'")),
            };
        }
        self.err(start, format!("unexpected character '{}'", c as char))
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return p.err(p.pos, format!("unexpected trailing '{}'", c as char));
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Z => z,
            Expr::Neg(a) => -a.eval(z)?,
            Expr::Conj(a) => a.eval(z)?.conj(),
            Expr::Exp(a) => a.eval(z)?.exp(),
            Expr::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Expr::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Expr::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Expr::Div(a, b) => {
                let den = b.eval(z)?;
                if den.norm() == 0.0 {
                    return Err(EvalError::DivisionByZero { re: z.re, im: z.im });
                }
                a.eval(z)? / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(z)?;
                if *n < 0 && base.norm() == 0.0 {
                    return Err(EvalError::DivisionByZero { re: z.re, im: z.im });
                }
                base.powi(*n)
            }
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EvalError::NonFinite { re: z.re, im: z.im });
        }
        Ok(v)
    }

    /// True when the expression does not mention `z`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Z => false,
            Expr::Neg(a) | Expr::Conj(a) | Expr::Exp(a) | Expr::Pow(a, _) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, z: Complex64) -> Complex64 {
        parse(s).unwrap().eval(z).unwrap()
    }

    #[test]
    fn examples() {
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(ev("1 - z*conj(z)", zero), Complex64::new(1.0, 0.0));
        assert_eq!(ev("(1+2i)^2", zero), Complex64::new(-3.0, 4.0));
        let pole = parse("1/(1-z)").unwrap().eval(Complex64::new(1.0, 0.0));
        assert!(matches!(pole, Err(EvalError::DivisionByZero { .. })));
    }

    #[test]
    fn left_associativity() {
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(ev("8 - 4 - 2", zero).re, 2.0);
        assert_eq!(ev("8 / 4 / 2", zero).re, 1.0);
        assert_eq!(ev("-2^2", zero).re, -4.0);
        assert_eq!(ev("2^-1", zero).re, 0.5);
        assert_eq!(ev("1.5e1 + 2.5i", zero), Complex64::new(15.0, 2.5));
    }

    #[test]
    fn functions() {
        let z = Complex64::new(0.3, -0.2);
        assert!((ev("exp(z)", z) - z.exp()).norm() < 1e-15);
        assert!((ev("conj(z)*z", z).im).abs() < 1e-15);
        assert!((ev("exp(i*pi) + 1", z)).norm() < 1e-15);
    }

    #[test]
    fn error_positions() {
        let e = parse("1 + * 2").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse("(1 + z").unwrap_err();
        assert_eq!(e.position, 6);
        let e = parse("foo(z)").unwrap_err();
        assert_eq!(e.position, 0);
        let e = parse("z ^ w").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse("z z").unwrap_err();
        assert_eq!(e.position, 2);
    }

    #[test]
    fn constancy() {
        assert!(parse("2 + 3i").unwrap().is_constant());
        assert!(!parse("conj(z)").unwrap().is_constant());
    }
}
