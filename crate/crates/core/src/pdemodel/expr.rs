use std::fmt;

use crate::polyalg::{Poly, PolyError, Var};

use super::ModelError;

/// Expression in the model-file grammar: `+ - * / ^` over literals and the
/// identifiers `x` and `lambda`. Division is only legal where the denominator
/// evaluates to a nonzero constant once `lambda` is fixed.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Lambda,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u16),
}

impl Expr {
    pub fn references_x(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Lambda => false,
            Expr::X => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.references_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.references_x() || b.references_x()
            }
        }
    }

    /// Evaluates with `lambda` fixed, producing a polynomial in `x`.
    pub fn eval_lambda(&self, lambda: f64) -> Result<Poly, ModelError> {
        let poly = |r: Result<Poly, PolyError>| r.map_err(|e| ModelError::Expr(e.to_string()));
        match self {
            Expr::Num(v) => Ok(Poly::constant(*v)),
            Expr::X => Ok(Poly::var(Var::X)),
            Expr::Lambda => Ok(Poly::constant(lambda)),
            Expr::Neg(a) => Ok(a.eval_lambda(lambda)?.neg()),
            Expr::Add(a, b) => Ok(a.eval_lambda(lambda)?.add(&b.eval_lambda(lambda)?)),
            Expr::Sub(a, b) => Ok(a.eval_lambda(lambda)?.sub(&b.eval_lambda(lambda)?)),
            Expr::Mul(a, b) => poly(a.eval_lambda(lambda)?.try_mul(&b.eval_lambda(lambda)?)),
            Expr::Div(a, b) => {
                let den = b.eval_lambda(lambda)?;
                match den.as_constant() {
                    Some(c) if c != 0.0 => Ok(a.eval_lambda(lambda)?.scale(1.0 / c)),
                    Some(_) => Err(ModelError::DivisionByZero {
                        expr: self.to_string(),
                        lambda,
                    }),
                    None => Err(ModelError::Expr(format!(
                        "non-constant denominator `{den}`"
                    ))),
                }
            }
            Expr::Pow(a, e) => poly(a.eval_lambda(lambda)?.pow(*e)),
        }
    }

    /// Evaluates an x-free expression to a scalar.
    pub fn eval_scalar(&self, lambda: f64) -> Result<f64, ModelError> {
        let p = self.eval_lambda(lambda)?;
        p.as_constant()
            .ok_or_else(|| ModelError::Expr(format!("expected a scalar, got `{p}`")))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Parenthesize according to precedence so the output reparses to the
        // same tree.
        fn prec(e: &Expr) -> u8 {
            match e {
                Expr::Num(_) | Expr::X | Expr::Lambda => 3,
                Expr::Pow(..) => 3,
                Expr::Neg(_) => 0,
                Expr::Mul(..) | Expr::Div(..) => 2,
                Expr::Add(..) | Expr::Sub(..) => 1,
            }
        }
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if prec(e) < min {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => write!(f, "x"),
            Expr::Lambda => write!(f, "lambda"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 2)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "+")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "-")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 3)
            }
            Expr::Pow(a, e) => {
                wrap(f, a, 3)?;
                write!(f, "^{e}")
            }
        }
    }
}

/// Parses the expression grammar. `allow_x` distinguishes A entries (x and
/// lambda) from F entries (lambda only).
pub fn parse_expr(text: &str, allow_x: bool) -> Result<Expr, ModelError> {
    let mut p = ExprParser {
        bytes: text.as_bytes(),
        pos: 0,
        allow_x,
        text,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    allow_x: bool,
    text: &'a str,
}

impl<'a> ExprParser<'a> {
    fn err(&self, msg: &str) -> ModelError {
        ModelError::Expr(format!("`{}` at byte {}: {}", self.text, self.pos, msg))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Expr, ModelError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Expr::Neg(Box::new(self.product()?))
            }
            Some(b'+') => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.product()?));
                }
                b'-' => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.product()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Expr, ModelError> {
        let mut acc = self.power()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.power()?));
                }
                b'/' => {
                    self.pos += 1;
                    acc = Expr::Div(Box::new(acc), Box::new(self.power()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Expr, ModelError> {
        let base = self.atom()?;
        if let Some(b'^') = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected integer exponent"));
            }
            let e: u16 = std::str::from_utf8(&self.bytes[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent out of range"))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ModelError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.atom()?)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                match ident {
                    "x" if self.allow_x => Ok(Expr::X),
                    "x" => Err(self.err("variable `x` is not allowed here")),
                    "lambda" => Ok(Expr::Lambda),
                    other => Err(self.err(&format!("unknown identifier `{other}`"))),
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_digit()
                        || self.bytes[self.pos] == b'.'
                        || self.bytes[self.pos] == b'e'
                        || self.bytes[self.pos] == b'E'
                        || ((self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-')
                            && matches!(self.bytes[self.pos - 1], b'e' | b'E')))
                {
                    self.pos += 1;
                }
                let v: f64 = std::str::from_utf8(&self.bytes[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| self.err("malformed number"))?;
                Ok(Expr::Num(v))
            }
            _ => Err(self.err("expected expression")),
        }
    }
}
