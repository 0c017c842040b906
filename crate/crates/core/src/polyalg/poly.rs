use std::collections::BTreeMap;
use std::fmt;

use super::affine::{AffineCoeff, VarId};
use super::PolyError;

/// The three spatial/kernel variables. `z` only ever appears transiently as an
/// integration variable inside kernel assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => write!(f, "x"),
            Var::Y => write!(f, "y"),
            Var::Z => write!(f, "z"),
        }
    }
}

/// Exponent triple of a monomial `x^ex * y^ey * z^ez`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Expo {
    pub ex: u16,
    pub ey: u16,
    pub ez: u16,
}

impl Expo {
    pub fn new(ex: u16, ey: u16, ez: u16) -> Self {
        Self { ex, ey, ez }
    }

    pub fn degree(&self) -> u16 {
        self.ex + self.ey + self.ez
    }

    pub fn get(&self, v: Var) -> u16 {
        match v {
            Var::X => self.ex,
            Var::Y => self.ey,
            Var::Z => self.ez,
        }
    }

    fn with(&self, v: Var, e: u16) -> Self {
        let mut out = *self;
        match v {
            Var::X => out.ex = e,
            Var::Y => out.ey = e,
            Var::Z => out.ez = e,
        }
        out
    }
}

// Graded lexicographic order with x < y < z: sort by total degree, then by
// exponent pattern so that for equal degree x-heavy monomials come first
// (d = 2 reads [x^2, xy, y^2, xz, yz, z^2]).
impl Ord for Expo {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.ez, self.ey).cmp(&(other.degree(), other.ez, other.ey))
    }
}

impl PartialOrd for Expo {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Bound of a definite integral: one of `0`, `1`, `x`, `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Zero,
    One,
    Var(Var),
}

/// Sparse multivariate polynomial in `x`, `y`, `z` whose coefficients are
/// affine expressions in decision variables. Identically-zero coefficients
/// are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Expo, AffineCoeff>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(Expo::default(), AffineCoeff::constant(c));
        p
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Expo::default().with(v, 1), AffineCoeff::constant(1.0));
        p
    }

    /// A single decision variable as a degree-zero polynomial.
    pub fn decision(v: VarId) -> Self {
        let mut p = Self::zero();
        p.add_term(Expo::default(), AffineCoeff::var(v));
        p
    }

    pub fn monomial(expo: Expo, coeff: AffineCoeff) -> Self {
        let mut p = Self::zero();
        p.add_term(expo, coeff);
        p
    }

    pub fn add_term(&mut self, expo: Expo, coeff: AffineCoeff) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(expo) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&coeff);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &AffineCoeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, expo: &Expo) -> AffineCoeff {
        self.terms.get(expo).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> u16 {
        self.terms.keys().map(Expo::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u16 {
        self.terms.keys().map(|e| e.get(v)).max().unwrap_or(0)
    }

    pub fn has_decision_vars(&self) -> bool {
        self.terms.values().any(AffineCoeff::has_vars)
    }

    /// The constant `c` when the polynomial is `c * x^0 y^0 z^0` (or zero).
    pub fn as_constant(&self) -> Option<f64> {
        if self.is_zero() {
            return Some(0.0);
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.degree() == 0 && c.is_constant() {
                return Some(c.constant_part());
            }
        }
        None
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&e, c)| (e, c.scale(s)))
                .collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        if self.has_decision_vars() && other.has_decision_vars() {
            return Err(PolyError::BilinearProduct);
        }
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = Expo::new(ea.ex + eb.ex, ea.ey + eb.ey, ea.ez + eb.ez);
                let c = ca.mul(cb).map_err(|_| PolyError::BilinearProduct)?;
                out.add_term(e, c);
            }
        }
        Ok(out)
    }

    /// Integer power of a decision-variable-free polynomial.
    pub fn pow(&self, n: u16) -> Result<Self, PolyError> {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.try_mul(self)?;
        }
        Ok(out)
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: Var) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let k = e.get(v);
            if k > 0 {
                out.add_term(e.with(v, k - 1), c.scale(k as f64));
            }
        }
        out
    }

    /// Exact definite integral over `v` between polynomial bounds.
    /// Neither bound may reference the integration variable itself.
    pub fn integrate(&self, v: Var, lower: Bound, upper: Bound) -> Result<Self, PolyError> {
        for b in [lower, upper] {
            if b == Bound::Var(v) {
                return Err(PolyError::BadBound(v));
            }
        }
        // Antiderivative in v, then evaluate at the bounds.
        let mut anti = Self::zero();
        for (e, c) in &self.terms {
            let k = e.get(v);
            anti.add_term(e.with(v, k + 1), c.scale(1.0 / (k as f64 + 1.0)));
        }
        let eval_at = |b: Bound| -> Result<Self, PolyError> {
            match b {
                Bound::Zero => anti.substitute_num(v, 0.0),
                Bound::One => anti.substitute_num(v, 1.0),
                Bound::Var(w) => anti.substitute_poly(v, &Poly::var(w)),
            }
        };
        Ok(eval_at(upper)?.sub(&eval_at(lower)?))
    }

    pub fn substitute_num(&self, v: Var, value: f64) -> Result<Self, PolyError> {
        self.substitute_poly(v, &Poly::constant(value))
    }

    /// Replaces `v` by a decision-variable-free polynomial.
    pub fn substitute_poly(&self, v: Var, value: &Poly) -> Result<Self, PolyError> {
        if value.has_decision_vars() {
            return Err(PolyError::BilinearProduct);
        }
        let max_pow = self.degree_in(v);
        let mut powers: Vec<Poly> = Vec::with_capacity(max_pow as usize + 1);
        powers.push(Poly::one());
        for k in 1..=max_pow {
            powers.push(powers[(k - 1) as usize].try_mul(value)?);
        }
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let k = e.get(v);
            let base = Poly::monomial(e.with(v, 0), c.clone());
            out = out.add(&base.try_mul(&powers[k as usize])?);
        }
        Ok(out)
    }

    /// Numeric evaluation; fails on decision variables.
    pub fn eval_num(&self, x: f64, y: f64, z: f64) -> Result<f64, PolyError> {
        if self.has_decision_vars() {
            return Err(PolyError::DecisionVarsPresent);
        }
        Ok(self.eval_affine(x, y, z).constant_part())
    }

    /// Evaluation of the variables only; decision variables stay symbolic.
    pub fn eval_affine(&self, x: f64, y: f64, z: f64) -> AffineCoeff {
        let mut acc = AffineCoeff::zero();
        for (e, c) in &self.terms {
            let m = x.powi(e.ex as i32) * y.powi(e.ey as i32) * z.powi(e.ez as i32);
            acc = acc.add(&c.scale(m));
        }
        acc
    }

    /// Substitutes decision-variable values, producing a numeric polynomial.
    pub fn eval_decisions(&self, values: &[f64]) -> Poly {
        let mut out = Self::zero();
        for (&e, c) in &self.terms {
            out.add_term(e, AffineCoeff::constant(c.eval(values)));
        }
        out
    }

    /// Sum of absolute values of all stored coefficient entries; an upper
    /// bound for the polynomial's magnitude on the unit box.
    pub fn abs_bound(&self) -> f64 {
        self.terms.values().map(AffineCoeff::abs_bound).sum()
    }

    /// Drops terms whose coefficients are negligible relative to `scale`.
    pub fn prune(&self, tol: f64) -> Poly {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs_bound() > tol)
                .map(|(&e, c)| (e, c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let mono = {
                let mut s = String::new();
                for (v, k) in [(Var::X, e.ex), (Var::Y, e.ey), (Var::Z, e.ez)] {
                    if k == 1 {
                        s.push_str(&format!("{}{}", if s.is_empty() { "" } else { "*" }, v));
                    } else if k > 1 {
                        s.push_str(&format!("{}{}^{}", if s.is_empty() { "" } else { "*" }, v, k));
                    }
                }
                s
            };
            let (sign, mag) = if c.is_constant() {
                let v = c.constant_part();
                (v < 0.0, v.abs())
            } else {
                (false, f64::NAN)
            };
            if first {
                if sign {
                    write!(f, "-")?;
                }
                first = false;
            } else if sign {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if c.is_constant() {
                if mono.is_empty() {
                    write!(f, "{mag}")?;
                } else if mag == 1.0 {
                    write!(f, "{mono}")?;
                } else {
                    write!(f, "{mag}*{mono}")?;
                }
            } else if mono.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
        }
        Ok(())
    }
}

/// Parses the plain polynomial syntax used by the model file format, e.g.
/// `3.5*x^2*y - 1`. Variables are exactly `x` and `y`.
pub fn parse_poly(text: &str) -> Result<Poly, PolyError> {
    Parser::new(text).parse_full()
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
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

    fn parse_full(&mut self) -> Result<Poly, PolyError> {
        let p = self.parse_sum()?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(self.err("trailing input"));
        }
        Ok(p)
    }

    fn parse_sum(&mut self) -> Result<Poly, PolyError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.parse_product()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.parse_product()?
            }
            _ => self.parse_product()?,
        };
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.parse_product()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.parse_product()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_product(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.parse_power()?;
        while let Some(b'*') = self.peek() {
            self.pos += 1;
            acc = acc.try_mul(&self.parse_power()?)?;
        }
        Ok(acc)
    }

    fn parse_power(&mut self) -> Result<Poly, PolyError> {
        let base = self.parse_atom()?;
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
            return base.pow(e);
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(Poly::var(Var::X))
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(Poly::var(Var::Y))
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
                Ok(Poly::constant(v))
            }
            _ => Err(self.err("expected term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var(Var::X)
    }
    fn y() -> Poly {
        Poly::var(Var::Y)
    }
    fn z() -> Poly {
        Poly::var(Var::Z)
    }

    #[test]
    fn cancellation_yields_one() {
        // (x) + (1 - x) = 1
        let p = x().add(&Poly::one().sub(&x()));
        assert_eq!(p.as_constant(), Some(1.0));
    }

    #[test]
    fn decision_vars_merge_linearly() {
        // (2x + v0*y) + (v0*y) = 2x + 2 v0 y
        let v0y = Poly::monomial(Expo::new(0, 1, 0), AffineCoeff::var(0));
        let p = x().scale(2.0).add(&v0y).add(&v0y);
        assert_eq!(
            p.coeff(&Expo::new(0, 1, 0)),
            AffineCoeff::scaled_var(0, 2.0)
        );
        assert_eq!(p.coeff(&Expo::new(1, 0, 0)), AffineCoeff::constant(2.0));
    }

    #[test]
    fn diff_examples() {
        // d/dx x^3 = 3x^2
        let p = x().pow(3).unwrap().diff(Var::X);
        assert_eq!(p, x().pow(2).unwrap().scale(3.0));
        // d/dy x^2 = 0
        assert!(x().pow(2).unwrap().diff(Var::Y).is_zero());
        // d/dx (v0*x*y) = v0*y
        let v0xy = Poly::monomial(Expo::new(1, 1, 0), AffineCoeff::var(0));
        assert_eq!(
            v0xy.diff(Var::X),
            Poly::monomial(Expo::new(0, 1, 0), AffineCoeff::var(0))
        );
    }

    #[test]
    fn integrate_examples() {
        // int_0^x z^2 dz = x^3/3
        let p = z()
            .pow(2)
            .unwrap()
            .integrate(Var::Z, Bound::Zero, Bound::Var(Var::X))
            .unwrap();
        assert_eq!(p, x().pow(3).unwrap().scale(1.0 / 3.0));
        // int_y^x 1 dz = x - y
        let p = Poly::one()
            .integrate(Var::Z, Bound::Var(Var::Y), Bound::Var(Var::X))
            .unwrap();
        assert_eq!(p, x().sub(&y()));
        // int_0^1 x*z dz = x/2
        let p = x()
            .try_mul(&z())
            .unwrap()
            .integrate(Var::Z, Bound::Zero, Bound::One)
            .unwrap();
        assert_eq!(p, x().scale(0.5));
        // bound referencing the integration variable is rejected
        assert!(x().integrate(Var::X, Bound::Zero, Bound::Var(Var::X)).is_err());
    }

    #[test]
    fn substitute_examples() {
        // (x*y)|_{y->x} = x^2
        let p = x().try_mul(&y()).unwrap();
        assert_eq!(p.substitute_poly(Var::Y, &x()).unwrap(), x().pow(2).unwrap());
        // (x^2+1)|_{x->0} = 1
        let p = x().pow(2).unwrap().add(&Poly::one());
        assert_eq!(p.substitute_num(Var::X, 0.0).unwrap().as_constant(), Some(1.0));
        // (x-y)|_{y->x} = 0
        let p = x().sub(&y());
        assert!(p.substitute_poly(Var::Y, &x()).unwrap().is_zero());
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        // collect monomials of degree <= 2 in x, y in storage order
        let p = Poly::one()
            .add(&x())
            .add(&y())
            .add(&x().pow(2).unwrap())
            .add(&x().try_mul(&y()).unwrap())
            .add(&y().pow(2).unwrap());
        let order: Vec<Expo> = p.terms().map(|(e, _)| *e).collect();
        assert_eq!(
            order,
            vec![
                Expo::new(0, 0, 0),
                Expo::new(1, 0, 0),
                Expo::new(0, 1, 0),
                Expo::new(2, 0, 0),
                Expo::new(1, 1, 0),
                Expo::new(0, 2, 0),
            ]
        );
    }

    #[test]
    fn parse_and_print_roundtrip() {
        let p = parse_poly("3.5*x^2*y - 1").unwrap();
        assert_eq!(p.eval_num(2.0, 3.0, 0.0).unwrap(), 3.5 * 4.0 * 3.0 - 1.0);
        let printed = p.to_string();
        let q = parse_poly(&printed).unwrap();
        assert_eq!(p, q);
    }
}
