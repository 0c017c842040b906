use std::collections::BTreeMap;
use std::fmt;

/// Identifier of a scalar decision variable in the global variable list of an
/// assembled program.
pub type VarId = u32;

/// A real number plus a sparse linear combination of decision variables.
///
/// Zero-weight entries are never stored, so two coefficients are equal iff
/// their constants and term maps match exactly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineCoeff {
    constant: f64,
    terms: BTreeMap<VarId, f64>,
}

impl AffineCoeff {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    /// The coefficient `1 * v`.
    pub fn var(v: VarId) -> Self {
        Self::scaled_var(v, 1.0)
    }

    pub fn scaled_var(v: VarId, w: f64) -> Self {
        let mut terms = BTreeMap::new();
        if w != 0.0 {
            terms.insert(v, w);
        }
        Self {
            constant: 0.0,
            terms,
        }
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(&v, &w)| (v, w))
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_vars(&self) -> bool {
        !self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant += other.constant;
        for (&v, &w) in &other.terms {
            let e = out.terms.entry(v).or_insert(0.0);
            *e += w;
            if *e == 0.0 {
                out.terms.remove(&v);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        Self {
            constant: self.constant * s,
            terms: self
                .terms
                .iter()
                .filter_map(|(&v, &w)| {
                    let sw = w * s;
                    (sw != 0.0).then_some((v, sw))
                })
                .collect(),
        }
    }

    /// Product of two coefficients. At most one side may carry decision
    /// variables, otherwise the result would be bilinear.
    pub fn mul(&self, other: &Self) -> Result<Self, BilinearProduct> {
        if self.has_vars() && other.has_vars() {
            return Err(BilinearProduct);
        }
        if self.is_constant() {
            Ok(other.scale(self.constant))
        } else {
            Ok(self.scale(other.constant))
        }
    }

    /// Substitutes decision variables with concrete values, yielding a number.
    /// Variables absent from `values` count as zero.
    pub fn eval(&self, values: &[f64]) -> f64 {
        let mut acc = self.constant;
        for (&v, &w) in &self.terms {
            acc += w * values.get(v as usize).copied().unwrap_or(0.0);
        }
        acc
    }

    pub fn abs_bound(&self) -> f64 {
        self.constant.abs() + self.terms.values().map(|w| w.abs()).sum::<f64>()
    }
}

/// Product of two expressions that both carry decision variables; the
/// assembled programs are affine, so this indicates a pipeline bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BilinearProduct;

impl fmt::Display for BilinearProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "product of two decision-variable expressions is bilinear")
    }
}

impl std::error::Error for BilinearProduct {}

impl fmt::Display for AffineCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        if self.constant != 0.0 {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (&v, &w) in &self.terms {
            if first {
                write!(f, "{w}*v{v}")?;
                first = false;
            } else if w < 0.0 {
                write!(f, " - {}*v{v}", -w)?;
            } else {
                write!(f, " + {w}*v{v}")?;
            }
        }
        Ok(())
    }
}
