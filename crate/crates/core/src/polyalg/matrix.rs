use super::affine::VarId;
use super::poly::{Bound, Poly, Var};
use super::PolyError;

/// Dense row-major matrix of polynomials. Zero-dimensional matrices are legal
/// and propagate as empty.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Poly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Poly::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self, PolyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(PolyError::DimensionMismatch {
                what: "ragged row lengths".into(),
            });
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Numeric matrix lifted to constant polynomials (row-major data).
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| Poly::constant(data[i * cols + j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> impl Iterator<Item = &Poly> {
        self.entries.iter()
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn try_map(&self, f: impl Fn(&Poly) -> Result<Poly, PolyError>) -> Result<Self, PolyError> {
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(f)
                .collect::<Result<Vec<_>, _>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(PolyError::DimensionMismatch {
                what: format!(
                    "add {}x{} with {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|p| p.scale(s))
    }

    pub fn scale_poly(&self, s: &Poly) -> Result<Self, PolyError> {
        self.try_map(|p| p.try_mul(s))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Matrix product. At most one operand may carry decision variables so the
    /// result stays affine.
    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        if self.cols != other.rows {
            return Err(PolyError::DimensionMismatch {
                what: format!(
                    "mul {}x{} with {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        if self.has_decision_vars() && other.has_decision_vars() {
            return Err(PolyError::BilinearProduct);
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.try_mul(b)?;
                    let cur = out.get(i, j).add(&prod);
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    /// Symmetric part `He(a) = (a + a^T)/2`.
    pub fn he(&self) -> Result<Self, PolyError> {
        if !self.is_square() {
            return Err(PolyError::DimensionMismatch {
                what: format!("He of non-square {}x{}", self.rows, self.cols),
            });
        }
        self.add(&self.transpose()).map(|m| m.scale(0.5))
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn has_decision_vars(&self) -> bool {
        self.entries.iter().any(Poly::has_decision_vars)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn diff(&self, v: Var) -> Self {
        self.map(|p| p.diff(v))
    }

    pub fn integrate(&self, v: Var, lower: Bound, upper: Bound) -> Result<Self, PolyError> {
        self.try_map(|p| p.integrate(v, lower, upper))
    }

    pub fn substitute_num(&self, v: Var, value: f64) -> Result<Self, PolyError> {
        self.try_map(|p| p.substitute_num(v, value))
    }

    pub fn substitute_poly(&self, v: Var, value: &Poly) -> Result<Self, PolyError> {
        self.try_map(|p| p.substitute_poly(v, value))
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn insert_block(&mut self, r0: usize, c0: usize, block: &PolyMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    /// Adds `block` entrywise at offset `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &PolyMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                let s = self.get(r0 + i, c0 + j).add(block.get(i, j));
                self.set(r0 + i, c0 + j, s);
            }
        }
    }

    pub fn max_degree(&self) -> u16 {
        self.entries.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn max_degree_in(&self, v: Var) -> u16 {
        self.entries.iter().map(|p| p.degree_in(v)).max().unwrap_or(0)
    }

    /// Numeric evaluation at a point, row-major. Fails on decision variables.
    pub fn eval_num(&self, x: f64, y: f64, z: f64) -> Result<Vec<f64>, PolyError> {
        self.entries.iter().map(|p| p.eval_num(x, y, z)).collect()
    }

    /// Substitutes decision-variable values, yielding a numeric matrix.
    pub fn eval_decisions(&self, values: &[f64]) -> PolyMatrix {
        self.map(|p| p.eval_decisions(values))
    }

    pub fn abs_bound(&self) -> f64 {
        self.entries.iter().map(Poly::abs_bound).sum()
    }

    pub fn prune(&self, tol: f64) -> PolyMatrix {
        self.map(|p| p.prune(tol))
    }
}

/// One affine equation `sum_i w_i v_i + constant = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineEq {
    pub coeffs: Vec<(VarId, f64)>,
    pub constant: f64,
    /// (row, col, exponent) of the matrix entry and monomial it came from.
    pub origin: (usize, usize, (u16, u16, u16)),
}

/// Flattens the polynomial identity `p == 0` into one affine equation per
/// (entry, monomial) pair with any nonzero coefficient. For symmetric input
/// only the upper triangle is emitted.
pub fn coeff_equations(p: &PolyMatrix) -> Vec<AffineEq> {
    let symmetric = p.is_symmetric();
    let mut out = Vec::new();
    for i in 0..p.rows() {
        let j0 = if symmetric { i } else { 0 };
        for j in j0..p.cols() {
            for (e, c) in p.get(i, j).terms() {
                out.push(AffineEq {
                    coeffs: c.terms().collect(),
                    constant: c.constant_part(),
                    origin: (i, j, (e.ex, e.ey, e.ez)),
                });
            }
        }
    }
    out
}
