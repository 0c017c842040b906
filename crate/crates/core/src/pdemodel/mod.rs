//! The PDE class under study: `dt w(x,t) = A(x) w_alpha(x,t)` on (0,1) with
//! homogeneous boundary conditions `F w_alpha^b = 0`, parameterized by a
//! scalar `lambda`. Ships the three built-in examples and a structured text
//! file format for user models.

mod expr;

pub use expr::{parse_expr, Expr};

use crate::basisproj::StackLayout;
use crate::polyalg::{PolyMatrix, Var};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("expression error: {0}")]
    Expr(String),
    #[error("division by zero in `{expr}` at lambda = {lambda}")]
    DivisionByZero { expr: String, lambda: f64 },
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
    #[error("model file parse error: {0}")]
    Parse(String),
    #[error("dimension error: {0}")]
    Shape(String),
    #[error("alpha must be >= 1: boundary machinery degenerates for pure order-0 models")]
    AlphaZero,
}

/// A concrete PDE instance with `lambda` already substituted.
///
/// `a` has shape `beta x beta(alpha+1)` with polynomial-in-x entries; `f` is
/// the real boundary matrix of shape `beta*alpha x 2*beta*alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeModel {
    pub layout: StackLayout,
    pub a: PolyMatrix,
    pub f: PolyMatrix,
    pub label: String,
}

impl PdeModel {
    pub fn alpha(&self) -> usize {
        self.layout.alpha
    }

    pub fn beta(&self) -> usize {
        self.layout.beta
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.layout.alpha == 0 {
            return Err(ModelError::AlphaZero);
        }
        let (b, ba) = (self.layout.beta, self.layout.beta * self.layout.alpha);
        if self.a.rows() != b || self.a.cols() != self.layout.dim_stack() {
            return Err(ModelError::Shape(format!(
                "A must be {} x {}, got {} x {}",
                b,
                self.layout.dim_stack(),
                self.a.rows(),
                self.a.cols()
            )));
        }
        if self.f.rows() != ba || self.f.cols() != 2 * ba {
            return Err(ModelError::Shape(format!(
                "F must be {} x {}, got {} x {}",
                ba,
                2 * ba,
                self.f.rows(),
                self.f.cols()
            )));
        }
        if self.a.has_decision_vars()
            || self.a.max_degree_in(Var::Y) > 0
            || self.a.max_degree_in(Var::Z) > 0
        {
            return Err(ModelError::Shape(
                "A must be numeric and univariate in x".into(),
            ));
        }
        if self.f.max_degree() > 0 {
            return Err(ModelError::Shape("F must be constant".into()));
        }
        Ok(())
    }

    /// F as a dense row-major array.
    pub fn f_data(&self) -> Vec<f64> {
        self.f.eval_num(0.0, 0.0, 0.0).expect("F is numeric")
    }
}

/// A lambda-parameterized model. A entries are expressions in `(x, lambda)`,
/// F entries expressions in `lambda` alone (rational expressions are fine,
/// e.g. `1/(1-lambda)`).
#[derive(Clone, Debug, PartialEq)]
pub struct ParamModel {
    pub alpha: usize,
    pub beta: usize,
    pub a_entries: Vec<Vec<Expr>>,
    pub f_entries: Vec<Vec<Expr>>,
    pub label: String,
}

impl ParamModel {
    pub fn layout(&self) -> StackLayout {
        StackLayout::new(self.alpha, self.beta)
    }

    /// Substitutes `lambda`, yielding a numeric-coefficient model.
    pub fn instantiate(&self, lambda: f64) -> Result<PdeModel, ModelError> {
        let cols_a = self.beta * (self.alpha + 1);
        let mut a = PolyMatrix::zeros(self.beta, cols_a);
        for (i, row) in self.a_entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let p = e.eval_lambda(lambda).map_err(|err| match err {
                    ModelError::DivisionByZero { expr, lambda } => ModelError::DivisionByZero {
                        expr: format!("A[{i}][{j}]: {expr}"),
                        lambda,
                    },
                    other => other,
                })?;
                a.set(i, j, p);
            }
        }
        let ba = self.beta * self.alpha;
        let mut f = PolyMatrix::zeros(ba, 2 * ba);
        for (i, row) in self.f_entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let v = e.eval_scalar(lambda).map_err(|err| match err {
                    ModelError::DivisionByZero { expr, lambda } => ModelError::DivisionByZero {
                        expr: format!("F[{i}][{j}]: {expr}"),
                        lambda,
                    },
                    other => other,
                })?;
                f.set(i, j, crate::polyalg::Poly::constant(v));
            }
        }
        let model = PdeModel {
            layout: self.layout(),
            a,
            f,
            label: self.label.clone(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Serializes to the model file format; the result reparses to an equal
    /// model.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("label = \"{}\"\n", self.label));
        out.push_str(&format!("alpha = {}\n", self.alpha));
        out.push_str(&format!("beta  = {}\n", self.beta));
        let fmt_row = |row: &[Expr]| {
            let cells: Vec<String> = row.iter().map(|e| format!("\"{e}\"")).collect();
            format!("[ {} ]", cells.join(", "))
        };
        if self.beta == 1 {
            out.push_str(&format!("A = {}\n", fmt_row(&self.a_entries[0])));
        } else {
            let rows: Vec<String> = self.a_entries.iter().map(|r| fmt_row(r)).collect();
            out.push_str(&format!("A = [ {} ]\n", rows.join(", ")));
        }
        let rows: Vec<String> = self.f_entries.iter().map(|r| fmt_row(r)).collect();
        out.push_str(&format!("F = [ {} ]\n", rows.join(", ")));
        out
    }
}

/// Names of the built-in example models.
pub const BUILTIN_NAMES: [&str; 3] = ["example1", "example2", "example3"];

/// Built-in example models:
///
/// * `example1` — scalar parabolic equation with distributed coefficients
///   (alpha = 2, beta = 1),
/// * `example2` — two first-order transport equations coupled in-domain and
///   at the boundaries (alpha = 1, beta = 2),
/// * `example3` — beam equation rewritten as a second-order system
///   (alpha = 2, beta = 2).
pub fn builtin(name: &str) -> Result<ParamModel, ModelError> {
    let text = match name {
        "example1" => EXAMPLE1,
        "example2" => EXAMPLE2,
        "example3" => EXAMPLE3,
        other => return Err(ModelError::UnknownBuiltin(other.to_string())),
    };
    parse_model(text)
}

const EXAMPLE1: &str = r#"
label = "example1"
alpha = 2
beta  = 1
A = [ "lambda", "0.5*x", "x^2+1" ]
F = [ ["0","0","1","0"], ["0","1","0","0"] ]
"#;

const EXAMPLE2: &str = r#"
label = "example2"
alpha = 1
beta  = 2
A = [ ["0", "x-3", "(lambda-1)*(x^2+1)", "0"], ["0", "0", "0", "x+1"] ]
F = [ ["0","0","1","-3"], ["0","1","0","0"] ]
"#;

const EXAMPLE3: &str = r#"
label = "example3"
alpha = 2
beta  = 2
A = [ ["0","0","0","0","0","1"], ["0","0","0","0","-1","0"] ]
F = [ ["0","0","0","0","1","0","0","-1/(1-lambda)"],
      ["0","0","0","0","0","1-lambda","1","0"],
      ["1","0","0","0","0","0","0","0"],
      ["0","1","0","0","0","0","0","0"] ]
"#;

/// Parses the structured model file format (TOML surface syntax):
///
/// ```text
/// alpha = 2
/// beta  = 1
/// A = [ "lambda", "0.5*x", "x^2+1" ]         # beta rows of beta(alpha+1)
/// F = [ ["0","0","1","0"], ["0","1","0","0"] ]  # beta*alpha rows of 2*beta*alpha
/// ```
///
/// A may be a flat list when beta = 1. Row and column counts are validated
/// against alpha and beta.
pub fn parse_model(text: &str) -> Result<ParamModel, ModelError> {
    let doc: toml::Value = text
        .parse()
        .map_err(|e: toml::de::Error| ModelError::Parse(e.to_string()))?;
    let table = doc
        .as_table()
        .ok_or_else(|| ModelError::Parse("expected a table at top level".into()))?;

    let get_usize = |key: &str| -> Result<usize, ModelError> {
        table
            .get(key)
            .and_then(toml::Value::as_integer)
            .filter(|&v| v >= 0)
            .map(|v| v as usize)
            .ok_or_else(|| ModelError::Parse(format!("missing or invalid `{key}`")))
    };
    let alpha = get_usize("alpha")?;
    let beta = get_usize("beta")?;
    if beta == 0 {
        return Err(ModelError::Shape("beta must be positive".into()));
    }
    if alpha == 0 {
        return Err(ModelError::AlphaZero);
    }
    let label = table
        .get("label")
        .and_then(toml::Value::as_str)
        .unwrap_or("user")
        .to_string();

    // A: either a flat list of strings (beta = 1) or a list of rows.
    let a_val = table
        .get("A")
        .ok_or_else(|| ModelError::Parse("missing `A`".into()))?;
    let a_rows_raw: Vec<Vec<&str>> = parse_string_matrix(a_val, "A")?;
    let f_val = table
        .get("F")
        .ok_or_else(|| ModelError::Parse("missing `F`".into()))?;
    let f_rows_raw: Vec<Vec<&str>> = parse_string_matrix(f_val, "F")?;

    let expect = |what: &str, rows: &Vec<Vec<&str>>, r: usize, c: usize| -> Result<(), ModelError> {
        if rows.len() != r || rows.iter().any(|row| row.len() != c) {
            return Err(ModelError::Shape(format!(
                "{what} must have {r} rows of {c} entries (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(())
    };
    expect("A", &a_rows_raw, beta, beta * (alpha + 1))?;
    expect("F", &f_rows_raw, beta * alpha, 2 * beta * alpha)?;

    let parse_rows = |rows: &Vec<Vec<&str>>, allow_x: bool, what: &str| {
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| {
                        parse_expr(s, allow_x)
                            .map_err(|e| ModelError::Parse(format!("{what}[{i}][{j}]: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(ParamModel {
        alpha,
        beta,
        a_entries: parse_rows(&a_rows_raw, true, "A")?,
        f_entries: parse_rows(&f_rows_raw, false, "F")?,
        label,
    })
}

fn parse_string_matrix<'v>(v: &'v toml::Value, what: &str) -> Result<Vec<Vec<&'v str>>, ModelError> {
    let arr = v
        .as_array()
        .ok_or_else(|| ModelError::Parse(format!("`{what}` must be an array")))?;
    if arr.iter().all(|e| e.is_str()) {
        // flat row
        return Ok(vec![arr.iter().map(|e| e.as_str().unwrap()).collect()]);
    }
    arr.iter()
        .enumerate()
        .map(|(i, row)| {
            row.as_array()
                .and_then(|cells| {
                    cells
                        .iter()
                        .map(toml::Value::as_str)
                        .collect::<Option<Vec<_>>>()
                })
                .ok_or_else(|| {
                    ModelError::Parse(format!("`{what}` row {i} must be an array of strings"))
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_poly;

    #[test]
    fn example1_instantiates() {
        let m = builtin("example1").unwrap();
        assert_eq!((m.alpha, m.beta), (2, 1));
        let pde = m.instantiate(2.0).unwrap();
        assert_eq!(pde.a.get(0, 0).as_constant(), Some(2.0));
        assert_eq!(pde.a.get(0, 1), &parse_poly("0.5*x").unwrap());
        assert_eq!(pde.a.get(0, 2), &parse_poly("x^2+1").unwrap());
        assert_eq!(
            pde.f_data(),
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn example2_coefficient_vanishes_at_one() {
        let m = builtin("example2").unwrap();
        assert_eq!((m.alpha, m.beta), (1, 2));
        let pde = m.instantiate(1.0).unwrap();
        // row 1 = [0, x-3, 0, 0]
        assert!(pde.a.get(0, 0).is_zero());
        assert_eq!(pde.a.get(0, 1), &parse_poly("x-3").unwrap());
        assert!(pde.a.get(0, 2).is_zero());
        assert!(pde.a.get(0, 3).is_zero());
        // F row 1 = [0,0,1,-3]
        assert_eq!(pde.f_data()[..4], [0.0, 0.0, 1.0, -3.0]);
    }

    #[test]
    fn example3_pole_at_one() {
        let m = builtin("example3").unwrap();
        assert_eq!((m.alpha, m.beta), (2, 2));
        assert!(matches!(
            m.instantiate(1.0),
            Err(ModelError::DivisionByZero { .. })
        ));
        let pde = m.instantiate(0.5).unwrap();
        // A = [[0,0,0,0,0,1],[0,0,0,0,-1,0]]
        assert_eq!(pde.a.get(0, 5).as_constant(), Some(1.0));
        assert_eq!(pde.a.get(1, 4).as_constant(), Some(-1.0));
        // F[0][7] = -1/(1-lambda) = -2
        assert_eq!(pde.f_data()[7], -2.0);
    }

    #[test]
    fn serialize_roundtrips() {
        for name in BUILTIN_NAMES {
            let m = builtin(name).unwrap();
            let text = m.serialize();
            let m2 = parse_model(&text).unwrap();
            assert_eq!(m, m2, "roundtrip failed for {name}");
        }
    }

    #[test]
    fn grammar_violations_are_rejected() {
        let bad = r#"
alpha = 1
beta = 1
A = [ "y", "0" ]
F = [ ["1","0"] ]
"#;
        assert!(parse_model(bad).is_err());
        let bad_shape = r#"
alpha = 1
beta = 1
A = [ "x", "0", "0" ]
F = [ ["1","0"] ]
"#;
        assert!(matches!(parse_model(bad_shape), Err(ModelError::Shape(_))));
    }
}
