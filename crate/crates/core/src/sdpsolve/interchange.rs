//! Sparse interchange format for external cross-validation (SDPA sparse
//! layout):
//!
//! ```text
//! <mDIM>                          number of constraints
//! <nBLOCK>                        number of blocks
//! <s1> <s2> ...                   block sizes, negative for diagonal blocks
//! <c1> <c2> ...                   objective vector (one entry per constraint)
//! <matno> <blkno> <i> <j> <value> one line per nonzero, 1-based, i <= j
//! ```
//!
//! `matno` 0 denotes the objective matrix F0; constraint `r` uses matno `r`.
//! The exported problem is the solver's shifted standard form, so an external
//! solver's optimal value equals `t* - 1`.

use super::presolve;
use super::std_form::StandardSdp;
use super::SdpProblem;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("interchange parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Serializes the problem's standard form.
pub fn export_interchange(prob: &SdpProblem) -> String {
    let pre = presolve::presolve(prob);
    let std = StandardSdp::from_presolved(prob, &pre);
    to_text(&std)
}

pub fn to_text(std: &StandardSdp) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", std.num_rows()));
    out.push_str(&format!("{}\n", std.num_blocks()));
    let sizes: Vec<String> = std
        .block_sizes
        .iter()
        .zip(&std.diag_blocks)
        .map(|(&s, &diag)| {
            if diag {
                format!("-{s}")
            } else {
                format!("{s}")
            }
        })
        .collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let rhs: Vec<String> = std.rhs.iter().map(|v| format!("{v}")).collect();
    out.push_str(&rhs.join(" "));
    out.push('\n');
    // F0 = -C so that max tr(F0 Y) == -min <C, Y>
    for (g, entries) in std.objective.iter().enumerate() {
        for &(i, j, a) in entries {
            out.push_str(&format!("0 {} {} {} {}\n", g + 1, i + 1, j + 1, -a));
        }
    }
    for (r, row) in std.rows.iter().enumerate() {
        for (g, entries) in row.iter().enumerate() {
            for &(i, j, a) in entries {
                out.push_str(&format!("{} {} {} {} {}\n", r + 1, g + 1, i + 1, j + 1, a));
            }
        }
    }
    out
}

/// Parses the interchange text back into a standard-form problem.
pub fn import_interchange(text: &str) -> Result<StandardSdp, InterchangeError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('*') && !l.starts_with('"'));
    let err = |line: usize, msg: &str| InterchangeError::Parse {
        line,
        msg: msg.to_string(),
    };

    let (l1, t1) = lines.next().ok_or_else(|| err(0, "missing mDIM"))?;
    let m: usize = t1
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| err(l1, "bad mDIM"))?;
    let (l2, t2) = lines.next().ok_or_else(|| err(0, "missing nBLOCK"))?;
    let nblock: usize = t2
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| err(l2, "bad nBLOCK"))?;
    let (l3, t3) = lines.next().ok_or_else(|| err(0, "missing block sizes"))?;
    let mut block_sizes = Vec::with_capacity(nblock);
    let mut diag_blocks = Vec::with_capacity(nblock);
    for tok in t3.split_whitespace().take(nblock) {
        let v: i64 = tok.parse().map_err(|_| err(l3, "bad block size"))?;
        block_sizes.push(v.unsigned_abs() as usize);
        diag_blocks.push(v < 0);
    }
    if block_sizes.len() != nblock {
        return Err(err(l3, "wrong number of block sizes"));
    }
    // the objective-vector line is empty (and filtered) when mDIM = 0
    let rhs: Vec<f64> = if m == 0 {
        Vec::new()
    } else {
        let (l4, t4) = lines.next().ok_or_else(|| err(0, "missing objective vector"))?;
        let rhs: Vec<f64> = t4
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err(l4, "bad objective vector"))?;
        if rhs.len() != m {
            return Err(err(l4, "objective vector length != mDIM"));
        }
        rhs
    };

    let mut objective: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nblock];
    let mut rows: Vec<Vec<Vec<(usize, usize, f64)>>> = vec![vec![Vec::new(); nblock]; m];
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(err(ln, "expected `matno blkno i j value`"));
        }
        let matno: usize = toks[0].parse().map_err(|_| err(ln, "bad matno"))?;
        let blkno: usize = toks[1].parse().map_err(|_| err(ln, "bad blkno"))?;
        let i: usize = toks[2].parse().map_err(|_| err(ln, "bad i"))?;
        let j: usize = toks[3].parse().map_err(|_| err(ln, "bad j"))?;
        let v: f64 = toks[4].parse().map_err(|_| err(ln, "bad value"))?;
        if matno > m || blkno == 0 || blkno > nblock {
            return Err(err(ln, "matno/blkno out of range"));
        }
        let (g, bi, bj) = (blkno - 1, i - 1, j - 1);
        if bi > bj || bj >= block_sizes[g] {
            return Err(err(ln, "indices must be 1-based upper-triangular"));
        }
        if matno == 0 {
            objective[g].push((bi, bj, -v));
        } else {
            rows[matno - 1][g].push((bi, bj, v));
        }
    }
    let block_labels = (0..nblock).map(|g| format!("block{}", g + 1)).collect();
    Ok(StandardSdp {
        block_sizes,
        diag_blocks,
        block_labels,
        objective,
        rows,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{BlockSpec, GramRef, Row, SdpProblem, SolveOpts};
    use super::*;

    fn toy() -> SdpProblem {
        let mut prob = SdpProblem::default();
        prob.blocks.push(BlockSpec::new(2, "X"));
        prob.rows.push(Row {
            gram: vec![
                (GramRef { block: 0, i: 0, j: 0 }, 1.0),
                (GramRef { block: 0, i: 1, j: 1 }, 1.0),
            ],
            vars: vec![],
            rhs: 1.0,
            label: "trace".into(),
        });
        prob
    }

    #[test]
    fn roundtrip_preserves_structure_bitwise() {
        let text = export_interchange(&toy());
        let std = import_interchange(&text).unwrap();
        assert_eq!(std.block_sizes, vec![2, 1]);
        assert_eq!(std.diag_blocks, vec![false, true]);
        assert_eq!(std.num_rows(), 1);
        let text2 = to_text(&std);
        assert_eq!(text, text2);
    }

    #[test]
    fn reimported_problem_solves_to_same_optimum() {
        let prob = toy();
        let sol = super::super::solve(&prob, &SolveOpts::default());
        let std = import_interchange(&export_interchange(&prob)).unwrap();
        let res = super::super::solve_standard(&std, &SolveOpts::default());
        // optimal value of the standard form is s* = 1 - t*
        assert!((res.objective - (1.0 - sol.t_star)).abs() < 1e-6);
    }

    #[test]
    fn empty_problem_is_header_only() {
        let prob = SdpProblem::default();
        let text = export_interchange(&prob);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "0");
        assert_eq!(lines[1], "1"); // the margin-cap slot
        let std = import_interchange(&text).unwrap();
        assert_eq!(std.num_rows(), 0);
    }
}
