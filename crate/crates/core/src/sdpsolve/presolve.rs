//! Presolve: eliminates the free scalar variables from the equality system by
//! sparse Gaussian elimination, drops numerically empty and duplicate rows,
//! and records everything needed to back-substitute the variables after the
//! solve.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{GramRef, PresolveReport, Row, SdpProblem};
use crate::polyalg::VarId;
use ndarray::Array2;

/// A row in sparse map form during elimination.
#[derive(Clone, Debug, Default)]
pub(crate) struct WorkRow {
    pub gram: BTreeMap<GramRef, f64>,
    pub vars: BTreeMap<VarId, f64>,
    pub rhs: f64,
}

impl WorkRow {
    fn from_row(row: &Row) -> Self {
        let mut w = WorkRow {
            rhs: row.rhs,
            ..Default::default()
        };
        for &(g, v) in &row.gram {
            if v != 0.0 {
                *w.gram.entry(g).or_insert(0.0) += v;
            }
        }
        for &(id, v) in &row.vars {
            if v != 0.0 {
                *w.vars.entry(id).or_insert(0.0) += v;
            }
        }
        w
    }

    fn max_abs(&self) -> f64 {
        self.gram
            .values()
            .chain(self.vars.values())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// self -= factor * other
    fn axpy(&mut self, factor: f64, other: &WorkRow) {
        for (&g, &v) in &other.gram {
            let e = self.gram.entry(g).or_insert(0.0);
            *e -= factor * v;
            if e.abs() < 1e-14 {
                self.gram.remove(&g);
            }
        }
        for (&id, &v) in &other.vars {
            let e = self.vars.entry(id).or_insert(0.0);
            *e -= factor * v;
            if e.abs() < 1e-14 {
                self.vars.remove(&id);
            }
        }
        self.rhs -= factor * other.rhs;
    }
}

/// One elimination step: `var` is defined by `row` (which contains it with
/// coefficient `coeff`); later steps may still reference earlier variables.
#[derive(Clone, Debug)]
pub(crate) struct Pivot {
    pub var: VarId,
    pub coeff: f64,
    pub row: WorkRow,
}

pub(crate) struct Presolved {
    /// rows with all free variables eliminated, equilibrated to unit inf-norm
    pub rows: Vec<WorkRow>,
    /// inf-norm scale factor applied to each row (scaled row = original/scale)
    pub scales: Vec<f64>,
    pub pivots: Vec<Pivot>,
    pub report: PresolveReport,
}

/// Eliminates all free variables and normalizes the remaining rows.
pub(crate) fn presolve(prob: &SdpProblem) -> Presolved {
    let mut rows: Vec<Option<WorkRow>> = prob.rows.iter().map(|r| Some(WorkRow::from_row(r))).collect();

    // var -> set of row indices containing it
    let mut var_rows: BTreeMap<VarId, BTreeSet<usize>> = BTreeMap::new();
    for (ri, row) in rows.iter().enumerate() {
        for (&v, _) in &row.as_ref().unwrap().vars {
            var_rows.entry(v).or_default().insert(ri);
        }
    }

    let mut pivots = Vec::new();
    let mut unconstrained = 0usize;

    // Eliminate variables in ascending id order; pick the pivot row with the
    // fewest other variables (ties: largest coefficient, then lowest index)
    // to limit fill-in.
    let var_ids: Vec<VarId> = var_rows.keys().copied().collect();
    for v in var_ids {
        let Some(candidates) = var_rows.get(&v) else {
            continue;
        };
        let mut best: Option<(usize, usize, f64)> = None; // (other_vars, idx, |coeff|)
        for &ri in candidates {
            let Some(row) = rows[ri].as_ref() else { continue };
            let Some(&c) = row.vars.get(&v) else { continue };
            if c.abs() < 1e-12 * row.max_abs().max(1.0) {
                continue;
            }
            let others = row.vars.len() - 1;
            let better = match &best {
                None => true,
                Some((bo, bi, bc)) => {
                    let (bo, bi, bc) = (*bo, *bi, *bc);
                    others < bo || (others == bo && (c.abs() > bc * 4.0 || (c.abs() * 4.0 >= bc && ri < bi)))
                }
            };
            if better {
                best = Some((others, ri, c.abs()));
            }
        }
        let Some((_, pivot_idx, _)) = best else {
            unconstrained += 1;
            var_rows.remove(&v);
            continue;
        };
        let pivot_row = rows[pivot_idx].take().unwrap();
        // detach pivot row from the index
        for (&w, _) in &pivot_row.vars {
            if let Some(set) = var_rows.get_mut(&w) {
                set.remove(&pivot_idx);
            }
        }
        let coeff = pivot_row.vars[&v];
        let targets: Vec<usize> = var_rows.get(&v).map(|s| s.iter().copied().collect()).unwrap_or_default();
        for ri in targets {
            let Some(row) = rows[ri].as_mut() else { continue };
            let Some(&c) = row.vars.get(&v) else { continue };
            let before: Vec<VarId> = row.vars.keys().copied().collect();
            row.axpy(c / coeff, &pivot_row);
            let after: BTreeSet<VarId> = row.vars.keys().copied().collect();
            // update the index for vars added/removed by the combination
            for w in before {
                if !after.contains(&w) {
                    if let Some(set) = var_rows.get_mut(&w) {
                        set.remove(&ri);
                    }
                }
            }
            for &w in &after {
                var_rows.entry(w).or_default().insert(ri);
            }
        }
        var_rows.remove(&v);
        pivots.push(Pivot {
            var: v,
            coeff,
            row: pivot_row,
        });
    }

    // Collect remaining rows; drop empties, detect inconsistency, dedup.
    let mut out = Vec::new();
    let mut scales = Vec::new();
    let mut dropped_zero = 0usize;
    let mut dropped_dup = 0usize;
    let mut inconsistent = false;
    let mut seen: HashMap<Vec<(GramRef, i64)>, f64> = HashMap::new();
    for row in rows.into_iter().flatten() {
        debug_assert!(row.vars.is_empty(), "variable survived elimination");
        let norm = row.max_abs();
        if norm < 1e-12 {
            if row.rhs.abs() > 1e-9 {
                inconsistent = true;
            }
            dropped_zero += 1;
            continue;
        }
        let scaled: Vec<(GramRef, f64)> = row.gram.iter().map(|(&g, &v)| (g, v / norm)).collect();
        let key: Vec<(GramRef, i64)> = scaled
            .iter()
            .map(|&(g, v)| (g, (v * 1e12).round() as i64))
            .collect();
        let rhs_scaled = row.rhs / norm;
        match seen.get(&key) {
            Some(&prev_rhs) => {
                if (prev_rhs - rhs_scaled).abs() > 1e-9 {
                    inconsistent = true;
                }
                dropped_dup += 1;
                continue;
            }
            None => {
                seen.insert(key, rhs_scaled);
            }
        }
        let mut w = WorkRow::default();
        for (g, v) in scaled {
            w.gram.insert(g, v);
        }
        w.rhs = rhs_scaled;
        out.push(w);
        scales.push(norm);
    }

    let report = PresolveReport {
        eliminated_vars: pivots.len(),
        unconstrained_vars: unconstrained,
        dropped_zero_rows: dropped_zero,
        dropped_duplicate_rows: dropped_dup,
        rows_out: out.len(),
        inconsistent,
    };
    Presolved {
        rows: out,
        scales,
        pivots,
        report,
    }
}

/// Recovers the free variables from the solved Gram blocks by walking the
/// pivot records in reverse.
pub(crate) fn back_substitute(
    prob: &SdpProblem,
    pre: &Presolved,
    blocks: &[Array2<f64>],
) -> Vec<f64> {
    let mut values = vec![0.0; prob.num_vars];
    let gram_value = |g: &GramRef| -> f64 {
        let q = &blocks[g.block];
        if g.i == g.j {
            q[[g.i, g.i]]
        } else {
            q[[g.i, g.j]]
        }
    };
    for pivot in pre.pivots.iter().rev() {
        let mut acc = pivot.row.rhs;
        for (g, &w) in &pivot.row.gram {
            acc -= w * gram_value(g);
        }
        for (&id, &w) in &pivot.row.vars {
            if id != pivot.var {
                acc -= w * values[id as usize];
            }
        }
        values[pivot.var as usize] = acc / pivot.coeff;
    }
    values
}
