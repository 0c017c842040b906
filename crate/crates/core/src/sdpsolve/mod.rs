//! Block-diagonal semidefinite programming: problem representation, a
//! presolve that eliminates free decision variables, a dense primal-dual
//! interior-point solver, and a sparse interchange format for external
//! cross-validation.
//!
//! Problems are feasibility systems over PSD Gram blocks `Q_g` and free
//! scalar variables `v`:
//!
//! ```text
//! sum_g <A_{r,g}, Q_g> + b_r^T v = rhs_r        (one row per equality)
//! Q_g >= 0
//! ```
//!
//! The solver maximizes a uniform margin `t` subject to
//! `Q_g - t P_g >= 0` and `t <= 1`, where `P_g` is a 0/1 diagonal projector
//! (all ones by default). The problem is declared feasible iff
//! `t* > 10^-7`. Structurally null coordinates — directions forced to zero
//! by the constraint system itself — are excluded from `P_g` by the
//! assembly, since a uniform margin over them would be unattainable.

mod interchange;
mod ipm;
mod presolve;
mod std_form;

pub use interchange::{export_interchange, import_interchange};
pub use ipm::{solve_standard, IpmOutcome, IpmResult};
pub use std_form::StandardSdp;

use crate::polyalg::VarId;
use ndarray::Array2;

/// Reference to one upper-triangular entry of a Gram block (`i <= j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GramRef {
    pub block: usize,
    pub i: usize,
    pub j: usize,
}

/// One affine equality over Gram entries and free variables:
/// `sum w * Q[block][i,j] + sum w * v = rhs`, where an off-diagonal
/// reference counts the symmetric pair once.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub gram: Vec<(GramRef, f64)>,
    pub vars: Vec<(VarId, f64)>,
    pub rhs: f64,
    pub label: String,
}

/// One PSD block of the problem.
#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub size: usize,
    pub label: String,
    /// Margin projector diagonal; `margin_mask[i] == false` excludes
    /// coordinate `i` from the uniform margin.
    pub margin_mask: Vec<bool>,
}

impl BlockSpec {
    pub fn new(size: usize, label: impl Into<String>) -> Self {
        Self {
            size,
            label: label.into(),
            margin_mask: vec![true; size],
        }
    }

    pub fn with_mask(size: usize, label: impl Into<String>, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), size);
        Self {
            size,
            label: label.into(),
            margin_mask: mask,
        }
    }
}

/// A margin-feasibility SDP over PSD blocks plus free scalar variables.
#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    pub rows: Vec<Row>,
    pub num_vars: usize,
}

impl SdpProblem {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    /// Total number of scalar unknowns across Gram blocks.
    pub fn gram_dofs(&self) -> usize {
        self.blocks.iter().map(|b| b.size * (b.size + 1) / 2).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    NumericalFailure,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct SolveOpts {
    pub tol: f64,
    pub max_iter: usize,
    pub verbosity: u8,
    /// declare feasible iff t* exceeds this
    pub feas_threshold: f64,
}

impl Default for SolveOpts {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            verbosity: 0,
            feas_threshold: 1e-7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PresolveReport {
    pub eliminated_vars: usize,
    pub unconstrained_vars: usize,
    pub dropped_zero_rows: usize,
    pub dropped_duplicate_rows: usize,
    pub rows_out: usize,
    pub inconsistent: bool,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// maximized uniform margin
    pub t_star: f64,
    /// Gram block values (margin shift undone)
    pub block_values: Vec<Array2<f64>>,
    /// free decision variables, back-substituted from the elimination record
    pub var_values: Vec<f64>,
    /// equality multipliers of the presolved rows
    pub duals: Vec<f64>,
    pub iterations: usize,
    pub duality_gap: f64,
    pub max_residual: f64,
    pub presolve: PresolveReport,
}

/// Solves the margin-feasibility problem: presolve eliminates the free
/// variables, the margin shift produces a standard-form SDP, and the
/// interior-point method solves it.
pub fn solve(prob: &SdpProblem, opts: &SolveOpts) -> SdpSolution {
    let pre = presolve::presolve(prob);
    let report = pre.report.clone();
    if report.inconsistent {
        return SdpSolution {
            status: SolveStatus::Infeasible,
            t_star: f64::NEG_INFINITY,
            block_values: prob
                .blocks
                .iter()
                .map(|b| Array2::zeros((b.size, b.size)))
                .collect(),
            var_values: vec![0.0; prob.num_vars],
            duals: Vec::new(),
            iterations: 0,
            duality_gap: f64::NAN,
            max_residual: f64::NAN,
            presolve: report,
        };
    }
    let std = std_form::StandardSdp::from_presolved(prob, &pre);
    let res = ipm::solve_standard(&std, opts);

    let t_star = 1.0 - res.objective;
    let status = match res.outcome {
        IpmOutcome::Converged => {
            if t_star > opts.feas_threshold {
                SolveStatus::Feasible
            } else {
                SolveStatus::Infeasible
            }
        }
        IpmOutcome::MaxIter => SolveStatus::MaxIter,
        IpmOutcome::NumericalFailure => SolveStatus::NumericalFailure,
    };

    // Undo the margin shift: Q = Xhat + t * P.
    let mut block_values = Vec::with_capacity(prob.blocks.len());
    for (g, spec) in prob.blocks.iter().enumerate() {
        let mut q = res.blocks[g].clone();
        for i in 0..spec.size {
            if spec.margin_mask[i] {
                q[[i, i]] += t_star;
            }
        }
        block_values.push(q);
    }
    let var_values = presolve::back_substitute(prob, &pre, &block_values);

    SdpSolution {
        status,
        t_star,
        block_values,
        var_values,
        duals: res.duals,
        iterations: res.iterations,
        duality_gap: res.duality_gap,
        max_residual: res.max_residual,
        presolve: report,
    }
}
