//! Standard-form conversion: the margin shift `Xhat_g = Q_g - t P_g` with
//! `t = 1 - s` turns the margin-feasibility problem into
//!
//! ```text
//! min s   s.t.   sum_g <A_{r,g}, Xhat_g> - tau_r s = rhs_r - tau_r,
//!                Xhat_g >= 0,  s >= 0,
//! ```
//!
//! where `tau_r` is the sum of masked diagonal coefficients of row `r`. The
//! slack `s` occupies a trailing 1x1 block, so the result is a plain conic
//! program `min <C,X> s.t. <A_r,X> = b_r, X >= 0`.

use super::presolve::Presolved;
use super::SdpProblem;

/// Sparse symmetric constraint data for one (row, block) pair: entries
/// `(i, j, a)` with `i <= j` meaning matrix values `A[i,j] = A[j,i] = a`.
pub type BlockEntries = Vec<(usize, usize, f64)>;

/// A standard-form block SDP `min <C,X> s.t. <A_r,X> = b_r, X >= 0`.
#[derive(Clone, Debug)]
pub struct StandardSdp {
    pub block_sizes: Vec<usize>,
    /// marks blocks that are diagonal-only (LP slots) for the interchange
    /// format; the solver treats them like any other block
    pub diag_blocks: Vec<bool>,
    pub block_labels: Vec<String>,
    /// objective per block, same sparse convention as constraints
    pub objective: Vec<BlockEntries>,
    /// rows[r][g] = entries of A_r in block g (possibly empty)
    pub rows: Vec<Vec<BlockEntries>>,
    pub rhs: Vec<f64>,
}

impl StandardSdp {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// Builds the shifted standard form from a presolved margin problem.
    /// Block `G` (the last one) is the cap slack `s`.
    pub(crate) fn from_presolved(prob: &SdpProblem, pre: &Presolved) -> Self {
        let gcount = prob.blocks.len();
        let mut block_sizes: Vec<usize> = prob.blocks.iter().map(|b| b.size).collect();
        block_sizes.push(1); // s
        let mut diag_blocks = vec![false; gcount];
        diag_blocks.push(true);
        let mut block_labels: Vec<String> = prob.blocks.iter().map(|b| b.label.clone()).collect();
        block_labels.push("margin-cap".into());

        // objective: min s
        let mut objective: Vec<BlockEntries> = vec![Vec::new(); gcount + 1];
        objective[gcount].push((0, 0, 1.0));

        let mut rows = Vec::with_capacity(pre.rows.len());
        let mut rhs = Vec::with_capacity(pre.rows.len());
        for work in &pre.rows {
            let mut per_block: Vec<BlockEntries> = vec![Vec::new(); gcount + 1];
            let mut tau = 0.0;
            for (g, &w) in &work.gram {
                // inner-product convention: off-diagonal entries halved
                let a = if g.i == g.j { w } else { 0.5 * w };
                per_block[g.block].push((g.i, g.j, a));
                if g.i == g.j && prob.blocks[g.block].margin_mask[g.i] {
                    tau += w;
                }
            }
            if tau != 0.0 {
                per_block[gcount].push((0, 0, -tau));
            }
            rows.push(per_block);
            rhs.push(work.rhs - tau);
        }
        Self {
            block_sizes,
            diag_blocks,
            block_labels,
            objective,
            rows,
            rhs,
        }
    }
}
