//! Dense primal-dual interior-point method for standard-form block SDPs,
//! using the symmetrized HKM direction with a Mehrotra predictor-corrector.
//! Deterministic: fixed orderings, no randomized pivoting.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, EigValsh, FactorizeC, SolveC, UPLO};

use super::std_form::{BlockEntries, StandardSdp};
use super::SolveOpts;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IpmOutcome {
    Converged,
    MaxIter,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct IpmResult {
    pub outcome: IpmOutcome,
    /// primal objective <C, X> at the returned iterate
    pub objective: f64,
    pub blocks: Vec<Array2<f64>>,
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// relative duality gap at the returned iterate
    pub duality_gap: f64,
    /// max of relative primal/dual residuals
    pub max_residual: f64,
}

/// `<A, G>` for sparse symmetric `A` against a (not necessarily symmetric)
/// dense `G`; the symmetric part of `G` is picked up automatically.
fn dot_sym(entries: &BlockEntries, g: &Array2<f64>) -> f64 {
    let mut acc = 0.0;
    for &(i, j, a) in entries {
        if i == j {
            acc += a * g[[i, i]];
        } else {
            acc += a * (g[[i, j]] + g[[j, i]]);
        }
    }
    acc
}

/// Adds `w * A` into dense symmetric `m`.
fn add_scaled(m: &mut Array2<f64>, entries: &BlockEntries, w: f64) {
    for &(i, j, a) in entries {
        m[[i, j]] += w * a;
        if i != j {
            m[[j, i]] += w * a;
        }
    }
}

fn frob(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Maximum step `alpha` with `X + alpha * dX >= 0`, via the smallest
/// eigenvalue of `L^-1 dX L^-T`.
fn max_step(x: &Array2<f64>, dx: &Array2<f64>) -> Option<f64> {
    let n = x.nrows();
    if n == 0 {
        return Some(f64::INFINITY);
    }
    let l = x.cholesky(UPLO::Lower).ok()?;
    // forward substitution on both sides: T = L^-1 dX L^-T
    let mut t = dx.clone();
    // solve L * B = dX  (column-wise forward substitution)
    for col in 0..n {
        for i in 0..n {
            let mut s = t[[i, col]];
            for k in 0..i {
                s -= l[[i, k]] * t[[k, col]];
            }
            t[[i, col]] = s / l[[i, i]];
        }
    }
    // solve B * L^T = T  => (L * B^T = T^T): forward substitution on rows
    for row in 0..n {
        for j in 0..n {
            let mut s = t[[row, j]];
            for k in 0..j {
                s -= t[[row, k]] * l[[j, k]];
            }
            t[[row, j]] = s / l[[j, j]];
        }
    }
    // smallest eigenvalue of the symmetrized transform
    let tsym = (&t + &t.t()) * 0.5;
    let evals = tsym.eigvalsh(UPLO::Lower).ok()?;
    let lam = evals.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if lam >= 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(-1.0 / lam)
    }
}

struct RowsByBlock {
    /// for each block: (row index, entry slice index into `rows`)
    per_block: Vec<Vec<usize>>,
}

/// Solves `min <C,X> s.t. <A_r,X> = b_r, X >= 0` and returns the final
/// iterate. Infeasible-start; the caller interprets the objective.
pub fn solve_standard(std: &StandardSdp, opts: &SolveOpts) -> IpmResult {
    let m = std.num_rows();
    let gcount = std.num_blocks();
    let sizes = &std.block_sizes;
    let ntot: usize = sizes.iter().sum();

    if m == 0 {
        // no constraints: X = 0 is optimal for min <C, X> with C >= 0
        return IpmResult {
            outcome: IpmOutcome::Converged,
            objective: 0.0,
            blocks: sizes.iter().map(|&n| Array2::zeros((n, n))).collect(),
            duals: Vec::new(),
            iterations: 0,
            duality_gap: 0.0,
            max_residual: 0.0,
        };
    }

    let index = RowsByBlock {
        per_block: {
            let mut per: Vec<Vec<usize>> = vec![Vec::new(); gcount];
            for (r, row) in std.rows.iter().enumerate() {
                for (g, entries) in row.iter().enumerate() {
                    if !entries.is_empty() {
                        per[g].push(r);
                    }
                }
            }
            per
        },
    };

    let b = Array1::from_vec(std.rhs.clone());
    let norm_b = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let norm_c = 1.0
        + std
            .objective
            .iter()
            .flat_map(|e| e.iter().map(|&(_, _, a)| a.abs()))
            .fold(0.0, f64::max);

    // initial point: eta * I on both sides
    let max_row_norm = std
        .rows
        .iter()
        .flat_map(|row| row.iter().flat_map(|e| e.iter().map(|&(_, _, a)| a.abs())))
        .fold(0.0, f64::max);
    let eta = 10.0_f64.max(norm_b).max(max_row_norm) * (ntot as f64).sqrt().max(1.0);
    let mut xs: Vec<Array2<f64>> = sizes.iter().map(|&n| Array2::eye(n) * eta).collect();
    let mut zs: Vec<Array2<f64>> = sizes.iter().map(|&n| Array2::eye(n) * eta.max(norm_c)).collect();
    let mut y = Array1::<f64>::zeros(m);

    let apply_a = |xs: &[Array2<f64>]| -> Array1<f64> {
        let mut out = Array1::zeros(m);
        for (r, row) in std.rows.iter().enumerate() {
            let mut acc = 0.0;
            for (g, entries) in row.iter().enumerate() {
                acc += dot_sym(entries, &xs[g]);
            }
            out[r] = acc;
        }
        out
    };
    let adjoint = |y: &Array1<f64>, g: usize| -> Array2<f64> {
        let n = sizes[g];
        let mut out = Array2::zeros((n, n));
        for &r in &index.per_block[g] {
            add_scaled(&mut out, &std.rows[r][g], y[r]);
        }
        out
    };
    let c_dense: Vec<Array2<f64>> = (0..gcount)
        .map(|g| {
            let mut cm = Array2::zeros((sizes[g], sizes[g]));
            add_scaled(&mut cm, &std.objective[g], 1.0);
            cm
        })
        .collect();

    let mut best: Option<(f64, IpmResult)> = None;
    let mut iterations = 0usize;

    for iter in 0..opts.max_iter {
        iterations = iter;
        // residuals
        let ax = apply_a(&xs);
        let rp = &b - &ax;
        let rds: Vec<Array2<f64>> = (0..gcount)
            .map(|g| &c_dense[g] - &adjoint(&y, g) - &zs[g])
            .collect();
        let pobj: f64 = (0..gcount).map(|g| dot_sym(&std.objective[g], &xs[g])).sum();
        let dobj: f64 = b.dot(&y);
        let gap: f64 = (0..gcount)
            .map(|g| (&xs[g] * &zs[g]).sum())
            .sum::<f64>();
        let mu = gap / ntot as f64;
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let prim_res = rp.iter().map(|v| v.abs()).fold(0.0, f64::max) / norm_b;
        let dual_res = rds.iter().map(frob).fold(0.0, f64::max) / norm_c;
        let quality = relgap.max(prim_res).max(dual_res);

        let snapshot = |outcome: IpmOutcome| IpmResult {
            outcome,
            objective: pobj,
            blocks: xs.clone(),
            duals: y.to_vec(),
            iterations: iter,
            duality_gap: relgap,
            max_residual: prim_res.max(dual_res),
        };
        if best.as_ref().map_or(true, |(q, _)| quality < *q) {
            best = Some((quality, snapshot(IpmOutcome::MaxIter)));
        }
        if opts.verbosity > 0 {
            eprintln!(
                "ipm iter {iter:3}  mu {mu:9.2e}  gap {relgap:9.2e}  prim {prim_res:9.2e}  dual {dual_res:9.2e}  pobj {pobj:12.5e}"
            );
        }
        if quality <= opts.tol {
            return snapshot(IpmOutcome::Converged);
        }

        // factor Z and invert
        let zinvs: Vec<Array2<f64>> = {
            let mut out = Vec::with_capacity(gcount);
            for z in &zs {
                match z.factorizec(UPLO::Lower) {
                    Ok(f) => {
                        let n = z.nrows();
                        let mut inv = Array2::eye(n);
                        for col in 0..n {
                            let mut column = inv.column(col).to_owned();
                            if f.solvec_inplace(&mut column).is_err() {
                                return best_or_failure(best);
                            }
                            inv.column_mut(col).assign(&column);
                        }
                        out.push(inv);
                    }
                    Err(_) => return best_or_failure(best),
                }
            }
            out
        };

        // Schur complement M[r][s] = sum_g <A_s, He(X A_r Zinv)>
        let mut schur = Array2::<f64>::zeros((m, m));
        for g in 0..gcount {
            let n = sizes[g];
            if n == 0 || index.per_block[g].is_empty() {
                continue;
            }
            let x = &xs[g];
            let zi = &zinvs[g];
            let xs_flat = x.as_slice().unwrap();
            let zi_flat = zi.as_slice().unwrap();
            let mut u = vec![0.0_f64; n * n];
            let rows_here = &index.per_block[g];
            for (pos, &r) in rows_here.iter().enumerate() {
                u.iter_mut().for_each(|v| *v = 0.0);
                for &(i, j, a) in &std.rows[r][g] {
                    // U += a * (x_i zr_j^T + x_j zr_i^T); x rows == x cols
                    let xi = &xs_flat[i * n..(i + 1) * n];
                    let zj = &zi_flat[j * n..(j + 1) * n];
                    for p in 0..n {
                        let c = a * xi[p];
                        if c != 0.0 {
                            let urow = &mut u[p * n..(p + 1) * n];
                            for q in 0..n {
                                urow[q] += c * zj[q];
                            }
                        }
                    }
                    if i != j {
                        let xj = &xs_flat[j * n..(j + 1) * n];
                        let zi_row = &zi_flat[i * n..(i + 1) * n];
                        for p in 0..n {
                            let c = a * xj[p];
                            if c != 0.0 {
                                let urow = &mut u[p * n..(p + 1) * n];
                                for q in 0..n {
                                    urow[q] += c * zi_row[q];
                                }
                            }
                        }
                    }
                }
                // M[r,s] += <A_s, He(U)> for s <= r within this block
                for &s in rows_here.iter().take(pos + 1) {
                    let mut acc = 0.0;
                    for &(p, q, a) in &std.rows[s][g] {
                        if p == q {
                            acc += a * u[p * n + p];
                        } else {
                            acc += a * (u[p * n + q] + u[q * n + p]);
                        }
                    }
                    schur[[r, s]] += acc;
                }
            }
        }
        // mirror to the upper triangle
        for r in 0..m {
            for s in (r + 1)..m {
                schur[[r, s]] = schur[[s, r]];
            }
        }
        // light Tikhonov regularization keeps near-dependent rows factorable
        let diag_scale = (0..m).map(|i| schur[[i, i]]).fold(0.0, f64::max);
        let jitter0 = 1e-14 * diag_scale.max(1.0);
        let mut factor = None;
        let mut jitter = jitter0;
        for _ in 0..4 {
            let mut reg = schur.clone();
            for i in 0..m {
                reg[[i, i]] += jitter;
            }
            if let Ok(f) = reg.factorizec(UPLO::Lower) {
                factor = Some(f);
                break;
            }
            jitter *= 1e3;
        }
        let Some(factor) = factor else {
            return best_or_failure(best);
        };

        // helper: given Rc per block, compute search direction
        let direction = |rcs: &Vec<Array2<f64>>| -> Option<(Array1<f64>, Vec<Array2<f64>>, Vec<Array2<f64>>)> {
            // G_g = (Rc - X Rd) Zinv ; rhs_r = rp_r - sum_g <A_r, G_g>
            let gs: Vec<Array2<f64>> = (0..gcount)
                .map(|g| (&rcs[g] - &xs[g].dot(&rds[g])).dot(&zinvs[g]))
                .collect();
            let mut rhs = rp.clone();
            for (r, row) in std.rows.iter().enumerate() {
                let mut acc = 0.0;
                for (g, entries) in row.iter().enumerate() {
                    acc += dot_sym(entries, &gs[g]);
                }
                rhs[r] -= acc;
            }
            let mut dy = rhs;
            factor.solvec_inplace(&mut dy).ok()?;
            let mut dzs = Vec::with_capacity(gcount);
            let mut dxs = Vec::with_capacity(gcount);
            for g in 0..gcount {
                let aty = adjoint(&dy, g);
                let dz = &rds[g] - &aty;
                let dx_raw = &gs[g] + &xs[g].dot(&aty).dot(&zinvs[g]);
                let dx = (&dx_raw + &dx_raw.t()) * 0.5;
                dzs.push(dz);
                dxs.push(dx);
            }
            Some((dy, dxs, dzs))
        };

        // predictor (affine scaling): Rc = -X Z
        let rc_aff: Vec<Array2<f64>> = (0..gcount).map(|g| -xs[g].dot(&zs[g])).collect();
        let Some((_dy_aff, dx_aff, dz_aff)) = direction(&rc_aff) else {
            return best_or_failure(best);
        };
        let step_p_aff = blocks_max_step(&xs, &dx_aff);
        let step_d_aff = blocks_max_step(&zs, &dz_aff);
        let (Some(ap_aff), Some(ad_aff)) = (step_p_aff, step_d_aff) else {
            return best_or_failure(best);
        };
        let ap_aff = ap_aff.min(1.0);
        let ad_aff = ad_aff.min(1.0);
        let mut gap_aff = 0.0;
        for g in 0..gcount {
            let xn = &xs[g] + &(&dx_aff[g] * ap_aff);
            let zn = &zs[g] + &(&dz_aff[g] * ad_aff);
            gap_aff += (&xn * &zn).sum();
        }
        let mu_aff = gap_aff / ntot as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-6, 0.999_999);

        // corrector: Rc = sigma mu I - X Z - dX_aff dZ_aff
        let rc: Vec<Array2<f64>> = (0..gcount)
            .map(|g| {
                let n = sizes[g];
                let mut rcg = -xs[g].dot(&zs[g]) - dx_aff[g].dot(&dz_aff[g]);
                for i in 0..n {
                    rcg[[i, i]] += sigma * mu;
                }
                rcg
            })
            .collect();
        let Some((dy, dxs, dzs)) = direction(&rc) else {
            return best_or_failure(best);
        };
        let (Some(ap_max), Some(ad_max)) = (blocks_max_step(&xs, &dxs), blocks_max_step(&zs, &dzs))
        else {
            return best_or_failure(best);
        };
        let gamma = 0.98;
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);

        for g in 0..gcount {
            xs[g] = &xs[g] + &(&dxs[g] * ap);
            zs[g] = &zs[g] + &(&dzs[g] * ad);
        }
        y = &y + &(&dy * ad);
    }

    let (_, mut res) = best.expect("at least one iterate");
    res.outcome = IpmOutcome::MaxIter;
    res.iterations = iterations;
    res
}

fn blocks_max_step(xs: &[Array2<f64>], dxs: &[Array2<f64>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (x, dx) in xs.iter().zip(dxs) {
        alpha = alpha.min(max_step(x, dx)?);
    }
    Some(alpha)
}

fn best_or_failure(best: Option<(f64, IpmResult)>) -> IpmResult {
    match best {
        Some((_, mut res)) => {
            res.outcome = IpmOutcome::NumericalFailure;
            res
        }
        None => IpmResult {
            outcome: IpmOutcome::NumericalFailure,
            objective: f64::NAN,
            blocks: Vec::new(),
            duals: Vec::new(),
            iterations: 0,
            duality_gap: f64::NAN,
            max_residual: f64::NAN,
        },
    }
}
