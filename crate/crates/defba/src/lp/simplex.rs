//! Built-in dense bounded-variable primal simplex.
//!
//! Two-phase scheme with a composite phase 1 (piecewise-linear infeasibility
//! cost on out-of-bounds basic variables), an explicit basis inverse with
//! periodic refactorization, and Bland's rule after a run of degenerate
//! pivots. Presolve is limited to empty rows/columns and variables fixed by
//! their bounds.

use super::{LinearProgram, LpSolution, LpStatus, Rel, SolveOptions};

const PIVOT_TOL: f64 = 1e-10;
const REFRESH_EVERY: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
enum NonbasicAt {
    Lower,
    Upper,
    Free,
}

struct Presolved {
    /// Kept structural variables (original indices).
    keep_vars: Vec<usize>,
    /// Kept rows (original indices).
    keep_rows: Vec<usize>,
    /// Fixed value per original variable, when presolved away.
    fixed: Vec<Option<f64>>,
    /// Objective constant contributed by fixed/empty columns.
    obj_offset: f64,
    outcome: Option<LpSolution>,
}

/// Fix variables with equal bounds and drop empty rows/columns; detects the
/// trivial infeasible and unbounded cases on the way.
fn presolve(lp: &LinearProgram, opts: &SolveOptions) -> Presolved {
    let n = lp.n_vars;
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    let mut obj_offset = 0.0;

    let mut cost = vec![0.0; n];
    for &(v, c) in &lp.objective {
        cost[v] += c;
    }

    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if lo == hi {
            fixed[j] = Some(lo);
            obj_offset += cost[j] * lo;
        }
    }

    let mut col_used = vec![false; n];
    let mut keep_rows = Vec::new();
    for (i, row) in lp.rows.iter().enumerate() {
        let mut rhs = row.rhs;
        let mut live = 0usize;
        for &(v, c) in &row.coeffs {
            match fixed[v] {
                Some(val) => rhs -= c * val,
                None => {
                    live += 1;
                }
            }
        }
        if live == 0 {
            let ok = match row.rel {
                Rel::Le => rhs >= -opts.feas_tol,
                Rel::Ge => rhs <= opts.feas_tol,
                Rel::Eq => rhs.abs() <= opts.feas_tol,
            };
            if !ok {
                let mut primal = vec![0.0; n];
                for (j, f) in fixed.iter().enumerate() {
                    if let Some(v) = f {
                        primal[j] = *v;
                    }
                }
                return Presolved {
                    keep_vars: Vec::new(),
                    keep_rows: Vec::new(),
                    fixed,
                    obj_offset,
                    outcome: Some(LpSolution {
                        status: LpStatus::Infeasible,
                        primal,
                        objective_value: 0.0,
                        dual_rows: None,
                        iterations: 0,
                        infeasible_row: Some(i),
                        ray: None,
                    }),
                };
            }
            continue;
        }
        keep_rows.push(i);
        for &(v, _) in &row.coeffs {
            if fixed[v].is_none() {
                col_used[v] = true;
            }
        }
    }

    let mut keep_vars = Vec::new();
    for j in 0..n {
        if fixed[j].is_some() {
            continue;
        }
        if col_used[j] {
            keep_vars.push(j);
            continue;
        }
        // Empty column: settled by the objective sign alone.
        let (lo, hi) = lp.bounds[j];
        let c = cost[j];
        let val = if c > 0.0 {
            if hi.is_infinite() {
                let mut ray = vec![0.0; n];
                ray[j] = 1.0;
                return unbounded_outcome(fixed, obj_offset, ray);
            }
            hi
        } else if c < 0.0 {
            if lo.is_infinite() {
                let mut ray = vec![0.0; n];
                ray[j] = -1.0;
                return unbounded_outcome(fixed, obj_offset, ray);
            }
            lo
        } else {
            0.0f64.clamp(lo, hi)
        };
        fixed[j] = Some(val);
        obj_offset += c * val;
    }

    Presolved { keep_vars, keep_rows, fixed, obj_offset, outcome: None }
}

fn unbounded_outcome(fixed: Vec<Option<f64>>, obj_offset: f64, ray: Vec<f64>) -> Presolved {
    let n = fixed.len();
    let mut primal = vec![0.0; n];
    for (j, f) in fixed.iter().enumerate() {
        if let Some(v) = f {
            primal[j] = *v;
        }
    }
    Presolved {
        keep_vars: Vec::new(),
        keep_rows: Vec::new(),
        fixed,
        obj_offset,
        outcome: Some(LpSolution {
            status: LpStatus::Unbounded,
            primal,
            objective_value: 0.0,
            dual_rows: None,
            iterations: 0,
            infeasible_row: None,
            ray: Some(ray),
        }),
    }
}

pub(super) fn solve_dense(lp: &LinearProgram, opts: &SolveOptions) -> LpSolution {
    let pre = presolve(lp, opts);
    if let Some(outcome) = pre.outcome {
        return outcome;
    }

    let n_red = pre.keep_vars.len();
    let m = pre.keep_rows.len();
    let total = n_red + m; // structurals then slacks

    // Column-major coefficient matrix including slack columns.
    let mut a = vec![0.0; total * m];
    let mut lb = vec![f64::NEG_INFINITY; total];
    let mut ub = vec![f64::INFINITY; total];
    let mut cmin = vec![0.0; total]; // internal minimization costs
    let mut rhs = vec![0.0; m];

    let mut var_pos = vec![usize::MAX; lp.n_vars];
    for (k, &j) in pre.keep_vars.iter().enumerate() {
        var_pos[j] = k;
        lb[k] = lp.bounds[j].0;
        ub[k] = lp.bounds[j].1;
    }
    for &(v, c) in &lp.objective {
        if var_pos[v] != usize::MAX {
            cmin[var_pos[v]] -= c;
        }
    }
    for (ri, &orig) in pre.keep_rows.iter().enumerate() {
        let row = &lp.rows[orig];
        let mut b = row.rhs;
        for &(v, c) in &row.coeffs {
            match pre.fixed[v] {
                Some(val) => b -= c * val,
                None => a[var_pos[v] * m + ri] += c,
            }
        }
        rhs[ri] = b;
        let s = n_red + ri;
        a[s * m + ri] = 1.0;
        match row.rel {
            Rel::Le => {
                lb[s] = 0.0;
            }
            Rel::Ge => {
                ub[s] = 0.0;
            }
            Rel::Eq => {
                lb[s] = 0.0;
                ub[s] = 0.0;
            }
        }
    }

    // Start basis: the slacks.
    let mut basis: Vec<usize> = (n_red..total).collect();
    let mut in_basis = vec![false; total];
    let mut nb_state = vec![NonbasicAt::Free; total];
    let mut x = vec![0.0; total];
    for j in 0..total {
        if j >= n_red {
            in_basis[j] = true;
            continue;
        }
        let (state, val) = if lb[j].is_finite() {
            (NonbasicAt::Lower, lb[j])
        } else if ub[j].is_finite() {
            (NonbasicAt::Upper, ub[j])
        } else {
            (NonbasicAt::Free, 0.0)
        };
        nb_state[j] = state;
        x[j] = val;
    }

    let mut b_inv = identity(m);
    recompute_basics(&a, &rhs, &basis, &b_inv, &x.clone(), n_red, &mut x, m);

    let mut iterations = 0usize;
    let mut degenerate_run = 0usize;
    let bland_after = 2 * lp.n_vars.max(8);
    let mut since_refresh = 0usize;

    loop {
        if iterations >= opts.max_iters {
            return finish(
                lp, &pre, &x, &basis, &b_inv, &cmin, &a, m, n_red, iterations,
                LpStatus::IterationLimit, None, None,
            );
        }

        // Phase is decided by the current infeasibility of the basic vars.
        let mut infeas = 0.0;
        for &bj in &basis {
            infeas += (lb[bj] - x[bj]).max(0.0) + (x[bj] - ub[bj]).max(0.0);
        }
        let phase1 = infeas > opts.feas_tol;

        // Basic costs for this phase.
        let mut cb = vec![0.0; m];
        for (i, &bj) in basis.iter().enumerate() {
            cb[i] = if phase1 {
                if x[bj] < lb[bj] - opts.feas_tol {
                    -1.0
                } else if x[bj] > ub[bj] + opts.feas_tol {
                    1.0
                } else {
                    0.0
                }
            } else {
                cmin[bj]
            };
        }
        // y' = cb' B^-1
        let mut y = vec![0.0; m];
        for i in 0..m {
            if cb[i] != 0.0 {
                let c = cb[i];
                let row = &b_inv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += c * row[k];
                }
            }
        }

        // Pricing.
        let use_bland = degenerate_run > bland_after;
        let mut enter: Option<(usize, f64, f64)> = None; // (var, direction, score)
        for j in 0..total {
            if in_basis[j] {
                continue;
            }
            let col = &a[j * m..(j + 1) * m];
            let mut yaj = 0.0;
            for i in 0..m {
                if col[i] != 0.0 {
                    yaj += y[i] * col[i];
                }
            }
            let cj = if phase1 { 0.0 } else { cmin[j] };
            let d = cj - yaj;
            let (improving, dir) = match nb_state[j] {
                NonbasicAt::Lower => (d < -opts.opt_tol, 1.0),
                NonbasicAt::Upper => (d > opts.opt_tol, -1.0),
                NonbasicAt::Free => (d.abs() > opts.opt_tol, if d < 0.0 { 1.0 } else { -1.0 }),
            };
            if !improving {
                continue;
            }
            if use_bland {
                enter = Some((j, dir, d.abs()));
                break;
            }
            match enter {
                Some((_, _, best)) if best >= d.abs() => {}
                _ => enter = Some((j, dir, d.abs())),
            }
        }

        let Some((q, dir, _)) = enter else {
            if phase1 {
                // Optimal for the infeasibility objective but still infeasible.
                let mut worst = (0.0, None);
                for (i, &bj) in basis.iter().enumerate() {
                    let v = (lb[bj] - x[bj]).max(x[bj] - ub[bj]);
                    if v > worst.0 {
                        worst = (v, Some(i));
                    }
                }
                let infeasible_row = worst
                    .1
                    .and_then(|i| {
                        let bj = basis[i];
                        if bj >= n_red {
                            Some(pre.keep_rows[bj - n_red])
                        } else {
                            // A structural variable stuck outside its bounds;
                            // report the row it is basic in.
                            Some(pre.keep_rows[i])
                        }
                    });
                return finish(
                    lp, &pre, &x, &basis, &b_inv, &cmin, &a, m, n_red, iterations,
                    LpStatus::Infeasible, infeasible_row, None,
                );
            }
            return finish(
                lp, &pre, &x, &basis, &b_inv, &cmin, &a, m, n_red, iterations,
                LpStatus::Optimal, None, None,
            );
        };

        // Direction through the basis: w = B^-1 a_q.
        let colq = &a[q * m..(q + 1) * m];
        let mut w = vec![0.0; m];
        for i in 0..m {
            let mut acc = 0.0;
            let row = &b_inv[i * m..(i + 1) * m];
            for k in 0..m {
                if colq[k] != 0.0 {
                    acc += row[k] * colq[k];
                }
            }
            w[i] = acc;
        }

        // Ratio test: smallest breakpoint over basic variables plus the
        // entering variable's own opposite bound.
        let mut t_max = f64::INFINITY;
        let mut leave: Option<(usize, bool)> = None; // (basis slot, hits_upper)
        for i in 0..m {
            let wi = dir * w[i];
            if wi.abs() <= PIVOT_TOL {
                continue;
            }
            let bj = basis[i];
            let (t, hits_upper) = if wi > 0.0 {
                // Basic value decreases.
                if phase1 && x[bj] > ub[bj] + opts.feas_tol {
                    ((x[bj] - ub[bj]) / wi, true)
                } else if lb[bj].is_finite() {
                    ((x[bj] - lb[bj]) / wi, false)
                } else {
                    continue;
                }
            } else {
                // Basic value increases.
                let wi = -wi;
                if phase1 && x[bj] < lb[bj] - opts.feas_tol {
                    ((lb[bj] - x[bj]) / wi, false)
                } else if ub[bj].is_finite() {
                    ((ub[bj] - x[bj]) / wi, true)
                } else {
                    continue;
                }
            };
            let t = t.max(0.0);
            if t < t_max - PIVOT_TOL || (t < t_max + PIVOT_TOL && leave.map_or(true, |(s, _)| basis[i.min(m - 1)] < basis[s])) {
                if t < t_max + PIVOT_TOL {
                    t_max = t.min(t_max);
                    leave = Some((i, hits_upper));
                }
            }
        }
        let flip_range = ub[q] - lb[q];
        let entering_flips = flip_range.is_finite() && flip_range < t_max;
        if entering_flips {
            t_max = flip_range;
        }

        if t_max.is_infinite() {
            // No blocking breakpoint: unbounded (cannot occur in phase 1).
            let mut ray = vec![0.0; lp.n_vars];
            for (k, &j) in pre.keep_vars.iter().enumerate() {
                if k == q {
                    ray[j] = dir;
                }
            }
            for i in 0..m {
                let bj = basis[i];
                if bj < n_red {
                    ray[pre.keep_vars[bj]] = -dir * w[i];
                }
            }
            if q < n_red {
                ray[pre.keep_vars[q]] = dir;
            }
            return finish(
                lp, &pre, &x, &basis, &b_inv, &cmin, &a, m, n_red, iterations,
                LpStatus::Unbounded, None, Some(ray),
            );
        }

        // Move.
        x[q] += dir * t_max;
        for i in 0..m {
            x[basis[i]] -= dir * t_max * w[i];
        }

        if entering_flips {
            nb_state[q] = match nb_state[q] {
                NonbasicAt::Lower => {
                    x[q] = ub[q];
                    NonbasicAt::Upper
                }
                NonbasicAt::Upper => {
                    x[q] = lb[q];
                    NonbasicAt::Lower
                }
                NonbasicAt::Free => NonbasicAt::Free,
            };
        } else {
            let (r, hits_upper) = leave.expect("finite step has a leaving variable");
            if w[r].abs() <= PIVOT_TOL {
                // Numerically unusable pivot; treat as an iteration cap issue.
                return finish(
                    lp, &pre, &x, &basis, &b_inv, &cmin, &a, m, n_red, iterations,
                    LpStatus::IterationLimit, None, None,
                );
            }
            let old = basis[r];
            x[old] = if hits_upper { ub[old] } else { lb[old] };
            nb_state[old] = if hits_upper { NonbasicAt::Upper } else { NonbasicAt::Lower };
            in_basis[old] = false;
            basis[r] = q;
            in_basis[q] = true;

            // B^-1 update with pivot row r.
            let wr = w[r];
            let pivot_row: Vec<f64> = b_inv[r * m..(r + 1) * m].iter().map(|v| v / wr).collect();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let factor = w[i];
                if factor != 0.0 {
                    for k in 0..m {
                        b_inv[i * m + k] -= factor * pivot_row[k];
                    }
                }
            }
            b_inv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
        }

        iterations += 1;
        since_refresh += 1;
        if t_max <= 1e-12 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }

        if since_refresh >= REFRESH_EVERY {
            since_refresh = 0;
            refactorize(&a, &basis, m, &mut b_inv);
            let snapshot = x.clone();
            recompute_basics(&a, &rhs, &basis, &b_inv, &snapshot, n_red, &mut x, m);
        }
    }
}

fn identity(m: usize) -> Vec<f64> {
    let mut b = vec![0.0; m * m];
    for i in 0..m {
        b[i * m + i] = 1.0;
    }
    b
}

/// x_B = B^-1 (rhs - sum over nonbasic columns of a_j x_j)
fn recompute_basics(
    a: &[f64],
    rhs: &[f64],
    basis: &[usize],
    b_inv: &[f64],
    x_ref: &[f64],
    _n_red: usize,
    x: &mut [f64],
    m: usize,
) {
    let total = x.len();
    let mut in_b = vec![false; total];
    for &bj in basis {
        in_b[bj] = true;
    }
    let mut r = rhs.to_vec();
    for j in 0..total {
        if in_b[j] || x_ref[j] == 0.0 {
            continue;
        }
        let col = &a[j * m..(j + 1) * m];
        for i in 0..m {
            r[i] -= col[i] * x_ref[j];
        }
    }
    for (i, &bj) in basis.iter().enumerate() {
        let mut acc = 0.0;
        let row = &b_inv[i * m..(i + 1) * m];
        for k in 0..m {
            acc += row[k] * r[k];
        }
        x[bj] = acc;
    }
}

/// Rebuild B^-1 from the basis columns by Gauss-Jordan elimination with
/// partial pivoting.
fn refactorize(a: &[f64], basis: &[usize], m: usize, b_inv: &mut Vec<f64>) {
    let mut mat = vec![0.0; m * m]; // row-major basis matrix
    for (col, &bj) in basis.iter().enumerate() {
        let src = &a[bj * m..(bj + 1) * m];
        for i in 0..m {
            mat[i * m + col] = src[i];
        }
    }
    let mut inv = identity(m);
    for col in 0..m {
        let mut piv = col;
        let mut best = mat[col * m + col].abs();
        for r in col + 1..m {
            let v = mat[r * m + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= 1e-14 {
            // Singular basis should not happen; keep the previous inverse.
            return;
        }
        if piv != col {
            for k in 0..m {
                mat.swap(col * m + k, piv * m + k);
                inv.swap(col * m + k, piv * m + k);
            }
        }
        let d = mat[col * m + col];
        for k in 0..m {
            mat[col * m + k] /= d;
            inv[col * m + k] /= d;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = mat[r * m + col];
            if f != 0.0 {
                for k in 0..m {
                    mat[r * m + k] -= f * mat[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
    }
    *b_inv = inv;
}

#[allow(clippy::too_many_arguments)]
fn finish(
    lp: &LinearProgram,
    pre: &Presolved,
    x: &[f64],
    basis: &[usize],
    b_inv: &[f64],
    cmin: &[f64],
    _a: &[f64],
    m: usize,
    n_red: usize,
    iterations: usize,
    status: LpStatus,
    infeasible_row: Option<usize>,
    ray: Option<Vec<f64>>,
) -> LpSolution {
    let mut primal = vec![0.0; lp.n_vars];
    for (j, f) in pre.fixed.iter().enumerate() {
        if let Some(v) = f {
            primal[j] = *v;
        }
    }
    for (k, &j) in pre.keep_vars.iter().enumerate() {
        primal[j] = x[k];
    }

    // Row duals in the maximization sense: y = -(cB' B^-1), mapped back to the
    // original row indices (dropped rows get dual 0).
    let mut dual_rows = None;
    if status == LpStatus::Optimal {
        let mut y = vec![0.0; m];
        for (i, &bj) in basis.iter().enumerate() {
            let c = cmin[bj];
            if c != 0.0 {
                let row = &b_inv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += c * row[k];
                }
            }
        }
        let mut full = vec![0.0; lp.rows.len()];
        for (ri, &orig) in pre.keep_rows.iter().enumerate() {
            full[orig] = -y[ri];
        }
        dual_rows = Some(full);
    }
    let _ = n_red;

    let objective_value = lp.objective_value(&primal);
    LpSolution {
        status,
        primal,
        objective_value,
        dual_rows,
        iterations,
        infeasible_row,
        ray,
    }
}
