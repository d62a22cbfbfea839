//! Dense two-phase simplex for the small equality-constrained LPs behind the
//! L1 decompositions.
//!
//! Problems here are tiny (one equality row per feature dimension, two
//! non-negative variables per arm), but they must solve deterministically:
//! pivots follow Bland's rule (lowest eligible index enters; ties in the
//! ratio test break towards the lowest basic variable), which also rules out
//! cycling. A full tableau is carried — no factorisation — since `m·n` stays
//! in the low thousands.

const COST_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpError {
    /// No non-negative solution of `Ax = b`; carries the phase-1 objective
    /// (sum of constraint violations at the closest basic point).
    Infeasible { residual: f64 },
    Unbounded,
    /// Pivot loop exceeded its safety cap — numerically poisoned input.
    Stalled,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Minimise `cᵀx` subject to `Ax = b`, `x ≥ 0`.
///
/// `rows` holds the `m` constraint rows of length `n = costs.len()`.
pub(crate) fn solve_min(costs: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpSolution, LpError> {
    let n = costs.len();
    let m = rows.len();
    debug_assert_eq!(rhs.len(), m);
    debug_assert!(rows.iter().all(|r| r.len() == n));

    // Tableau: m constraint rows over columns [original | artificial | rhs],
    // then the phase-2 cost row and the phase-1 cost row.
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 2) * width];
    let obj = m; // phase-2 row index
    let aux = m + 1; // phase-1 row index
    for i in 0..m {
        let flip = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i * width + j] = flip * rows[i][j];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = flip * rhs[i];
    }
    for j in 0..n {
        t[obj * width + j] = costs[j];
    }
    // Phase-1 objective: sum of artificials, priced out against the
    // artificial basis (so the row becomes −Σ constraint rows on the
    // original columns, with zeros over the artificial block).
    for j in 0..width {
        let mut s = 0.0;
        for i in 0..m {
            s += t[i * width + j];
        }
        t[aux * width + j] = if (n..n + m).contains(&j) { 0.0 } else { -s };
    }

    let mut basis: Vec<usize> = (n..n + m).collect();

    pivot_until_optimal(&mut t, width, m, aux, n + m, &mut basis)?;
    let phase1 = -t[aux * width + n + m];
    if phase1 > 1e-8 {
        return Err(LpError::Infeasible { residual: phase1.max(0.0) });
    }

    // Drive any zero-level artificial out of the basis; rows that are zero
    // across the original columns are redundant constraints and stay inert.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| t[i * width + j].abs() > PIVOT_TOL) {
                pivot(&mut t, width, m + 2, i, col);
                basis[i] = col;
            }
        }
    }

    // Price the phase-2 cost row out against the current basis.
    for i in 0..m {
        let c = t[obj * width + basis[i]];
        if c != 0.0 {
            for j in 0..width {
                t[obj * width + j] -= c * t[i * width + j];
            }
        }
    }

    pivot_until_optimal(&mut t, width, m, obj, n, &mut basis)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i * width + n + m].max(0.0);
        }
    }
    let objective = costs.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}

/// Bland-rule pivoting on cost row `cost_row`, with entering columns
/// restricted to `0..col_limit`.
fn pivot_until_optimal(
    t: &mut [f64],
    width: usize,
    m: usize,
    cost_row: usize,
    col_limit: usize,
    basis: &mut [usize],
) -> Result<(), LpError> {
    let rhs_col = width - 1;
    let cap = 50_000 + 200 * width;
    for _ in 0..cap {
        let Some(enter) = (0..col_limit).find(|&j| t[cost_row * width + j] < -COST_TOL) else {
            return Ok(());
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_TOL {
                let ratio = t[i * width + rhs_col] / a;
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        ratio < best_ratio - PIVOT_TOL
                            || (ratio < best_ratio + PIVOT_TOL && basis[i] < basis[cur])
                    }
                };
                if better {
                    leave = Some(i);
                    best_ratio = ratio;
                }
            }
        }
        let Some(row) = leave else {
            return Err(LpError::Unbounded);
        };
        pivot(t, width, m + 2, row, enter);
        basis[row] = enter;
    }
    Err(LpError::Stalled)
}

fn pivot(t: &mut [f64], width: usize, total_rows: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for j in 0..width {
        t[row * width + j] /= p;
    }
    for r in 0..total_rows {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f != 0.0 {
            for j in 0..width {
                t[r * width + j] -= f * t[row * width + j];
            }
            t[r * width + col] = 0.0;
        }
    }
}
