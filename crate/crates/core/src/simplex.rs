//! Dense primal simplex for zero-sum matrix games.
//!
//! The row player maximizes, the column player minimizes. With every entry
//! shifted positive, the game value is the reciprocal of the optimum of
//!
//! ```text
//! maximize sum(w)  subject to  M w <= 1,  w >= 0
//! ```
//!
//! whose optimal `w` normalizes to the column player's strategy and whose
//! dual solution (read off the slack columns) normalizes to the row
//! player's. Bland's rule keeps the pivoting finite on degenerate games;
//! everything is deterministic.

use crate::error::{Error, Result};

const PIVOT_EPSILON: f64 = 1e-12;
const DUALITY_GAP_LIMIT: f64 = 1e-9;

/// Value and optimal mixed strategies `(value, row_strategy, col_strategy)`
/// of the zero-sum game with payoff matrix `matrix` (to the row maximizer).
pub(crate) fn solve_matrix_game(matrix: &[Vec<f64>]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let rows = matrix.len();
    if rows == 0 || matrix[0].is_empty() {
        return Err(Error::BadMatrix);
    }
    let cols = matrix[0].len();
    let mut lowest = f64::INFINITY;
    for row in matrix {
        if row.len() != cols {
            return Err(Error::BadMatrix);
        }
        for &entry in row {
            if !entry.is_finite() {
                return Err(Error::BadMatrix);
            }
            lowest = lowest.min(entry);
        }
    }
    // Shift all entries to at least 1 so the game value is strictly positive
    // and the reciprocal transformation below is sound.
    let shift = 1.0 - lowest;
    let (objective, w, duals) = maximize_under_unit_bounds(matrix, shift, rows, cols)?;
    // objective = sum(w) = 1 / shifted value.
    let dual_total: f64 = duals.iter().sum();
    let gap = (dual_total - objective).abs();
    if gap > DUALITY_GAP_LIMIT * objective.max(1.0) {
        return Err(Error::SolveFailed { residual: gap });
    }
    let value = 1.0 / objective - shift;
    let col_strategy = normalize(&w);
    let row_strategy = normalize(&duals);
    Ok((value, row_strategy, col_strategy))
}

fn normalize(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    values.iter().map(|&value| (value / total).max(0.0)).collect()
}

/// Solves `max sum(w) s.t. (M + shift) w <= 1, w >= 0` by tableau simplex.
/// Returns the optimum, the optimal `w`, and the dual values of the `rows`
/// constraints.
fn maximize_under_unit_bounds(
    matrix: &[Vec<f64>],
    shift: f64,
    rows: usize,
    cols: usize,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let width = cols + rows + 1; // structural + slack + rhs
    let mut tableau = vec![vec![0.0; width]; rows + 1];
    for (i, row) in matrix.iter().enumerate() {
        for (j, &entry) in row.iter().enumerate() {
            tableau[i][j] = entry + shift;
        }
        tableau[i][cols + i] = 1.0;
        tableau[i][width - 1] = 1.0;
    }
    // Objective row holds z_j - c_j; optimal once all entries nonnegative.
    for j in 0..cols {
        tableau[rows][j] = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    let iteration_cap = 200 * (rows + cols) + 10_000;
    for _ in 0..iteration_cap {
        // Bland: entering = lowest-index column with negative reduced cost.
        let Some(entering) = (0..cols + rows)
            .find(|&j| tableau[rows][j] < -PIVOT_EPSILON)
        else {
            let mut w = vec![0.0; cols];
            let mut duals = vec![0.0; rows];
            for (i, &variable) in basis.iter().enumerate() {
                if variable < cols {
                    w[variable] = tableau[i][width - 1];
                }
            }
            // Dual values appear in the objective row under the slacks.
            for i in 0..rows {
                duals[i] = tableau[rows][cols + i].max(0.0);
            }
            let objective = tableau[rows][width - 1];
            return Ok((objective, w, duals));
        };
        // Ratio test; ties broken by the smallest basis variable (Bland).
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..rows {
            let coefficient = tableau[i][entering];
            if coefficient > PIVOT_EPSILON {
                let ratio = tableau[i][width - 1] / coefficient;
                let better = match leaving {
                    None => true,
                    Some((current, best)) => {
                        ratio < best - PIVOT_EPSILON
                            || (ratio < best + PIVOT_EPSILON && basis[i] < basis[current])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        // With all matrix entries >= 1 every structural column has positive
        // coefficients, so the program is bounded and a pivot row exists.
        let Some((pivot_row, _)) = leaving else {
            return Err(Error::LpStalled);
        };
        pivot(&mut tableau, pivot_row, entering);
        basis[pivot_row] = entering;
    }
    Err(Error::LpStalled)
}

fn pivot(tableau: &mut [Vec<f64>], pivot_row: usize, pivot_col: usize) {
    let scale = tableau[pivot_row][pivot_col];
    for entry in tableau[pivot_row].iter_mut() {
        *entry /= scale;
    }
    let reference = tableau[pivot_row].clone();
    for (i, row) in tableau.iter_mut().enumerate() {
        if i == pivot_row {
            continue;
        }
        let factor = row[pivot_col];
        if factor != 0.0 {
            for (entry, &base) in row.iter_mut().zip(&reference) {
                *entry -= factor * base;
            }
        }
    }
}
