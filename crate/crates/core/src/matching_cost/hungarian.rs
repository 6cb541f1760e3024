//! Minimum-cost one-to-one assignment on a dense cost matrix.
//!
//! The solver is the classic shortest-augmenting-path formulation with dual
//! potentials, written against the orientation rows <= cols and applied to
//! the transpose otherwise. Runtime is cubic in the matrix size, which is
//! far below anything this workspace produces (instance counts are single
//! digits), so no scaling tricks are needed.

use ndarray::Array2;

use crate::error::{Error, Result};

use super::{Assignment, CostMatrix};

/// For each column (1-based) the assigned row (1-based, 0 = none), given
/// `rows <= cols`.
fn solve_rows_le_cols(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    let m = cost.ncols();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut assigned_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    assigned_row
}

/// Optimal assignment of rows to columns. When the matrix is wider than
/// tall every row gets a column; otherwise the cheapest subset of rows is
/// matched and the rest are left out.
pub fn hungarian_assign(matrix: &CostMatrix) -> Result<Assignment> {
    let costs = matrix.costs();
    let (rows, cols) = (costs.nrows(), costs.ncols());
    if rows == 0 || cols == 0 {
        return Err(Error::dim("cost matrix must be non-empty".to_string()));
    }
    let mut pairs: Vec<Option<usize>> = vec![None; rows];
    if rows <= cols {
        let assigned_row = solve_rows_le_cols(costs);
        for (j, &i) in assigned_row.iter().enumerate().skip(1) {
            if i > 0 {
                pairs[i - 1] = Some(j - 1);
            }
        }
    } else {
        let transposed = costs.t().to_owned();
        let assigned_col = solve_rows_le_cols(&transposed);
        for (j, &i) in assigned_col.iter().enumerate().skip(1) {
            if i > 0 {
                pairs[j - 1] = Some(i - 1);
            }
        }
    }
    let total_cost = pairs
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| costs[[r, c]]))
        .sum();
    Ok(Assignment { pairs, total_cost })
}
