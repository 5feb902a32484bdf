//! Estimate-to-truth association under the normalized distance
//! `(d_theta / 1 deg)^2 + (d_range / 50 m)^2`: exact min-cost assignment up
//! to 100 targets, greedy beyond.

use nalgebra::DMatrix;

const THETA_SCALE: f64 = 1.0;
const RANGE_SCALE: f64 = 50.0;
const EXACT_LIMIT: usize = 100;

/// One matched pair and its (estimate minus truth) errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub estimate_idx: usize,
    pub truth_idx: usize,
    pub err_theta_deg: f64,
    pub err_range_m: f64,
}

fn pair_cost(est: (f64, f64), truth: (f64, f64)) -> f64 {
    let dt = (est.0 - truth.0) / THETA_SCALE;
    let dr = (est.1 - truth.1) / RANGE_SCALE;
    dt * dt + dr * dr
}

/// Exact minimum-cost assignment of rows to columns (`n <= m`), returning
/// the assigned column per row. Standard potentials-based shortest
/// augmenting path scheme, O(n^2 m).
pub fn min_cost_assignment(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    let m = cost.ncols();
    assert!(n <= m, "assignment needs rows <= cols");
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

fn greedy_assignment(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    let m = cost.ncols();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            pairs.push((cost[(i, j)], i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_to_col = vec![usize::MAX; n];
    let mut col_used = vec![false; m];
    let mut assigned = 0;
    for (_, i, j) in pairs {
        if row_to_col[i] == usize::MAX && !col_used[j] {
            row_to_col[i] = j;
            col_used[j] = true;
            assigned += 1;
            if assigned == n.min(m) {
                break;
            }
        }
    }
    row_to_col
}

/// Matches estimates to ground-truth positions. With equal counts the result
/// is a minimum-cost bijection; otherwise the shorter side is matched and
/// the remainder left unpaired.
pub fn match_estimates(estimates: &[(f64, f64)], truths: &[(f64, f64)]) -> Vec<Assignment> {
    if estimates.is_empty() || truths.is_empty() {
        return Vec::new();
    }
    // orient so rows are the smaller side
    let transposed = estimates.len() > truths.len();
    let (rows, cols): (&[(f64, f64)], &[(f64, f64)]) =
        if transposed { (truths, estimates) } else { (estimates, truths) };
    let cost = DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        if transposed {
            pair_cost(cols[j], rows[i])
        } else {
            pair_cost(rows[i], cols[j])
        }
    });
    let row_to_col = if rows.len() <= EXACT_LIMIT && cols.len() <= EXACT_LIMIT {
        min_cost_assignment(&cost)
    } else {
        greedy_assignment(&cost)
    };
    row_to_col
        .into_iter()
        .enumerate()
        .filter(|&(_, j)| j != usize::MAX)
        .map(|(i, j)| {
            let (est_idx, truth_idx) = if transposed { (j, i) } else { (i, j) };
            Assignment {
                estimate_idx: est_idx,
                truth_idx,
                err_theta_deg: estimates[est_idx].0 - truths[truth_idx].0,
                err_range_m: estimates[est_idx].1 - truths[truth_idx].1,
            }
        })
        .collect()
}
