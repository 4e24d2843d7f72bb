//! Minimum-cost linear assignment (Hungarian algorithm, O(n^3)).
//!
//! Potential-based shortest augmenting path formulation; handles arbitrary
//! finite real costs.

use crate::error::{Error, Result};
use crate::nn::Mat;

/// Optimal row -> column assignment minimizing total cost.
pub fn solve_lsap(cost: &Mat) -> Result<Vec<usize>> {
    let n = cost.nrows();
    if n != cost.ncols() {
        return Err(Error::Dim(format!(
            "assignment needs a square matrix, got {}x{}",
            n,
            cost.ncols()
        )));
    }
    if cost.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("assignment cost matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    // 1-indexed arrays with column 0 as the virtual start.
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut assigned_row = vec![0_usize; n + 1]; // assigned_row[j]: row matched to col j
    let mut way = vec![0_usize; n + 1];

    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0_usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
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
            for j in 0..=n {
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

    let mut row_to_col = vec![0_usize; n];
    for j in 1..=n {
        row_to_col[assigned_row[j] - 1] = j - 1;
    }
    Ok(row_to_col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    fn brute_force_min(cost: &Mat) -> f64 {
        let n = cost.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let total: f64 = (0..n).map(|i| cost[(i, p[i])]).sum();
            if total < best {
                best = total;
            }
        });
        best
    }

    fn permute(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            f(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(perm, k + 1, f);
            perm.swap(k, i);
        }
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        let mut rng = crate::seed::rng(99, "lsap-test");
        for trial in 0..200 {
            let n = 1 + trial % 6;
            let cost = Mat::from_shape_fn((n, n), |_| rng.gen_range(-5.0..5.0));
            let asn = solve_lsap(&cost).unwrap();
            let total: f64 = (0..n).map(|i| cost[(i, asn[i])]).sum();
            let best = brute_force_min(&cost);
            assert!((total - best).abs() < 1e-12, "n={n} {total} vs {best}");
        }
    }

    #[test]
    fn assignment_is_a_permutation() {
        let cost = array![[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [3.0, 6.0, 9.0]];
        let mut asn = solve_lsap(&cost).unwrap();
        asn.sort_unstable();
        assert_eq!(asn, vec![0, 1, 2]);
    }

    #[test]
    fn non_square_is_a_dim_error() {
        let cost = Mat::zeros((2, 3));
        assert!(matches!(solve_lsap(&cost), Err(Error::Dim(_))));
    }
}
