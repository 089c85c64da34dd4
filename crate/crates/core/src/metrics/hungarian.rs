//! Minimum-cost assignment on a rectangular cost matrix.

/// Returns `(row, col)` pairs of a minimum-cost matching covering
/// `min(rows, cols)` entries. `cost` is row-major `rows × cols`.
pub fn assign(cost: &[f64], rows: usize, cols: usize) -> Vec<(usize, usize)> {
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    // the potential-based algorithm below wants n ≤ m
    let transposed = rows > cols;
    let (n, m) = if transposed { (cols, rows) } else { (rows, cols) };
    let at = |i: usize, j: usize| if transposed { cost[j * cols + i] } else { cost[i * cols + j] };

    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
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
    let mut out: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| p[j] != 0)
        .map(|j| if transposed { (j - 1, p[j] - 1) } else { (p[j] - 1, j - 1) })
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(cost: &[f64], rows: usize, cols: usize) -> f64 {
        fn rec(cost: &[f64], rows: usize, cols: usize, i: usize, used: &mut Vec<bool>, acc: f64, left: usize) -> f64 {
            if left == 0 || i == rows {
                return if left == 0 { acc } else { f64::INFINITY };
            }
            // row i may stay unmatched only if enough rows remain
            let mut best = if rows - i - 1 >= left { rec(cost, rows, cols, i + 1, used, acc, left) } else { f64::INFINITY };
            for j in 0..cols {
                if !used[j] {
                    used[j] = true;
                    best = best.min(rec(cost, rows, cols, i + 1, used, acc + cost[i * cols + j], left - 1));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, rows, cols, 0, &mut vec![false; cols], 0.0, rows.min(cols))
    }

    #[test]
    fn matches_brute_force() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / (1u64 << 31) as f64
        };
        for rows in 1..5 {
            for cols in 1..5 {
                for _ in 0..20 {
                    let cost: Vec<f64> = (0..rows * cols).map(|_| (next() * 180.0).round()).collect();
                    let pairs = assign(&cost, rows, cols);
                    assert_eq!(pairs.len(), rows.min(cols));
                    let total: f64 = pairs.iter().map(|&(i, j)| cost[i * cols + j]).sum();
                    assert!((total - brute(&cost, rows, cols)).abs() < 1e-9);
                }
            }
        }
    }
}
