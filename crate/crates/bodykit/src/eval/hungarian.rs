//! Minimum-cost one-to-one assignment via the Hungarian algorithm with
//! row/column potentials (O(n^3)).

/// Cost marking a forbidden pairing. Large enough that minimizing total
/// cost first maximizes the number of permitted pairs, small enough that
/// adding real costs (bounded by image-scale pixel errors) never loses
/// their low-order digits to rounding.
pub const FORBIDDEN: f64 = 1e9;

/// Solves the rectangular assignment problem on a row-major `rows x cols`
/// matrix, minimizing total cost. Returns the assigned column per row;
/// a row is `None` when its match would have used a forbidden (or padding)
/// cell. Deterministic for a given matrix.
pub fn assign(cost: &[f64], rows: usize, cols: usize) -> Vec<Option<usize>> {
    assert_eq!(cost.len(), rows * cols, "cost matrix shape mismatch");
    if rows == 0 {
        return Vec::new();
    }
    let n = rows.max(cols); // square with forbidden padding
    let at = |r: usize, c: usize| -> f64 {
        if r < rows && c < cols {
            cost[r * cols + c]
        } else {
            FORBIDDEN
        }
    };

    // 1-indexed potentials; column 0 is the virtual start column.
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut p = vec![0_usize; n + 1]; // p[j]: row (1-indexed) matched to column j
    let mut way = vec![0_usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0_usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 1..=n {
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
            for j in 0..=n {
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
        // Augment along the alternating path.
        while j0 != 0 {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        }
    }

    let mut out = vec![None; rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols && at(i - 1, j - 1) < FORBIDDEN {
            out[i - 1] = Some(j - 1);
        }
    }
    out
}

/// Total cost of an assignment over permitted pairs.
pub fn assignment_cost(cost: &[f64], cols: usize, assignment: &[Option<usize>]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost[r * cols + c]))
        .sum()
}
