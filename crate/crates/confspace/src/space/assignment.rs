//! Assignment solvers for the matching metric: min-cost (sum mode) and
//! bottleneck (max mode).

/// Jonker-Volgenant style Hungarian algorithm on a square cost matrix.
/// Returns the minimum total cost and the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    debug_assert!(
        cost.iter().all(|row| row.len() == n),
        "cost matrix must be square"
    );

    // potentials and matching, 1-based with a virtual column n
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![n; n + 1]; // matched_row[col] = row, n = free

    for row in 0..n {
        let mut col = n;
        matched_row[n] = row;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut prev = vec![n; n + 1];
        let mut used = vec![false; n + 1];

        loop {
            used[col] = true;
            let r = matched_row[col];
            let mut delta = f64::INFINITY;
            let mut next_col = n;
            for c in 0..n {
                if used[c] {
                    continue;
                }
                let reduced = cost[r][c] - u[r] - v[c];
                if reduced < min_to[c] {
                    min_to[c] = reduced;
                    prev[c] = col;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    next_col = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[matched_row[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            col = next_col;
            if matched_row[col] == n {
                break;
            }
        }

        // augment along the alternating path
        while col != n {
            let pc = prev[col];
            matched_row[col] = matched_row[pc];
            col = pc;
        }
    }

    let mut assignment = vec![0; n];
    let mut total = 0.0;
    for c in 0..n {
        let r = matched_row[c];
        if r < n {
            assignment[r] = c;
            total += cost[r][c];
        }
    }
    (total, assignment)
}

/// Kuhn's augmenting-path test for a perfect matching in the bipartite
/// graph whose edges are the pairs accepted by `edge`.
fn has_perfect_matching(n: usize, edge: &dyn Fn(usize, usize) -> bool) -> bool {
    let mut match_of = vec![usize::MAX; n]; // column -> row

    fn try_augment(
        r: usize,
        n: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        match_of: &mut [usize],
    ) -> bool {
        for c in 0..n {
            if !seen[c] && edge(r, c) {
                seen[c] = true;
                if match_of[c] == usize::MAX || try_augment(match_of[c], n, edge, seen, match_of) {
                    match_of[c] = r;
                    return true;
                }
            }
        }
        false
    }

    for r in 0..n {
        let mut seen = vec![false; n];
        if !try_augment(r, n, edge, &mut seen, &mut match_of) {
            return false;
        }
    }
    true
}

/// Bottleneck assignment: the smallest threshold t such that a perfect
/// matching exists using only edges of cost <= t. Solved by binary search
/// over the sorted distinct cost values with matching feasibility tests.
pub fn bottleneck_assignment<C: Ord + Copy>(cost: &[Vec<C>]) -> Option<C> {
    let n = cost.len();
    if n == 0 {
        return None;
    }
    let mut values: Vec<C> = cost.iter().flatten().copied().collect();
    values.sort();
    values.dedup();

    let feasible = |t: C| has_perfect_matching(n, &|r, c| cost[r][c] <= t);

    let mut lo = 0usize;
    let mut hi = values.len() - 1;
    debug_assert!(
        feasible(values[hi]),
        "full graph always has a perfect matching"
    );
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(values[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(values[lo])
}
