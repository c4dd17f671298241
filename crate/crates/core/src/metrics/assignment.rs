//! Maximum-weight one-to-one assignment (Kuhn-Munkres with potentials).

/// A one-to-one partial matching between row and column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, column)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total_score: f64,
}

/// Finds a maximum-total-score matching of a rectangular matrix.
///
/// Every row is matched when there are at least as many columns as rows, and
/// vice versa. Among optimal matchings the result is the lexicographically
/// smallest list of `(row, column)` pairs, with an unmatched row ordering
/// after any matched column. Rows must all have the same length and entries
/// must be finite.
pub fn solve_assignment(matrix: &[Vec<f64>]) -> Assignment {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Assignment {
            pairs: Vec::new(),
            total_score: 0.0,
        };
    }
    assert!(
        matrix.iter().all(|r| r.len() == cols),
        "ragged score matrix"
    );
    assert!(
        matrix.iter().flatten().all(|x| x.is_finite()),
        "non-finite entry in score matrix"
    );

    let n = rows.max(cols);
    let weight = |i: usize, j: usize| {
        if i < rows && j < cols {
            matrix[i][j]
        } else {
            0.0
        }
    };
    let (mut row_to_col, potentials) = hungarian_max(n, &weight);

    let scale = matrix
        .iter()
        .flatten()
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    let eps = 1e-9 * scale;
    let tight =
        |i: usize, j: usize| (potentials.0[i] + potentials.1[j] - weight(i, j)).abs() <= eps;
    lexicographic_refine(n, rows, cols, &tight, &mut row_to_col);

    let pairs: Vec<(usize, usize)> = (0..rows)
        .filter(|&i| row_to_col[i] < cols)
        .map(|i| (i, row_to_col[i]))
        .collect();
    let total_score = pairs.iter().map(|&(i, j)| matrix[i][j]).sum();
    Assignment { pairs, total_score }
}

/// Square maximisation via the O(n^3) shortest-augmenting-path Hungarian
/// method on negated weights. Returns the row → column matching and dual
/// potentials `(row, col)` with `row[i] + col[j] >= w(i, j)`, tight on every
/// edge of any optimal perfect matching.
fn hungarian_max(
    n: usize,
    weight: &dyn Fn(usize, usize) -> f64,
) -> (Vec<usize>, (Vec<f64>, Vec<f64>)) {
    // 1-based with a virtual column 0, minimising cost = -w.
    let cost = |i: usize, j: usize| -weight(i - 1, j - 1);
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
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
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
    }
    // cost - u - v >= 0  <=>  (-u) + (-v) >= w
    let row_pot = u[1..].iter().map(|x| -x).collect();
    let col_pot = v[1..].iter().map(|x| -x).collect();
    (row_to_col, (row_pot, col_pot))
}

/// Walks real rows in order and moves each onto the smallest real column
/// that still admits a perfect matching of tight edges with all earlier rows
/// fixed. Any perfect matching on tight edges is optimal, so the total is
/// unchanged.
fn lexicographic_refine(
    n: usize,
    rows: usize,
    cols: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    row_to_col: &mut [usize],
) {
    let mut col_to_row = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_to_row[j] = i;
    }
    for i in 0..rows {
        for j in 0..cols {
            if row_to_col[i] == j {
                break;
            }
            if col_to_row[j] < i || !tight(i, j) {
                continue;
            }
            if let Some(path) = alternating_path(n, i, j, tight, row_to_col, &col_to_row) {
                // path: rows r_0 = owner of j, r_1, ... each reassigned to the column in `path`
                let freed = row_to_col[i];
                row_to_col[i] = j;
                col_to_row[j] = i;
                for &(r, c) in &path {
                    row_to_col[r] = c;
                    col_to_row[c] = r;
                }
                debug_assert!(path.last().map(|&(_, c)| c) == Some(freed));
                break;
            }
        }
    }
}

/// Searches for a way to give column `take` to row `fixed`: the current
/// owner of `take` must move along tight edges, displacing owners in turn,
/// until someone lands on the column `fixed` currently holds. Only rows after
/// `fixed` may move. Returns the `(row, new column)` reassignments.
fn alternating_path(
    n: usize,
    fixed: usize,
    take: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    row_to_col: &[usize],
    col_to_row: &[usize],
) -> Option<Vec<(usize, usize)>> {
    let target = row_to_col[fixed];
    let start = col_to_row[take];
    // parent[col] = row that would move into col
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen_row = vec![false; n];
    let mut queue = std::collections::VecDeque::from([start]);
    seen_row[start] = true;
    while let Some(r) = queue.pop_front() {
        for c in 0..n {
            if c == take || parent[c].is_some() || !tight(r, c) {
                continue;
            }
            if c == target {
                parent[c] = Some(r);
                let mut path = Vec::new();
                let mut col = c;
                loop {
                    let row = parent[col].expect("path parent");
                    path.push((row, col));
                    if row == start {
                        break;
                    }
                    col = row_to_col[row];
                }
                path.reverse();
                return Some(path);
            }
            let owner = col_to_row[c];
            if owner <= fixed || seen_row[owner] {
                continue;
            }
            parent[c] = Some(r);
            seen_row[owner] = true;
            queue.push_back(owner);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matrix() {
        let m = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let a = solve_assignment(&m);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(a.total_score, 3.0);
    }

    #[test]
    fn two_by_two() {
        let a = solve_assignment(&[vec![0.8, 0.1], vec![0.2, 1.0]]);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
        assert!((a.total_score - 1.8).abs() < 1e-12);
    }

    #[test]
    fn rectangular_wide() {
        let a = solve_assignment(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert_eq!(a.pairs, vec![(0, 0), (1, 2)]);
        assert_eq!(a.total_score, 2.0);
    }

    #[test]
    fn rectangular_tall_leaves_rows_unmatched() {
        let a = solve_assignment(&[vec![0.0], vec![5.0], vec![1.0]]);
        assert_eq!(a.pairs, vec![(1, 0)]);
        assert_eq!(a.total_score, 5.0);
    }

    #[test]
    fn ties_prefer_smallest_pairs() {
        let a = solve_assignment(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
        let a = solve_assignment(&[vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
        // one column, equal rows: the first row takes it
        let a = solve_assignment(&[vec![2.0], vec![2.0]]);
        assert_eq!(a.pairs, vec![(0, 0)]);
    }

    #[test]
    fn empty_matrix() {
        let a = solve_assignment(&[]);
        assert!(a.pairs.is_empty());
        assert_eq!(a.total_score, 0.0);
    }
}
