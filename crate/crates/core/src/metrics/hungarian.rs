use ndarray::Array2;

/// Maximum-weight perfect assignment on a square matrix (Hungarian method, O(n^3)).
///
/// Returns `assignment[row] = col`.
pub fn max_weight_assignment(weights: &Array2<f64>) -> Vec<usize> {
    let n = weights.nrows();
    assert_eq!(n, weights.ncols(), "assignment matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    let top = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // minimize cost = top - w, 1-based with a virtual row/column 0
    let cost = |i: usize, j: usize| top - weights[[i - 1, j - 1]];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
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

    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}
