//! Euclidean projection onto the probability simplex.

use nalgebra::DMatrix;

/// Projects `values` in place onto `{x >= 0, sum x = 1}` and returns the shift
/// `gamma` such that `x_i = max(v_i + gamma, 0)`.
pub fn project_in_place(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "cannot project an empty vector");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    for x in values.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    -theta
}

pub fn project(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    project_in_place(&mut out);
    out
}

/// Row-wise projection of a matrix onto the simplex.
pub fn project_rows(mat: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = mat.shape();
    let mut out = DMatrix::zeros(n, m);
    let mut row = vec![0.0; m];
    for i in 0..n {
        for j in 0..m {
            row[j] = mat[(i, j)];
        }
        project_in_place(&mut row);
        for j in 0..m {
            out[(i, j)] = row[j];
        }
    }
    out
}
