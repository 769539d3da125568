//! Small dense linear-algebra helpers shared by the solver and the spectral
//! oracle.

use log::debug;
use nalgebra::{DMatrix, DVector};

/// Eigen-decomposition of a symmetric positive semidefinite matrix.
///
/// The implicit QR iteration in nalgebra can diverge to non-finite values on
/// very sparse matrices with large degenerate eigenspaces. When that happens
/// the SVD is used instead, which coincides with the eigen-decomposition for
/// PSD input.
pub(crate) fn psd_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = a.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|x| x.is_finite()) && eig.eigenvectors.iter().all(|x| x.is_finite()) {
        return (eig.eigenvalues, eig.eigenvectors);
    }
    debug!("symmetric eigensolver diverged; falling back to SVD");
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    (svd.singular_values, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_eigen_on_generic_psd() {
        let b = DMatrix::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let a = b.transpose() * &b;
        let (vals, vecs) = psd_eigen(&a);
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((recon - a).amax() < 1e-10);
    }

    /// Gram matrix of a one-sparse weighted graph on which plain
    /// `symmetric_eigen` returns infinite eigenvalues.
    const DIVERGING_GRAM: [(usize, usize, f64); 35] = [
        (5, 5, 9.14648340205382),
        (5, 6, 0.6211306065508573),
        (5, 10, 3.6547779460803955),
        (5, 58, 3.3704245702626667),
        (5, 63, 0.21951347518952738),
        (6, 6, 8.942265704567095),
        (6, 10, 0.17519515818296336),
        (6, 45, 0.17227063466762807),
        (6, 63, 8.407542445155146),
        (6, 65, 8.827924588465608),
        (6, 99, 0.17343435813511254),
        (6, 111, 2.452732214561487),
        (10, 10, 8.913916850054711),
        (10, 23, 1.562088603228033),
        (10, 45, 0.3577598900912533),
        (10, 57, 0.26921893650396134),
        (10, 58, 8.555911648097311),
        (10, 77, 8.003753216368672),
        (23, 23, 8.942265704567092),
        (23, 45, 0.5120042469136578),
        (23, 77, 1.1900764633557732),
        (45, 45, 9.146483402053821),
        (45, 57, 8.912404260571858),
        (45, 99, 8.854105551202771),
        (57, 57, 8.942265704567093),
        (57, 99, 8.706096229285746),
        (58, 58, 8.942265704567093),
        (58, 77, 8.147896551699091),
        (63, 63, 8.913916850054711),
        (63, 65, 8.618262133563944),
        (65, 65, 9.146483402053821),
        (65, 111, 2.5412399330507434),
        (77, 77, 9.146483402053821),
        (99, 99, 8.913916850054711),
        (111, 111, 8.913916850054713),
    ];

    #[test]
    fn degenerate_sparse_gram_stays_finite() {
        let mut a = DMatrix::zeros(150, 150);
        for (i, j, v) in DIVERGING_GRAM {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        let (vals, vecs) = psd_eigen(&a);
        assert!(vals.iter().all(|x| x.is_finite()));
        assert!(vecs.iter().all(|x| x.is_finite()));
        assert!((vals.max() - 27.002665956675617).abs() < 1e-9);
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((recon - a).amax() < 1e-9);
    }
}
