//! Dense linear algebra helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix. Vectors inside a degenerate cluster are
/// re-orthonormalized.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    orthonormalize_clusters(&values, &mut vectors, 1e-9);
    (values, vectors)
}

fn orthonormalize_clusters(values: &[f64], vectors: &mut DMatrix<Complex64>, tol: f64) {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[start]).abs() < tol {
            end += 1;
        }
        for c in start..end {
            let mut v = vectors.column(c).into_owned();
            for p in start..c {
                let u = vectors.column(p);
                let proj = u.dotc(&v);
                v -= u * proj;
            }
            let norm = v.norm();
            vectors.set_column(c, &(v / Complex64::new(norm, 0.0)));
        }
        start = end;
    }
}

/// Minimum-norm least-squares solution of `m x = v` for symmetric `m`,
/// discarding singular values below `cutoff`. Returns the solution and the
/// number of singular values kept.
///
/// The singular values of a symmetric matrix are the moduli of its
/// eigenvalues, so the truncated pseudo-inverse is built from the
/// eigendecomposition; nalgebra's SVD loses accuracy on the heavily
/// rank-deficient metrics met at `theta = 0`.
pub(crate) fn lstsq(m: &DMatrix<f64>, v: &DVector<f64>, cutoff: f64) -> (DVector<f64>, usize) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut x = DVector::zeros(m.ncols());
    let mut rank = 0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() < cutoff || l == 0.0 {
            continue;
        }
        rank += 1;
        let u = eig.eigenvectors.column(k);
        x += u * (u.dot(v) / l);
    }
    (x, rank)
}
