use nalgebra::{DMatrix, SymmetricEigen};

/// Singular values in descending order, `min(m, n)` of them.
///
/// Eigen-decomposes the smaller Gram matrix and then measures `‖A v‖` for
/// each eigenvector `v`, which keeps small singular values accurate to
/// roughly machine precision relative to `σ₁` instead of its square root.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = if n <= m {
        let eig = SymmetricEigen::new(a.transpose() * a);
        eig.eigenvectors.column_iter().map(|v| (a * v).norm()).collect()
    } else {
        let eig = SymmetricEigen::new(a * a.transpose());
        eig.eigenvectors.column_iter().map(|u| (a.transpose() * u).norm()).collect()
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Largest singular value, zero for an empty matrix.
pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest of the `min(m, n)` singular values, zero for an empty matrix.
pub(crate) fn min_singular_value(a: &DMatrix<f64>) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}
