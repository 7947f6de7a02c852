//! Small dense helpers shared by the baselines and the generators.

use nalgebra::{DMatrix, SymmetricEigen};

/// Negative eigenvalues down to `-PSD_REPAIR_TOL * λ₁` are treated as zero.
pub const PSD_REPAIR_TOL: f64 = 1e-10;

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
///
/// Each eigenvector is signed so that its largest-magnitude entry is
/// positive (lowest index on ties). Eigenvalues in `[-1e-10·λ₁, 0)` are
/// clamped to zero; anything more negative is returned unchanged.
pub fn sym_eigen_desc(s: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = s.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let top = eig.eigenvalues[order[0]].max(0.0);
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut l = eig.eigenvalues[src];
        if l < 0.0 && l >= -PSD_REPAIR_TOL * top {
            l = 0.0;
        }
        values.push(l);
        let mut v = eig.eigenvectors.column(src).into_owned();
        let mut pivot = 0;
        for i in 1..n {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(dst, &v);
    }
    (values, vectors)
}

/// Symmetric square root `U Λ^{1/2} Uᵀ` of a PSD matrix.
pub fn sym_sqrt(s: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, u) = sym_eigen_desc(s);
    let mut scaled = u.clone();
    for (j, l) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(l.max(0.0).sqrt());
    }
    scaled * u.transpose()
}

/// `‖QᵀQ - I‖_F`.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    (g - DMatrix::identity(q.ncols(), q.ncols())).norm()
}
