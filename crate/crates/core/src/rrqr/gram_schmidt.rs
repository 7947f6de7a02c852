use nalgebra::{DMatrix, DMatrixView, DVector};
use serde::Serialize;

/// A column whose residual after orthogonalization falls below this fraction
/// of its own norm is treated as linearly dependent.
pub(crate) const DEFLATION_TOL: f64 = 1e-12;

/// `A = Q R` with `Q` square orthonormal (`K x K`) and `R` upper trapezoidal (`K x n`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QrFactors {
    #[serde(skip)]
    pub q: DMatrix<f64>,
    #[serde(skip)]
    pub r: DMatrix<f64>,
    /// `γ_1 … γ_min(K,n)`, the diagonal of `r`; never negative.
    pub diag: Vec<f64>,
}

impl QrFactors {
    /// `‖A - QR‖_F`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        (a - &self.q * &self.r).norm()
    }
}

/// Gram-Schmidt QR: modified Gram-Schmidt with one reorthogonalization pass.
///
/// Dependent (or zero) columns get a zero diagonal entry and a
/// deterministic orthonormal completion in `Q`: the first standard basis
/// vector with a substantial component outside the span of the previous
/// columns.
pub fn gs_qr(a: &DMatrix<f64>) -> QrFactors {
    let (k, n) = a.shape();
    let t = k.min(n);
    let lead = LeadingQr::new(a, t);

    let mut q = DMatrix::zeros(k, k);
    q.columns_mut(0, t).copy_from(&lead.q);
    for j in t..k {
        let v = completion(&q.columns(0, j));
        q.set_column(j, &v);
    }
    let mut r = DMatrix::zeros(k, n);
    r.rows_mut(0, t).copy_from(&lead.r);
    let diag = (0..t).map(|i| r[(i, i)]).collect();
    QrFactors { q, r, diag }
}

/// The first `t` rows of a Gram-Schmidt QR of `A`.
///
/// Holds `Q₁` (`K x t`), the matching rows of `R` for every column, and
/// for each column `c >= t` the squared norm of its residual after
/// projection onto `Q₁`. The leading columns are computed exactly as
/// [`gs_qr`] computes them, so the values agree with a full factorization.
#[derive(Debug, Clone)]
pub(crate) struct LeadingQr {
    t: usize,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    tail_sq: Vec<f64>,
}

impl LeadingQr {
    pub(crate) fn new(a: &DMatrix<f64>, t: usize) -> Self {
        let (k, n) = a.shape();
        debug_assert!(t <= k.min(n));
        let mut lead = Self { t, q: DMatrix::zeros(k, t), r: DMatrix::zeros(t, n), tail_sq: vec![0.0; n] };
        lead.refactor_from(a, 0);
        lead
    }

    #[cfg(test)]
    pub(crate) fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub(crate) fn diag(&self, i: usize) -> f64 {
        self.r[(i, i)]
    }

    /// Changes the number of leading columns, recomputing what changed.
    pub(crate) fn resize(&mut self, a: &DMatrix<f64>, t: usize) {
        if t == self.t {
            return;
        }
        let (k, n) = a.shape();
        let keep = t.min(self.t);
        let mut q = DMatrix::zeros(k, t);
        q.columns_mut(0, keep).copy_from(&self.q.columns(0, keep));
        let mut r = DMatrix::zeros(t, n);
        r.rows_mut(0, keep).copy_from(&self.r.rows(0, keep));
        self.q = q;
        self.r = r;
        self.t = t;
        self.refactor_from(a, keep);
    }

    /// Recomputes everything that depends on columns `from..` of `a`.
    pub(crate) fn refactor_from(&mut self, a: &DMatrix<f64>, from: usize) {
        let n = a.ncols();
        let t = self.t;
        for j in from.min(t)..t {
            self.r.column_mut(j).fill(0.0);
            let mut v = a.column(j).into_owned();
            let scale = v.norm();
            for _pass in 0..2 {
                for i in 0..j {
                    let qi = self.q.column(i);
                    let c = qi.dot(&v);
                    v.axpy(-c, &qi, 1.0);
                    self.r[(i, j)] += c;
                }
            }
            let norm = v.norm();
            let v = if norm > 0.0 && norm > DEFLATION_TOL * scale {
                self.r[(j, j)] = norm;
                v / norm
            } else {
                completion(&self.q.columns(0, j))
            };
            self.q.set_column(j, &v);
        }

        self.tail_sq[..t.min(n)].fill(0.0);
        if t < n {
            // classical Gram-Schmidt, twice, for the trailing block
            let a2 = a.columns(t, n - t);
            let mut coeff = self.q.transpose() * a2;
            let mut w = a2 - &self.q * &coeff;
            let corr = self.q.transpose() * &w;
            w -= &self.q * &corr;
            coeff += corr;
            self.r.columns_mut(t, n - t).copy_from(&coeff);
            for (c, col) in w.column_iter().enumerate() {
                self.tail_sq[t + c] = col.norm_squared();
            }
        }
    }

    /// Norm of column `c` of the trailing block `R[s.., s..]`, for `s <= t`.
    pub(crate) fn split_norm(&self, s: usize, c: usize) -> f64 {
        debug_assert!(s <= self.t && c >= s);
        let mut sq = if c >= self.t { self.tail_sq[c] } else { 0.0 };
        for i in s..self.t {
            sq += self.r[(i, c)] * self.r[(i, c)];
        }
        sq.sqrt()
    }

    pub(crate) fn leading_block(&self, size: usize) -> DMatrix<f64> {
        self.r.view((0, 0), (size, size)).into_owned()
    }
}

/// Unit vector orthogonal to `prev`, built from the lowest-index standard
/// basis vector whose residual exceeds `1/(2√K)`. Some basis vector always
/// qualifies while `prev` has fewer than `K` columns.
fn completion(prev: &DMatrixView<'_, f64>) -> DVector<f64> {
    let k = prev.nrows();
    let threshold = 0.5 / (k as f64).sqrt();
    for e in 0..k {
        let mut v = DVector::zeros(k);
        v[e] = 1.0;
        for _pass in 0..2 {
            for i in 0..prev.ncols() {
                let qi = prev.column(i);
                let c = qi.dot(&v);
                v.axpy(-c, &qi, 1.0);
            }
        }
        let norm = v.norm();
        if norm > threshold {
            return v / norm;
        }
    }
    unreachable!("orthonormal set of {} vectors already spans R^{k}", prev.ncols())
}
