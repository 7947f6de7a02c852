//! QR kernels: Gram-Schmidt QR, greedy column pivoting, Stewart's
//! Type-II step and the Hybrid-I/II/III rank-revealing loops.

mod gram_schmidt;
mod hybrid;
mod pivoting;
mod svd;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{Error, Result};

pub use gram_schmidt::{gs_qr, QrFactors};
pub use hybrid::{hybrid1, hybrid2, hybrid3, hybrid3_from, ITERATION_CAP_FACTOR};
pub use pivoting::{qr_cp, stewart2, SINGULAR_TOL, SWAP_TOL};
pub use svd::singular_values;

pub(crate) use gram_schmidt::LeadingQr;
pub(crate) use hybrid::hybrid3_state;
pub(crate) use pivoting::{qr_cp_order, PivotedQr};
pub(crate) use svd::{min_singular_value, spectral_norm};

/// Column permutation `Π`: column `c` of `AΠ` is column `order[c]` of `A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { order: (0..n).collect() }
    }

    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &c in &order {
            if c >= order.len() || seen[c] {
                return Err(Error::InvalidArgument(format!("{order:?} is not a permutation")));
            }
            seen[c] = true;
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(i, &c)| i == c)
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        self.order.swap(i, j);
    }

    /// `AΠ`.
    pub fn apply_columns(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(a.ncols(), self.order.len(), "permutation length must match column count");
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, c| a[(i, self.order[c])])
    }
}

/// A pivoted QR `AΠ = QR` blocked at `assumed_rank`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RrqrResult {
    pub perm: Permutation,
    pub factors: QrFactors,
    pub assumed_rank: usize,
    /// `σ_min(R₁₁)` of the leading `p x p` block.
    pub r11_min_sv: f64,
    /// `σ_max(R₂₂)` of the trailing block, zero when it is empty.
    pub r22_max_sv: f64,
    /// Passes made by the hybrid loop, zero for plain pivoting.
    pub sweeps: usize,
}

impl RrqrResult {
    pub fn r11(&self) -> DMatrix<f64> {
        let p = self.assumed_rank;
        self.factors.r.view((0, 0), (p, p)).into_owned()
    }

    pub fn r22(&self) -> DMatrix<f64> {
        let p = self.assumed_rank;
        let (k, n) = self.factors.r.shape();
        self.factors.r.view((p, p), (k - p, n - p)).into_owned()
    }

    /// First `p` columns of `Q`, an orthonormal basis for the selected columns.
    pub fn leading_q(&self) -> DMatrix<f64> {
        self.factors.q.columns(0, self.assumed_rank).into_owned()
    }
}

/// Full factorization of `AΠ` and the block singular values at `p`.
pub(crate) fn finish(a: &DMatrix<f64>, perm: Permutation, p: usize, sweeps: usize) -> RrqrResult {
    let factors = gs_qr(&perm.apply_columns(a));
    let mut out = RrqrResult { perm, factors, assumed_rank: p, r11_min_sv: 0.0, r22_max_sv: 0.0, sweeps };
    out.r11_min_sv = min_singular_value(&out.r11());
    out.r22_max_sv = spectral_norm(&out.r22());
    out
}

pub(crate) fn check_rank(p: usize, lo: usize, hi: usize, what: &str) -> Result<()> {
    if p < lo || p > hi {
        return Err(Error::InvalidArgument(format!("{what} {p} outside {lo}..={hi}")));
    }
    Ok(())
}
