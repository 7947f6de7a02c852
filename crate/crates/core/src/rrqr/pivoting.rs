use nalgebra::DMatrix;

use super::gram_schmidt::DEFLATION_TOL;
use super::{check_rank, finish, singular_values, LeadingQr, Permutation, RrqrResult};
use crate::{Error, Result};

/// A challenger replaces the incumbent only if larger by this relative margin.
pub const SWAP_TOL: f64 = 1e-12;

/// Square blocks with `σ_min <= SINGULAR_TOL·σ_max` count as singular.
pub const SINGULAR_TOL: f64 = 1e-13;

/// `AΠ` together with the leading rows of its Gram-Schmidt factorization.
///
/// Every swap refactorizes `AΠ` from the first changed column on. Only the
/// leading `t` rows of `R` (and the norms of what remains below them) are
/// kept, which is all the pivoting decisions read.
pub(crate) struct PivotedQr {
    pub(crate) perm: Permutation,
    ap: DMatrix<f64>,
    pub(crate) lead: LeadingQr,
    /// Trailing norms below this are rounding noise and compare as zero.
    floor: f64,
}

impl PivotedQr {
    pub(crate) fn new(a: &DMatrix<f64>, perm: Permutation, t: usize) -> Self {
        let ap = perm.apply_columns(a);
        let lead = LeadingQr::new(&ap, t);
        let floor = DEFLATION_TOL * a.norm();
        Self { perm, ap, lead, floor }
    }

    pub(crate) fn ncols(&self) -> usize {
        self.ap.ncols()
    }

    pub(crate) fn swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.swap_unfactored(i, j);
        self.lead.refactor_from(&self.ap, i.min(j));
    }

    fn swap_unfactored(&mut self, i: usize, j: usize) {
        self.perm.swap(i, j);
        self.ap.swap_columns(i, j);
    }

    pub(crate) fn grow(&mut self, t: usize) {
        self.lead.resize(&self.ap, t);
    }

    /// Column norms of the trailing block `R[s.., s..]`.
    pub(crate) fn trailing_norms(&self, s: usize) -> Vec<f64> {
        (s..self.ncols())
            .map(|c| self.lead.split_norm(s, c))
            .map(|x| if x <= self.floor { 0.0 } else { x })
            .collect()
    }

    pub(crate) fn leading_block(&self, size: usize) -> DMatrix<f64> {
        self.lead.leading_block(size)
    }
}

/// Index of the largest value (lowest index on ties), if it beats
/// `values[incumbent]` by more than [`SWAP_TOL`].
pub(crate) fn challenger(values: &[f64], incumbent: usize) -> Option<usize> {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    (best != incumbent && values[best] > values[incumbent] * (1.0 + SWAP_TOL)).then_some(best)
}

/// QR with column pivoting: `max_steps` greedy steps, each moving the
/// largest trailing column to the front of the trailing block.
pub fn qr_cp(a: &DMatrix<f64>, max_steps: usize) -> Result<RrqrResult> {
    check_rank(max_steps, 1, a.nrows().min(a.ncols()), "QR-CP step count")?;
    let perm = qr_cp_order(a, max_steps);
    Ok(finish(a, perm, max_steps, 0))
}

pub(crate) fn qr_cp_order(a: &DMatrix<f64>, steps: usize) -> Permutation {
    qr_cp_state(a, steps).perm
}

/// The pivoting state after `steps` QR-CP steps, with `steps` leading rows.
pub(crate) fn qr_cp_state(a: &DMatrix<f64>, steps: usize) -> PivotedQr {
    let mut st = PivotedQr::new(a, Permutation::identity(a.ncols()), 0);
    for s in 0..steps {
        if let Some(j) = challenger(&st.trailing_norms(s), 0) {
            // both columns sit at or after s, so growing to s+1 refactors them
            st.swap_unfactored(s, s + j);
        }
        st.grow(s + 1);
    }
    st
}

/// Row norms of `R⁻¹` for upper-triangular `R`, by back-substitution
/// against each standard basis vector. `None` if a diagonal entry is zero.
pub(crate) fn inverse_row_norms(r: &DMatrix<f64>) -> Option<Vec<f64>> {
    let p = r.nrows();
    let mut sq = vec![0.0; p];
    let mut x = vec![0.0; p];
    for k in 0..p {
        for i in (0..=k).rev() {
            let d = r[(i, i)];
            if d == 0.0 {
                return None;
            }
            let mut s = if i == k { 1.0 } else { 0.0 };
            for j in i + 1..=k {
                s -= r[(i, j)] * x[j];
            }
            x[i] = s / d;
        }
        for i in 0..=k {
            sq[i] += x[i] * x[i];
        }
    }
    Some(sq.into_iter().map(f64::sqrt).collect())
}

/// Stewart step on a leading block: the column whose `R⁻¹` row is largest,
/// if it should move to the last position.
///
/// A numerically singular block is handled without inverting: if its last
/// diagonal entry is already negligible nothing moves, otherwise the first
/// negligible one is sent to the back.
pub(crate) fn weakest_column(r11: &DMatrix<f64>) -> Option<usize> {
    let p = r11.nrows();
    if p < 2 {
        return None;
    }
    let last = p - 1;
    let d: Vec<f64> = (0..p).map(|i| r11[(i, i)].abs()).collect();
    let dmax = d.iter().copied().fold(0.0, f64::max);
    if dmax == 0.0 {
        return None;
    }
    let tiny = |x: f64| x <= SINGULAR_TOL * dmax;
    if tiny(d[last]) {
        return None;
    }
    if let Some(i) = d.iter().position(|&x| tiny(x)) {
        return Some(i);
    }
    challenger(&inverse_row_norms(r11)?, last)
}

/// Stewart's Type-II reduction on a square upper-triangular `r`.
///
/// Repeatedly sends the column with the largest `R⁻¹` row norm to the back
/// of the current leading block and retriangularizes, shrinking the block
/// from `n` down to `target`. Returns the accumulated permutation.
pub fn stewart2(r: &DMatrix<f64>, target: usize) -> Result<Permutation> {
    let n = r.nrows();
    if r.ncols() != n {
        return Err(Error::InvalidArgument(format!("Stewart step needs a square block, got {n}x{}", r.ncols())));
    }
    check_rank(target, 1, n, "Stewart target size")?;
    let scale = r.amax();
    for j in 0..n {
        for i in j + 1..n {
            if r[(i, j)].abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument("Stewart step needs an upper-triangular block".into()));
            }
        }
    }
    let sv = singular_values(r);
    if sv[0] == 0.0 || sv[n - 1] <= SINGULAR_TOL * sv[0] {
        return Err(Error::Singular);
    }

    let mut st = PivotedQr::new(r, Permutation::identity(n), n);
    for size in (target + 1..=n).rev() {
        let norms = inverse_row_norms(&st.leading_block(size)).ok_or(Error::Singular)?;
        if let Some(j) = challenger(&norms, size - 1) {
            st.swap(j, size - 1);
        }
    }
    Ok(st.perm)
}
