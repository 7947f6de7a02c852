use nalgebra::DMatrix;

use super::pivoting::{challenger, qr_cp_state, weakest_column};
use super::{check_rank, finish, Permutation, PivotedQr, RrqrResult};
use crate::{Error, Result};

/// Hybrid loops give up after `ITERATION_CAP_FACTOR · n` passes.
pub const ITERATION_CAP_FACTOR: usize = 10;

/// Pass counter shared by the nested loops of one hybrid run.
pub(crate) struct Budget {
    cap: usize,
    pub(crate) used: usize,
    algorithm: &'static str,
}

impl Budget {
    pub(crate) fn new(n: usize, algorithm: &'static str) -> Self {
        Self { cap: ITERATION_CAP_FACTOR * n, used: 0, algorithm }
    }

    fn spend(&mut self) -> Result<()> {
        if self.used >= self.cap {
            return Err(Error::IterationCap { algorithm: self.algorithm, cap: self.cap });
        }
        self.used += 1;
        Ok(())
    }
}

/// One Hybrid-I pass for a leading block of size `block`: a pivot step at
/// split `block - 1`, then a Stewart step on the `block x block` leading
/// triangle. Returns whether anything moved.
fn pass(st: &mut PivotedQr, block: usize) -> bool {
    let split = block - 1;
    let mut moved = false;
    if let Some(j) = challenger(&st.trailing_norms(split), 0) {
        st.swap(split, split + j);
        moved = true;
    }
    if let Some(j) = weakest_column(&st.leading_block(block)) {
        if j != split {
            st.swap(j, split);
            moved = true;
        }
    }
    moved
}

/// Runs passes at `block` until one makes no swap; returns the number of
/// passes that did swap.
fn settle(st: &mut PivotedQr, block: usize, budget: &mut Budget) -> Result<usize> {
    let mut swapped = 0;
    loop {
        budget.spend()?;
        if !pass(st, block) {
            return Ok(swapped);
        }
        swapped += 1;
    }
}

fn check_init(a: &DMatrix<f64>, init: &Permutation) -> Result<()> {
    if init.len() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "initial permutation has length {} but the matrix has {} columns",
            init.len(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Hybrid-I at rank `p`, starting from `init`.
pub fn hybrid1(a: &DMatrix<f64>, p: usize, init: &Permutation) -> Result<RrqrResult> {
    check_rank(p, 1, a.nrows().min(a.ncols()), "rank")?;
    check_init(a, init)?;
    let mut st = PivotedQr::new(a, init.clone(), p);
    let mut budget = Budget::new(a.ncols(), "hybrid-I");
    settle(&mut st, p, &mut budget)?;
    Ok(finish(a, st.perm, p, budget.used))
}

/// Hybrid-II at rank `p`: the Hybrid-I loop at `p + 1`, blocked at `p`.
pub fn hybrid2(a: &DMatrix<f64>, p: usize, init: &Permutation) -> Result<RrqrResult> {
    check_rank(p, 1, a.nrows().min(a.ncols()) - 1, "rank")?;
    check_init(a, init)?;
    let mut st = PivotedQr::new(a, init.clone(), p + 1);
    let mut budget = Budget::new(a.ncols(), "hybrid-II");
    settle(&mut st, p + 1, &mut budget)?;
    Ok(finish(a, st.perm, p, budget.used))
}

/// Hybrid-III at rank `p`, seeded with `p + 1` steps of QR-CP.
pub fn hybrid3(a: &DMatrix<f64>, p: usize) -> Result<RrqrResult> {
    check_rank(p, 1, a.nrows().min(a.ncols()).saturating_sub(1), "rank")?;
    let mut st = qr_cp_state(a, p + 1);
    let mut budget = Budget::new(a.ncols(), "hybrid-III");
    run_hybrid3(&mut st, p, &mut budget)?;
    Ok(finish(a, st.perm, p, budget.used))
}

/// Hybrid-III at rank `p`, starting from `init`.
pub fn hybrid3_from(a: &DMatrix<f64>, p: usize, init: &Permutation) -> Result<RrqrResult> {
    check_rank(p, 1, a.nrows().min(a.ncols()).saturating_sub(1), "rank")?;
    check_init(a, init)?;
    let (st, used) = hybrid3_state(a, p, init)?;
    Ok(finish(a, st.perm, p, used))
}

/// Hybrid-III without the final full factorization, for callers that only
/// need the leading rows. Returns the state and the passes spent.
pub(crate) fn hybrid3_state(a: &DMatrix<f64>, p: usize, init: &Permutation) -> Result<(PivotedQr, usize)> {
    let mut st = PivotedQr::new(a, init.clone(), p + 1);
    let mut budget = Budget::new(a.ncols(), "hybrid-III");
    run_hybrid3(&mut st, p, &mut budget)?;
    Ok((st, budget.used))
}

fn run_hybrid3(st: &mut PivotedQr, p: usize, budget: &mut Budget) -> Result<()> {
    st.grow(p + 1);
    loop {
        let first = settle(st, p, budget)?;
        let second = settle(st, p + 1, budget)?;
        if first + second == 0 {
            return Ok(());
        }
    }
}
