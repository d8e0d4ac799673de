//! Sparse LU factorization of simplex basis matrices.
//!
//! Left-looking (Gilbert–Peierls) elimination with partial pivoting. Columns
//! are pre-ordered by ascending fill count, which keeps the near-triangular
//! bases produced by network models cheap to factorize. Solves use dense
//! work vectors; basis dimensions here are a few thousand at most.

use crate::error::LpError;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Sparse column: parallel row-index and value arrays.
#[derive(Debug, Clone, Default)]
pub struct SparseCol {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseCol {
    pub fn unit(row: usize) -> Self {
        SparseCol {
            idx: vec![row],
            val: vec![1.0],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx.iter().copied().zip(self.val.iter().copied())
    }
}

/// PA' = LU where A' is the basis with columns taken in elimination order.
pub struct LuFactors {
    m: usize,
    /// Multipliers per elimination step; row indices are original rows.
    l_cols: Vec<SparseCol>,
    /// Strictly-upper entries per step, indexed by earlier step number.
    u_cols: Vec<SparseCol>,
    u_diag: Vec<f64>,
    /// Original row pivoted at each step.
    pivot_row: Vec<usize>,
    /// `step_of_row[r]` = elimination step that pivoted original row `r`.
    step_of_row: Vec<usize>,
    /// `order[k]` = basis position eliminated at step k.
    order: Vec<usize>,
    /// Inverse of `order`.
    step_of_pos: Vec<usize>,
}

const PIVOT_ABS_MIN: f64 = 1e-11;

impl LuFactors {
    /// Factorize the m x m matrix whose columns are given by `col_of(pos)`.
    pub fn factorize<'a>(
        m: usize,
        col_of: impl Fn(usize) -> SparseColRef<'a>,
    ) -> Result<Self, LpError> {
        // Cheapest columns first; ties by position for determinism.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (col_of(p).idx.len(), p));

        let mut lu = LuFactors {
            m,
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            pivot_row: Vec::with_capacity(m),
            step_of_row: vec![usize::MAX; m],
            step_of_pos: vec![usize::MAX; m],
            order: order.clone(),
        };

        let mut x = vec![0.0f64; m];
        let mut touched: Vec<usize> = Vec::with_capacity(64);
        let mut pending: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut queued = vec![false; m];

        for (k, &pos) in order.iter().enumerate() {
            let col = col_of(pos);

            // Scatter the column; queue every already-pivoted row it touches.
            for (&r, &v) in col.idx.iter().zip(col.val) {
                x[r] = v;
                touched.push(r);
                let t = lu.step_of_row[r];
                if t != usize::MAX && !queued[t] {
                    queued[t] = true;
                    pending.push(Reverse(t));
                }
            }

            // Eliminate in increasing step order; updates may reach further
            // pivoted rows, which are queued as they appear.
            while let Some(Reverse(t)) = pending.pop() {
                queued[t] = false;
                let xt = x[lu.pivot_row[t]];
                if xt == 0.0 {
                    continue;
                }
                for (r, lv) in lu.l_cols[t].iter() {
                    if x[r] == 0.0 {
                        touched.push(r);
                    }
                    x[r] -= lv * xt;
                    let t2 = lu.step_of_row[r];
                    if t2 != usize::MAX && t2 > t && !queued[t2] {
                        queued[t2] = true;
                        pending.push(Reverse(t2));
                    }
                }
            }

            // Partial pivoting over rows not yet pivoted.
            let mut piv_row = usize::MAX;
            let mut piv_abs = 0.0f64;
            for &r in &touched {
                if lu.step_of_row[r] == usize::MAX {
                    let a = x[r].abs();
                    if a > piv_abs || (a == piv_abs && piv_row != usize::MAX && r < piv_row) {
                        piv_abs = a;
                        piv_row = r;
                    }
                }
            }
            if piv_row == usize::MAX || piv_abs < PIVOT_ABS_MIN {
                for &r in &touched {
                    x[r] = 0.0;
                }
                return Err(LpError::NumericalFailure(format!(
                    "singular basis at elimination step {k}"
                )));
            }

            let piv = x[piv_row];
            let mut lcol = SparseCol::default();
            let mut ucol = SparseCol::default();
            touched.sort_unstable();
            for &r in &touched {
                let v = x[r];
                x[r] = 0.0;
                if v == 0.0 || r == piv_row {
                    continue;
                }
                let t = lu.step_of_row[r];
                if t != usize::MAX {
                    ucol.idx.push(t);
                    ucol.val.push(v);
                } else {
                    lcol.idx.push(r);
                    lcol.val.push(v / piv);
                }
            }
            touched.clear();
            debug_assert!(pending.is_empty());

            lu.step_of_row[piv_row] = k;
            lu.pivot_row.push(piv_row);
            lu.u_diag.push(piv);
            lu.l_cols.push(lcol);
            lu.u_cols.push(ucol);
            lu.step_of_pos[pos] = k;
        }

        Ok(lu)
    }

    /// Solve B z = rhs in place. `rhs` is indexed by row on entry and by
    /// basis position on exit.
    pub fn ftran(&self, rhs: &mut [f64], scratch: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.m);
        // Forward: L y = P rhs, applied on original row indexing.
        for k in 0..self.m {
            let xp = rhs[self.pivot_row[k]];
            if xp != 0.0 {
                for (r, lv) in self.l_cols[k].iter() {
                    rhs[r] -= lv * xp;
                }
            }
        }
        // Backward: U w = y, w indexed by elimination step.
        for k in (0..self.m).rev() {
            let wk = rhs[self.pivot_row[k]] / self.u_diag[k];
            scratch[k] = wk;
            if wk != 0.0 {
                for (t, u) in self.u_cols[k].iter() {
                    rhs[self.pivot_row[t]] -= u * wk;
                }
            }
        }
        // Permute step order back to basis positions.
        for k in 0..self.m {
            rhs[self.order[k]] = scratch[k];
        }
    }

    /// Solve Bᵀ y = c in place. `c` is indexed by basis position on entry and
    /// by row on exit.
    pub fn btran(&self, c: &mut [f64], scratch: &mut [f64]) {
        debug_assert_eq!(c.len(), self.m);
        // g indexed by step: Uᵀ g = c(in elimination order).
        for k in 0..self.m {
            let mut v = c[self.order[k]];
            for (t, u) in self.u_cols[k].iter() {
                v -= u * scratch[t];
            }
            scratch[k] = v / self.u_diag[k];
        }
        // Lᵀ h = g, h indexed by step; entries of L reference later steps.
        for k in (0..self.m).rev() {
            let mut v = scratch[k];
            for (r, lv) in self.l_cols[k].iter() {
                v -= lv * scratch[self.step_of_row[r]];
            }
            scratch[k] = v;
        }
        for k in 0..self.m {
            c[self.pivot_row[k]] = scratch[k];
        }
    }

}

/// Borrowed view of a sparse column.
#[derive(Clone, Copy)]
pub struct SparseColRef<'a> {
    pub idx: &'a [usize],
    pub val: &'a [f64],
}

impl<'a> From<&'a SparseCol> for SparseColRef<'a> {
    fn from(c: &'a SparseCol) -> Self {
        SparseColRef {
            idx: &c.idx,
            val: &c.val,
        }
    }
}
