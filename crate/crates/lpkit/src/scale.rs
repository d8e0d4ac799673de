//! Geometric-mean equilibration of the constraint matrix.
//!
//! Expansion models mix per-unit network coefficients (~1e-2) with dollar
//! objective terms (~1e9); without scaling the simplex tolerances are
//! meaningless. Scale factors are rounded to powers of two so that applying
//! and removing them is exact in floating point.

use crate::problem::{Problem, VarKind};

#[derive(Debug, Clone)]
pub struct Scaling {
    /// Row multipliers, one per constraint.
    pub row: Vec<f64>,
    /// Column multipliers, one per variable; `x = col[j] * x_scaled[j]`.
    pub col: Vec<f64>,
    /// Objective row multiplier.
    pub obj: f64,
}

fn pow2_near(v: f64) -> f64 {
    if !v.is_finite() || v <= 0.0 {
        return 1.0;
    }
    let e = v.log2().round();
    // Clamp to avoid overflow on absurd inputs.
    2.0f64.powi(e.clamp(-512.0, 512.0) as i32)
}

/// Geometric mean of the absolute values seen by `visit`.
fn geo_mean_scale(min: f64, max: f64) -> f64 {
    if max <= 0.0 {
        1.0
    } else {
        pow2_near(1.0 / (min * max).sqrt())
    }
}

/// Compute equilibration factors for `p`. Integer columns keep scale 1 so
/// branching bounds stay integral.
pub fn equilibrate(p: &Problem) -> Scaling {
    let m = p.num_cons();
    let n = p.num_vars();
    let mut row = vec![1.0f64; m];
    let mut col = vec![1.0f64; n];

    for _ in 0..2 {
        // Rows against current column scales.
        for (i, c) in p.cons().iter().enumerate() {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for &(j, a) in &c.terms {
                let v = (a * col[j]).abs();
                if v > 0.0 {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            row[i] = geo_mean_scale(lo, hi);
        }
        // Columns against current row scales.
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (i, c) in p.cons().iter().enumerate() {
            for &(j, a) in &c.terms {
                let v = (a * row[i]).abs();
                if v > 0.0 {
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
        }
        for j in 0..n {
            if p.var(j).kind == VarKind::Continuous && hi[j] > 0.0 {
                col[j] = geo_mean_scale(lo[j], hi[j]);
            } else {
                col[j] = 1.0;
            }
        }
    }

    // Single multiplier bringing the largest scaled objective entry near 1.
    let cmax = p
        .vars()
        .iter()
        .enumerate()
        .map(|(j, v)| (v.obj * col[j]).abs())
        .fold(0.0f64, f64::max);
    let obj = if cmax > 0.0 { pow2_near(1.0 / cmax) } else { 1.0 };

    Scaling { row, col, obj }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Sense;

    #[test]
    fn powers_of_two() {
        assert_eq!(pow2_near(3.5), 4.0);
        assert_eq!(pow2_near(0.3), 0.25);
        assert_eq!(pow2_near(1.0), 1.0);
        assert_eq!(pow2_near(0.0), 1.0);
    }

    #[test]
    fn wide_range_compressed() {
        let mut p = Problem::new("t");
        let x = p.add_var("x", 0.0, 1.0, VarKind::Continuous, 1e9);
        let y = p.add_var("y", 0.0, 1.0, VarKind::Continuous, 1.0);
        p.add_con("c1", vec![(x, 1e6), (y, 1e-3)], Sense::Le, 1.0).unwrap();
        p.add_con("c2", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0).unwrap();
        let s = equilibrate(&p);
        let mut hi = 0.0f64;
        let mut lo = f64::INFINITY;
        for (i, c) in p.cons().iter().enumerate() {
            for &(j, a) in &c.terms {
                let v = (a * s.row[i] * s.col[j]).abs();
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
        // Raw spread is 1e9. Row c1 alone pins a spread of 1e9 under any
        // diagonal scaling, so the best reachable overall spread is ~sqrt(1e9).
        assert!(hi / lo < 1e5, "scaled spread {}", hi / lo);
    }

    #[test]
    fn integer_columns_unscaled() {
        let mut p = Problem::new("t");
        let x = p.add_var("x", 0.0, 10.0, VarKind::Integer, 1.0);
        p.add_con("c", vec![(x, 1e8)], Sense::Le, 1e8).unwrap();
        let s = equilibrate(&p);
        assert_eq!(s.col[x], 1.0);
    }
}
