//! Two-phase primal simplex for bounded variables.
//!
//! The problem is equilibrated, rows are turned into equalities with bounded
//! slacks, and rows that start infeasible receive artificial columns driven
//! out by a phase-1 objective. The basis inverse is maintained as a sparse LU
//! factorization plus product-form eta updates, refactorized periodically.
//! Pricing is Dantzig's rule with a permanent switch to Bland's rule once the
//! objective stalls, which is what makes termination on degenerate expansion
//! models dependable.

// Index loops over parallel position arrays are the clearest way to write
// the pivoting kernels.
#![allow(clippy::needless_range_loop)]

use crate::error::LpError;
use crate::lu::{LuFactors, SparseCol, SparseColRef};
use crate::problem::{Problem, Sense};
use crate::scale::{equilibrate, Scaling};
use crate::solution::{LpSolution, LpStatus};

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 64;
const STALL_LIMIT: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VStat {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free variable held nonbasic at zero.
    FreeZero,
}

struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

/// Relax integrality and solve. Bound overrides (for branch-and-bound nodes)
/// replace the per-variable bounds when provided.
pub fn solve_lp(problem: &Problem) -> Result<LpSolution, LpError> {
    solve_lp_bounded(problem, None, 0)
}

pub fn solve_lp_bounded(
    problem: &Problem,
    bounds: Option<(&[f64], &[f64])>,
    iteration_limit: usize,
) -> Result<LpSolution, LpError> {
    let scaling = equilibrate(problem);
    let mut s = Simplex::build(problem, &scaling, bounds)?;
    let limit = if iteration_limit > 0 {
        iteration_limit
    } else {
        20_000 + 30 * (s.m + s.n_struct)
    };
    s.run(limit)?;
    s.extract(problem, &scaling)
}

struct Simplex {
    m: usize,
    n_struct: usize,
    ncols: usize,
    cols: Vec<SparseCol>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    b: Vec<f64>,
    n_art: usize,

    vstat: Vec<VStat>,
    basic: Vec<usize>,
    xb: Vec<f64>,
    lu: Option<LuFactors>,
    etas: Vec<Eta>,
    pivots_since_refactor: usize,

    status: LpStatus,
    iterations: usize,
    phase1_needed: bool,

    work2: Vec<f64>,
    dual: Vec<f64>,
}

impl Simplex {
    fn build(
        problem: &Problem,
        scaling: &Scaling,
        bounds: Option<(&[f64], &[f64])>,
    ) -> Result<Simplex, LpError> {
        let m = problem.num_cons();
        let n = problem.num_vars();

        let mut cols: Vec<SparseCol> = vec![SparseCol::default(); n];
        for (i, c) in problem.cons().iter().enumerate() {
            for &(j, a) in &c.terms {
                let v = a * scaling.row[i] * scaling.col[j];
                if v != 0.0 {
                    cols[j].idx.push(i);
                    cols[j].val.push(v);
                }
            }
        }

        let mut lb = Vec::with_capacity(n + m);
        let mut ub = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        for (j, v) in problem.vars().iter().enumerate() {
            let (lo, hi) = match bounds {
                Some((l, u)) => (l[j], u[j]),
                None => (v.lower, v.upper),
            };
            lb.push(lo / scaling.col[j]);
            ub.push(hi / scaling.col[j]);
            cost.push(v.obj * scaling.col[j] * scaling.obj);
        }

        // Slack per row turns every sense into an equality.
        for (i, c) in problem.cons().iter().enumerate() {
            cols.push(SparseCol::unit(i));
            let (lo, hi) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lb.push(lo);
            ub.push(hi);
            cost.push(0.0);
        }

        let b: Vec<f64> = problem
            .cons()
            .iter()
            .enumerate()
            .map(|(i, c)| c.rhs * scaling.row[i])
            .collect();

        let mut s = Simplex {
            m,
            n_struct: n,
            ncols: n + m,
            cols,
            lb,
            ub,
            cost,
            b,
            n_art: 0,
            vstat: Vec::new(),
            basic: Vec::new(),
            xb: Vec::new(),
            lu: None,
            etas: Vec::new(),
            pivots_since_refactor: 0,
            status: LpStatus::Optimal,
            iterations: 0,
            phase1_needed: false,
            work2: vec![0.0; m],
            dual: vec![0.0; m],
        };
        s.install_start_basis();
        Ok(s)
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.vstat[j] {
            VStat::AtLower => self.lb[j],
            VStat::AtUpper => self.ub[j],
            VStat::FreeZero => 0.0,
            VStat::Basic(_) => unreachable!("basic variable has no nonbasic value"),
        }
    }

    /// Start every structural column nonbasic at a finite bound, make slacks
    /// basic where the implied value is feasible, and cover the remaining rows
    /// with artificial columns that phase 1 drives to zero.
    fn install_start_basis(&mut self) {
        let n = self.n_struct;
        self.vstat = (0..self.ncols)
            .map(|j| {
                if self.lb[j].is_finite() {
                    VStat::AtLower
                } else if self.ub[j].is_finite() {
                    VStat::AtUpper
                } else {
                    VStat::FreeZero
                }
            })
            .collect();

        // Residual after placing structural columns on their bounds.
        let mut r = self.b.clone();
        for j in 0..n {
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for (i, a) in self.cols[j].iter() {
                    r[i] -= a * v;
                }
            }
        }

        self.basic = Vec::with_capacity(self.m);
        self.xb = Vec::with_capacity(self.m);
        for i in 0..self.m {
            let slack = n + i;
            if r[i] >= self.lb[slack] - 1e-12 && r[i] <= self.ub[slack] + 1e-12 {
                self.vstat[slack] = VStat::Basic(i);
                self.basic.push(slack);
                self.xb.push(r[i]);
            } else {
                // Slack pinned at the nearest bound; artificial covers the rest.
                let sval = r[i].clamp(self.lb[slack], self.ub[slack]);
                self.vstat[slack] = if sval == self.lb[slack] {
                    VStat::AtLower
                } else {
                    VStat::AtUpper
                };
                let excess = r[i] - sval;
                let art = self.ncols;
                let mut col = SparseCol::default();
                col.idx.push(i);
                col.val.push(if excess >= 0.0 { 1.0 } else { -1.0 });
                self.cols.push(col);
                self.lb.push(0.0);
                self.ub.push(f64::INFINITY);
                self.cost.push(0.0);
                self.vstat.push(VStat::Basic(i));
                self.basic.push(art);
                self.xb.push(excess.abs());
                self.ncols += 1;
                self.n_art += 1;
                self.phase1_needed = true;
            }
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct + self.m
    }

    fn refactorize(&mut self) -> Result<(), LpError> {
        let cols = &self.cols;
        let basic = &self.basic;
        let lu = LuFactors::factorize(self.m, |pos| SparseColRef::from(&cols[basic[pos]]))?;
        self.lu = Some(lu);
        self.etas.clear();
        self.pivots_since_refactor = 0;
        self.recompute_xb();
        Ok(())
    }

    /// xB = B⁻¹ (b − N x_N), from scratch.
    fn recompute_xb(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if let VStat::Basic(_) = self.vstat[j] {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for (i, a) in self.cols[j].iter() {
                    rhs[i] -= a * v;
                }
            }
        }
        self.ftran(&mut rhs);
        self.xb = rhs;
    }

    fn ftran(&mut self, x: &mut [f64]) {
        if let Some(lu) = &self.lu {
            lu.ftran(x, &mut self.work2);
        }
        for e in &self.etas {
            let xp = x[e.pos] / e.pivot;
            x[e.pos] = xp;
            if xp != 0.0 {
                for (i, v) in e.idx.iter().zip(&e.val) {
                    x[*i] -= v * xp;
                }
            }
        }
    }

    fn btran(&mut self, x: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut acc = x[e.pos];
            for (i, v) in e.idx.iter().zip(&e.val) {
                acc -= v * x[*i];
            }
            x[e.pos] = acc / e.pivot;
        }
        if let Some(lu) = &self.lu {
            lu.btran(x, &mut self.work2);
        }
    }

    fn phase_cost(&self, phase1: bool, j: usize) -> f64 {
        if phase1 {
            if self.is_artificial(j) {
                1.0
            } else {
                0.0
            }
        } else {
            self.cost[j]
        }
    }

    fn phase_objective(&self, phase1: bool) -> f64 {
        let mut obj = 0.0;
        for (pos, &j) in self.basic.iter().enumerate() {
            obj += self.phase_cost(phase1, j) * self.xb[pos];
        }
        for j in 0..self.ncols {
            if !matches!(self.vstat[j], VStat::Basic(_)) {
                let c = self.phase_cost(phase1, j);
                if c != 0.0 {
                    obj += c * self.nonbasic_value(j);
                }
            }
        }
        obj
    }

    fn run(&mut self, iteration_limit: usize) -> Result<(), LpError> {
        self.refactorize()?;

        if self.phase1_needed {
            self.iterate(true, iteration_limit)?;
            let infeas = self.phase_objective(true);
            let tol = 1e-8 * (1.0 + self.b.iter().fold(0.0f64, |a, &v| a.max(v.abs())));
            if infeas > tol {
                self.status = LpStatus::Infeasible;
                return Ok(());
            }
            // Artificials may remain basic at zero; pin them so they cannot
            // take a nonzero value again.
            for j in self.n_struct + self.m..self.ncols {
                self.lb[j] = 0.0;
                self.ub[j] = 0.0;
                if !matches!(self.vstat[j], VStat::Basic(_)) {
                    self.vstat[j] = VStat::AtLower;
                }
            }
        }

        if self.status == LpStatus::Optimal {
            self.iterate(false, iteration_limit)?;
        }
        Ok(())
    }

    /// Price all nonbasic columns; returns the entering column id.
    fn price(&mut self, phase1: bool, bland: bool) -> Option<usize> {
        let mut cb: Vec<f64> = (0..self.m)
            .map(|pos| self.phase_cost(phase1, self.basic[pos]))
            .collect();
        self.btran(&mut cb);
        self.dual.copy_from_slice(&cb);

        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncols {
            if matches!(self.vstat[j], VStat::Basic(_)) {
                continue;
            }
            if self.ub[j] - self.lb[j] <= 0.0 {
                continue; // fixed
            }
            let mut d = self.phase_cost(phase1, j);
            for (i, a) in self.cols[j].iter() {
                d -= self.dual[i] * a;
            }
            let score = match self.vstat[j] {
                VStat::AtLower => -d,
                VStat::AtUpper => d,
                VStat::FreeZero => d.abs(),
                VStat::Basic(_) => unreachable!(),
            };
            if score > PRICE_TOL {
                if bland {
                    return Some(j);
                }
                match best {
                    Some((_, s)) if s >= score => {}
                    _ => best = Some((j, score)),
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn iterate(&mut self, phase1: bool, iteration_limit: usize) -> Result<(), LpError> {
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = self.phase_objective(phase1);
        // One refactorize-and-retry per iteration when the step looks
        // numerically suspect (no blocking row, or only a tiny pivot).
        let mut retried_fresh = false;

        loop {
            if self.iterations >= iteration_limit {
                return Err(LpError::IterationLimit {
                    iterations: self.iterations,
                });
            }

            let Some(q) = self.price(phase1, bland) else {
                return Ok(()); // phase optimal
            };

            // Direction: reduced cost sign decides for free variables.
            let dir = match self.vstat[q] {
                VStat::AtLower => 1.0,
                VStat::AtUpper => -1.0,
                VStat::FreeZero => {
                    let mut d = self.phase_cost(phase1, q);
                    for (i, a) in self.cols[q].iter() {
                        d -= self.dual[i] * a;
                    }
                    if d < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                VStat::Basic(_) => unreachable!(),
            };

            let mut w = vec![0.0; self.m];
            for (i, a) in self.cols[q].iter() {
                w[i] = a;
            }
            self.ftran(&mut w);

            // Harris-style two-pass ratio test on xB - t * dir * w: first a
            // relaxed minimum ratio with a feasibility slack, then the
            // largest pivot among rows whose strict ratio stays below it.
            // Degenerate network bases tie at t = 0 constantly; picking the
            // biggest pivot there keeps the basis well conditioned.
            let range_q = self.ub[q] - self.lb[q];
            const FEAS_EPS: f64 = 1e-9;
            let strict_ratio = |pos: usize, v: f64| -> Option<f64> {
                let jb = self.basic[pos];
                if v > 0.0 {
                    self.lb[jb]
                        .is_finite()
                        .then(|| ((self.xb[pos] - self.lb[jb]) / v).max(0.0))
                } else {
                    self.ub[jb]
                        .is_finite()
                        .then(|| ((self.xb[pos] - self.ub[jb]) / v).max(0.0))
                }
            };
            let mut t_relaxed = range_q;
            for pos in 0..self.m {
                let v = dir * w[pos];
                if v.abs() <= PIVOT_TOL {
                    continue;
                }
                let jb = self.basic[pos];
                let t = if v > 0.0 {
                    if self.lb[jb].is_finite() {
                        (self.xb[pos] - self.lb[jb] + FEAS_EPS) / v
                    } else {
                        continue;
                    }
                } else {
                    if !self.ub[jb].is_finite() {
                        continue;
                    }
                    (self.xb[pos] - self.ub[jb] - FEAS_EPS) / v
                };
                t_relaxed = t_relaxed.min(t.max(0.0));
            }

            let mut leave: Option<usize> = None;
            let mut leave_abs = 0.0f64;
            if t_relaxed.is_finite() {
                for pos in 0..self.m {
                    let v = dir * w[pos];
                    if v.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let Some(t) = strict_ratio(pos, v) else {
                        continue;
                    };
                    if t <= t_relaxed && v.abs() > leave_abs {
                        leave = Some(pos);
                        leave_abs = v.abs();
                    }
                }
            }
            // The chosen row's strict ratio is the actual step.
            let t_best = match leave {
                Some(p) => strict_ratio(p, dir * w[p]).unwrap_or(0.0),
                None => range_q,
            };

            if leave.is_none() && !t_best.is_finite() {
                // Nothing blocks. Retry once on fresh factors in case tiny
                // pivots were filtered out, then report unbounded.
                if !retried_fresh && self.pivots_since_refactor > 0 {
                    retried_fresh = true;
                    self.refactorize()?;
                    continue;
                }
                if phase1 {
                    return Err(LpError::NumericalFailure(
                        "phase 1 claims an unbounded direction".into(),
                    ));
                }
                self.status = LpStatus::Unbounded;
                return Ok(());
            }
            if leave.is_some()
                && leave_abs < 1e-7
                && self.pivots_since_refactor > 0
                && !retried_fresh
            {
                // A near-zero pivot right after stale updates is usually an
                // artifact; recompute the factors and redo the pricing.
                retried_fresh = true;
                self.refactorize()?;
                continue;
            }
            retried_fresh = false;
            self.iterations += 1;

            match leave {
                None => {
                    // Bound flip: the entering variable crosses its own range.
                    for pos in 0..self.m {
                        let v = dir * w[pos];
                        if v != 0.0 {
                            self.xb[pos] -= v * t_best;
                        }
                    }
                    self.vstat[q] = match self.vstat[q] {
                        VStat::AtLower => VStat::AtUpper,
                        VStat::AtUpper => VStat::AtLower,
                        other => other,
                    };
                }
                Some(p) => {
                    let enter_from = match self.vstat[q] {
                        VStat::AtLower => self.lb[q],
                        VStat::AtUpper => self.ub[q],
                        VStat::FreeZero => 0.0,
                        VStat::Basic(_) => unreachable!(),
                    };
                    for pos in 0..self.m {
                        let v = dir * w[pos];
                        if v != 0.0 {
                            self.xb[pos] -= v * t_best;
                        }
                    }
                    let jl = self.basic[p];
                    // Snap the leaving variable exactly onto its bound.
                    let v_p = dir * w[p];
                    self.vstat[jl] = if v_p > 0.0 {
                        VStat::AtLower
                    } else {
                        VStat::AtUpper
                    };
                    self.basic[p] = q;
                    self.vstat[q] = VStat::Basic(p);
                    self.xb[p] = enter_from + dir * t_best;

                    let mut eta_idx = Vec::new();
                    let mut eta_val = Vec::new();
                    for (i, &wv) in w.iter().enumerate() {
                        if i != p && wv != 0.0 {
                            eta_idx.push(i);
                            eta_val.push(wv);
                        }
                    }
                    self.etas.push(Eta {
                        pos: p,
                        pivot: w[p],
                        idx: eta_idx,
                        val: eta_val,
                    });
                    self.pivots_since_refactor += 1;
                    if self.pivots_since_refactor >= REFACTOR_EVERY {
                        self.refactorize()?;
                    }
                }
            }

            // Stall detection drives the permanent switch to Bland's rule.
            if !bland {
                let obj = self.phase_objective(phase1);
                if obj < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                    last_obj = obj;
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        bland = true;
                    }
                }
            }
        }
    }

    fn extract(mut self, problem: &Problem, scaling: &Scaling) -> Result<LpSolution, LpError> {
        if self.status != LpStatus::Optimal {
            return Ok(LpSolution {
                status: self.status,
                x: Vec::new(),
                objective: f64::NAN,
                dual_objective: f64::NAN,
                max_residual: f64::NAN,
                max_bound_violation: f64::NAN,
                iterations: self.iterations,
            });
        }

        // Fresh factors and a from-scratch xB before reading anything off.
        self.refactorize()?;

        let mut x = vec![0.0f64; self.n_struct];
        for j in 0..self.n_struct {
            let scaled = match self.vstat[j] {
                VStat::Basic(pos) => self.xb[pos],
                VStat::AtLower => self.lb[j],
                VStat::AtUpper => self.ub[j],
                VStat::FreeZero => 0.0,
            };
            x[j] = scaled * scaling.col[j];
        }

        // Duals in original units: y = R ŷ / obj_scale.
        let mut cb: Vec<f64> = (0..self.m).map(|pos| self.cost[self.basic[pos]]).collect();
        self.btran(&mut cb);
        let y: Vec<f64> = (0..self.m)
            .map(|i| cb[i] * scaling.row[i] / scaling.obj)
            .collect();

        let mut dual_obj: f64 = problem
            .cons()
            .iter()
            .zip(&y)
            .map(|(c, &yi)| yi * c.rhs)
            .sum();
        for j in 0..self.n_struct {
            let bound_val = match self.vstat[j] {
                VStat::Basic(_) | VStat::FreeZero => continue,
                VStat::AtLower => problem.var(j).lower,
                VStat::AtUpper => problem.var(j).upper,
            };
            let mut d = problem.var(j).obj;
            for (i, a) in self.cols[j].iter() {
                // Undo scaling on the stored coefficient.
                let a_orig = a / (scaling.row[i] * scaling.col[j]);
                d -= y[i] * a_orig;
            }
            dual_obj += d * bound_val;
        }

        let objective = problem.objective_value(&x);
        let viol = problem.max_violations(&x);

        let rel = viol.constraint_rel;
        if rel > 1e-7 {
            return Err(LpError::NumericalFailure(format!(
                "optimal point fails residual check: relative violation {rel:.3e}"
            )));
        }

        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            dual_objective: dual_obj,
            max_residual: viol.constraint_abs,
            max_bound_violation: viol.bound_abs,
            iterations: self.iterations,
        })
    }
}
