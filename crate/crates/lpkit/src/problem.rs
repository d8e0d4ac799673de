//! Problem container: variables with bounds and integrality marks, linear
//! constraints, and a minimization objective.

use crate::error::LpError;

/// Index of a variable within a [`Problem`].
pub type VarId = usize;
/// Index of a constraint within a [`Problem`].
pub type ConId = usize;

/// Integrality class of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    /// Objective coefficient (the objective is always minimized).
    pub obj: f64,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Sorted by variable id, one entry per variable.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Left-hand-side value at the point `x`.
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this constraint (0 if satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A linear program or mixed-integer linear program in minimization form.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    vars: Vec<Variable>,
    cons: Vec<Constraint>,
}

impl Problem {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            vars: Vec::new(),
            cons: Vec::new(),
        }
    }

    /// Add a variable. Panics on `lower > upper` or a non-{0,1}-bounded binary;
    /// model builders construct bounds, so a violation is a programming error.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
        obj: f64,
    ) -> VarId {
        assert!(
            lower <= upper,
            "variable bounds inverted: {} > {}",
            lower,
            upper
        );
        if kind == VarKind::Binary {
            assert!(
                (0.0..=1.0).contains(&lower) && (0.0..=1.0).contains(&upper),
                "binary variable bounds must lie within [0, 1]"
            );
        }
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            kind,
            obj,
        });
        self.vars.len() - 1
    }

    /// Add a linear constraint. Duplicate variable references are merged.
    pub fn add_con(
        &mut self,
        name: impl Into<String>,
        mut terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId, LpError> {
        let name = name.into();
        for &(j, _) in &terms {
            if j >= self.vars.len() {
                return Err(LpError::UnknownVariable {
                    context: name,
                    index: j,
                });
            }
        }
        terms.sort_by_key(|&(j, _)| j);
        terms.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        terms.retain(|&(_, a)| a != 0.0);
        self.cons.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(self.cons.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_cons(&self) -> usize {
        self.cons.len()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id]
    }

    pub fn con(&self, id: ConId) -> &Constraint {
        &self.cons[id]
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub(crate) fn vars_mut(&mut self) -> &mut [Variable] {
        &mut self.vars
    }

    pub fn cons(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn set_bounds(&mut self, id: VarId, lower: f64, upper: f64) {
        assert!(lower <= upper, "variable bounds inverted");
        self.vars[id].lower = lower;
        self.vars[id].upper = upper;
    }

    pub fn set_obj(&mut self, id: VarId, obj: f64) {
        self.vars[id].obj = obj;
    }

    pub fn set_kind(&mut self, id: VarId, kind: VarKind) {
        self.vars[id].kind = kind;
    }

    /// Objective value at the point `x`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(x)
            .map(|(v, &xj)| v.obj * xj)
            .sum()
    }

    /// True if some integer variable still has `lower < upper`.
    pub fn has_free_integers(&self) -> bool {
        self.vars
            .iter()
            .any(|v| v.kind.is_integral() && v.lower < v.upper)
    }

    /// True if any variable carries an integrality mark at all.
    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.kind.is_integral())
    }

    /// Maximum absolute constraint violation and bound violation at `x`.
    pub fn max_violations(&self, x: &[f64]) -> PointViolations {
        let mut worst_con = 0.0f64;
        let mut worst_con_rel = 0.0f64;
        let mut worst_con_id = None;
        for (i, c) in self.cons.iter().enumerate() {
            let v = c.violation(x);
            let rel = v / (1.0 + c.rhs.abs());
            if v > worst_con {
                worst_con = v;
                worst_con_id = Some(i);
            }
            worst_con_rel = worst_con_rel.max(rel);
        }
        let mut worst_bound = 0.0f64;
        for (v, &xj) in self.vars.iter().zip(x) {
            let below = (v.lower - xj).max(0.0);
            let above = (xj - v.upper).max(0.0);
            worst_bound = worst_bound.max(below.max(above));
        }
        PointViolations {
            constraint_abs: worst_con,
            constraint_rel: worst_con_rel,
            bound_abs: worst_bound,
            worst_constraint: worst_con_id,
        }
    }

    /// Constraints violated at `x` beyond `abs_tol`, worst first.
    pub fn violated_cons(&self, x: &[f64], abs_tol: f64) -> Vec<(ConId, f64)> {
        let mut out: Vec<(ConId, f64)> = self
            .cons
            .iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let v = c.violation(x);
                (v > abs_tol).then_some((i, v))
            })
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Largest distance of an integer-marked variable from integrality at `x`.
    pub fn max_integrality_violation(&self, x: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(x)
            .filter(|(v, _)| v.kind.is_integral())
            .map(|(_, &xj)| (xj - xj.round()).abs())
            .fold(0.0, f64::max)
    }
}

/// Result of checking a candidate point against a problem.
#[derive(Debug, Clone, Copy)]
pub struct PointViolations {
    pub constraint_abs: f64,
    pub constraint_rel: f64,
    pub bound_abs: f64,
    pub worst_constraint: Option<ConId>,
}
