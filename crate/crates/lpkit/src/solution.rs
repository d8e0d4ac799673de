//! Solution records and solver configuration.

use std::time::Duration;

/// Outcome of a pure LP solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values, one per problem variable. Empty unless `Optimal` or
    /// `IterationLimit` (best point found).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Objective value implied by the duals; equals `objective` at an optimum.
    pub dual_objective: f64,
    pub max_residual: f64,
    pub max_bound_violation: f64,
    pub iterations: usize,
}

/// Outcome of a branch-and-bound solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Search tree exhausted; incumbent proven optimal.
    Optimal,
    Infeasible,
    /// Stopped early because the relative gap fell below the tolerance.
    GapLimit,
    /// Node or time limit hit; best incumbent and bound reported.
    NodeLimit,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent point (empty when `Infeasible`).
    pub x: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    /// `(objective - best_bound) / max(1, |objective|)`.
    pub gap: f64,
    pub nodes: usize,
    pub wall: Duration,
}

impl MilpSolution {
    pub fn is_success(&self) -> bool {
        matches!(self.status, MilpStatus::Optimal | MilpStatus::GapLimit)
    }
}

/// How the fractional variable to branch on is chosen. Ties always break on
/// the lowest variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// The variable farthest from an integer value.
    #[default]
    MostFractional,
    /// The first fractional variable by index.
    LowestIndex,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Distance from integrality accepted as integral.
    pub int_tol: f64,
    /// Relative gap at which the search stops.
    pub rel_gap: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    /// Simplex iteration cap per LP solve; 0 means automatic.
    pub iteration_limit: usize,
    pub branch_rule: BranchRule,
    /// Carried for reproducibility records; the search itself is deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            int_tol: 1e-6,
            rel_gap: 1e-6,
            node_limit: 100_000,
            time_limit: None,
            iteration_limit: 0,
            branch_rule: BranchRule::default(),
            seed: 0,
        }
    }
}
