//! Desk-scale linear and mixed-integer linear programming.
//!
//! A bounded-variable two-phase primal simplex (sparse LU basis with
//! product-form updates, geometric-mean equilibration, Bland's rule fallback
//! on stalls) drives a deterministic best-bound branch-and-bound. Problems
//! and solutions interchange with external solvers through LP text files,
//! fixed MPS files, and `name value` solution listings.

mod branch;
mod error;
pub mod io;
mod lu;
mod problem;
mod scale;
mod simplex;
mod solution;

pub use branch::solve_milp;
pub use error::LpError;
pub use io::sol::{import_solution, write_solution, FeasTol};
pub use io::{export_problem, import_problem, FileFormat};
pub use problem::{ConId, Constraint, PointViolations, Problem, Sense, VarId, VarKind, Variable};
pub use simplex::{solve_lp, solve_lp_bounded};
pub use solution::{BranchRule, LpSolution, LpStatus, MilpSolution, MilpStatus, SolverConfig};
