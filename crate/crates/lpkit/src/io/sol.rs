//! Solution files: one `name value` pair per line, `#` comments.

use crate::error::LpError;
use crate::io::{fmt_f64, name_index};
use crate::problem::Problem;
use crate::solution::{MilpSolution, MilpStatus};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

/// Acceptance tolerances for externally produced points.
#[derive(Debug, Clone, Copy)]
pub struct FeasTol {
    pub rel: f64,
    pub abs: f64,
    pub int: f64,
}

impl Default for FeasTol {
    fn default() -> Self {
        FeasTol {
            rel: 1e-6,
            abs: 1e-4,
            int: 1e-6,
        }
    }
}

pub fn write_solution(
    problem: &Problem,
    x: &[f64],
    objective: f64,
    path: &Path,
) -> Result<(), LpError> {
    let mut out = String::new();
    let _ = writeln!(out, "# problem {}", problem.name);
    let _ = writeln!(out, "# objective {}", fmt_f64(objective));
    for (v, &xj) in problem.vars().iter().zip(x) {
        let _ = writeln!(out, "{} {}", v.name, fmt_f64(xj));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a point and validate it against `problem` before accepting it.
///
/// Rejections name the offending variable, or the three worst-violated
/// constraints when the point is infeasible.
pub fn import_solution(
    problem: &Problem,
    path: &Path,
    tol: FeasTol,
) -> Result<MilpSolution, LpError> {
    let text = std::fs::read_to_string(path)?;
    let names = name_index(problem)?;
    let mut x = vec![f64::NAN; problem.num_vars()];

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (name, value) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(v), None) => (n, v),
            _ => {
                return Err(LpError::Parse {
                    line: lineno + 1,
                    message: "expected `name value`".into(),
                })
            }
        };
        let &j = names.get(name).ok_or_else(|| {
            LpError::SolutionFile(format!("value for unknown variable `{name}`"))
        })?;
        x[j] = value.parse::<f64>().map_err(|_| LpError::Parse {
            line: lineno + 1,
            message: format!("bad number `{value}`"),
        })?;
    }

    for (j, &v) in x.iter().enumerate() {
        if v.is_nan() {
            return Err(LpError::SolutionFile(format!(
                "missing value for variable `{}`",
                problem.var(j).name
            )));
        }
    }

    // Bounds and integrality first, then constraints.
    for (j, v) in problem.vars().iter().enumerate() {
        if x[j] < v.lower - tol.abs || x[j] > v.upper + tol.abs {
            return Err(LpError::InfeasiblePoint {
                reason: format!("variable `{}` violates its bounds", v.name),
                details: format!("value {} outside [{}, {}]", x[j], v.lower, v.upper),
            });
        }
        if v.kind.is_integral() && (x[j] - x[j].round()).abs() > tol.int {
            return Err(LpError::InfeasiblePoint {
                reason: format!("variable `{}` violates integrality", v.name),
                details: format!("value {}", x[j]),
            });
        }
    }
    let violated = problem.violated_cons(&x, tol.abs);
    let bad: Vec<&(usize, f64)> = violated
        .iter()
        .filter(|&&(i, v)| v / (1.0 + problem.con(i).rhs.abs()) > tol.rel)
        .collect();
    if !bad.is_empty() {
        let details = bad
            .iter()
            .take(3)
            .map(|&&(i, v)| format!("{} by {:.6e}", problem.con(i).name, v))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(LpError::InfeasiblePoint {
            reason: format!("{} violated constraints", bad.len()),
            details,
        });
    }

    let objective = problem.objective_value(&x);
    Ok(MilpSolution {
        status: MilpStatus::Optimal,
        x,
        objective,
        best_bound: objective,
        gap: 0.0,
        nodes: 0,
        wall: Duration::ZERO,
    })
}
