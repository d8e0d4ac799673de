//! Branch-and-bound over the simplex relaxation.
//!
//! Node selection is best-bound, branching picks the most fractional integer
//! variable, and every tie breaks on the lowest index, so a given problem
//! always explores the identical tree.

use crate::error::LpError;
use crate::problem::Problem;
use crate::simplex::solve_lp_bounded;
use crate::solution::{BranchRule, LpStatus, MilpSolution, MilpStatus, SolverConfig};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

struct Node {
    /// Bound change relative to the parent: (var, lower, upper).
    change: Option<(usize, f64, f64)>,
    parent: Option<usize>,
    depth: usize,
}

/// Heap entry ordered so the smallest bound pops first. Bound ties prefer
/// the deeper node, which dives toward an early incumbent inside the
/// equal-bound plateaus that relaxations produce; remaining ties go to the
/// older node id, keeping the search deterministic.
struct HeapEntry {
    bound: f64,
    depth: usize,
    id: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed where needed: BinaryHeap is a max-heap.
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

pub fn solve_milp(problem: &Problem, config: &SolverConfig) -> Result<MilpSolution, LpError> {
    let started = Instant::now();
    let n = problem.num_vars();
    let int_vars: Vec<usize> = (0..n)
        .filter(|&j| problem.var(j).kind.is_integral())
        .collect();

    let base_lb: Vec<f64> = problem.vars().iter().map(|v| v.lower).collect();
    let base_ub: Vec<f64> = problem.vars().iter().map(|v| v.upper).collect();

    let mut nodes: Vec<Node> = vec![Node {
        change: None,
        parent: None,
        depth: 0,
    }];
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        bound: f64::NEG_INFINITY,
        depth: 0,
        id: 0,
    });
    // Until a first incumbent exists, children go on this stack and the
    // search dives depth-first (preferred branch first); afterwards the
    // stack drains into the heap and selection is pure best-bound.
    let mut dive_stack: Vec<HeapEntry> = Vec::new();

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut explored = 0usize;
    let mut lb = vec![0.0; n];
    let mut ub = vec![0.0; n];

    let finish = |status: MilpStatus,
                  incumbent: Option<(f64, Vec<f64>)>,
                  best_bound: f64,
                  explored: usize,
                  started: Instant| {
        let (objective, x) = match incumbent {
            Some((o, x)) => (o, x),
            None => (f64::NAN, Vec::new()),
        };
        let gap = if x.is_empty() {
            f64::NAN
        } else {
            ((objective - best_bound) / objective.abs().max(1.0)).max(0.0)
        };
        MilpSolution {
            status,
            x,
            objective,
            best_bound,
            gap,
            nodes: explored,
            wall: started.elapsed(),
        }
    };

    loop {
        // Once an incumbent exists the dive is over.
        if incumbent.is_some() && !dive_stack.is_empty() {
            heap.extend(dive_stack.drain(..));
        }
        let from_stack = incumbent.is_none() && !dive_stack.is_empty();
        let Some(entry) = (if from_stack {
            dive_stack.pop()
        } else {
            heap.pop()
        }) else {
            break;
        };
        // Prune against the incumbent using the configured relative gap.
        if let Some((inc_obj, _)) = &incumbent {
            let slack = config.rel_gap * inc_obj.abs().max(1.0);
            if entry.bound >= inc_obj - slack && entry.bound.is_finite() {
                // Best-bound order: everything left is within the gap.
                let best_bound = entry.bound.min(*inc_obj);
                return Ok(finish(
                    MilpStatus::GapLimit,
                    incumbent,
                    best_bound,
                    explored,
                    started,
                ));
            }
        }

        let hit_nodes = explored >= config.node_limit;
        let hit_time = config
            .time_limit
            .is_some_and(|limit| started.elapsed() > limit);
        if hit_nodes || hit_time {
            // The popped entry may come from the dive stack, so the honest
            // remaining bound is the minimum over every open node.
            let mut best_bound = entry.bound;
            if let Some(top) = heap.peek() {
                best_bound = best_bound.min(top.bound);
            }
            for e in &dive_stack {
                best_bound = best_bound.min(e.bound);
            }
            return Ok(finish(
                MilpStatus::NodeLimit,
                incumbent,
                best_bound,
                explored,
                started,
            ));
        }

        // Reconstruct this node's bounds by walking its ancestry.
        lb.copy_from_slice(&base_lb);
        ub.copy_from_slice(&base_ub);
        let mut cursor = Some(entry.id);
        while let Some(id) = cursor {
            let node = &nodes[id];
            if let Some((j, lo, hi)) = node.change {
                lb[j] = lb[j].max(lo);
                ub[j] = ub[j].min(hi);
            }
            cursor = node.parent;
        }

        explored += 1;
        let relax = solve_lp_bounded(problem, Some((&lb, &ub)), config.iteration_limit)?;
        match relax.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(LpError::Unbounded),
            LpStatus::IterationLimit => {
                return Err(LpError::IterationLimit {
                    iterations: relax.iterations,
                })
            }
            LpStatus::Optimal => {}
        }
        let bound = relax.objective;
        if let Some((inc_obj, _)) = &incumbent {
            let slack = config.rel_gap * inc_obj.abs().max(1.0);
            if bound >= inc_obj - slack {
                continue;
            }
        }

        // Branching variable per the configured rule, ties on lowest index.
        let mut branch: Option<(usize, f64, f64)> = None;
        for &j in &int_vars {
            let v = relax.x[j];
            let frac = (v - v.round()).abs();
            if frac > config.int_tol {
                match config.branch_rule {
                    BranchRule::LowestIndex => {
                        branch = Some((j, v, frac));
                        break;
                    }
                    BranchRule::MostFractional => {
                        let score = (v - v.floor()).min(v.ceil() - v);
                        match branch {
                            Some((_, _, s)) if s >= score => {}
                            _ => branch = Some((j, v, score)),
                        }
                    }
                }
            }
        }

        match branch {
            None => {
                // Integer feasible; monotone incumbent update.
                let better = match &incumbent {
                    None => true,
                    Some((inc_obj, _)) => bound < *inc_obj,
                };
                if better {
                    incumbent = Some((bound, relax.x.clone()));
                }
            }
            Some((j, v, _)) => {
                let depth = nodes[entry.id].depth + 1;
                let down = (nodes.len(), v.floor());
                nodes.push(Node {
                    change: Some((j, f64::NEG_INFINITY, down.1)),
                    parent: Some(entry.id),
                    depth,
                });
                let up = (nodes.len(), v.ceil());
                nodes.push(Node {
                    change: Some((j, up.1, f64::INFINITY)),
                    parent: Some(entry.id),
                    depth,
                });
                // Children only if their bound boxes stay consistent.
                let down_ok = ub[j].min(down.1) >= lb[j];
                let up_ok = lb[j].max(up.1) <= ub[j];
                let down_entry = HeapEntry {
                    bound,
                    depth,
                    id: down.0,
                };
                let up_entry = HeapEntry {
                    bound,
                    depth,
                    id: up.0,
                };
                if incumbent.is_none() {
                    // Dive: push the branch nearer the relaxation value last
                    // so it pops first.
                    let down_preferred = v - v.floor() <= 0.5;
                    let (first, first_ok, second, second_ok) = if down_preferred {
                        (up_entry, up_ok, down_entry, down_ok)
                    } else {
                        (down_entry, down_ok, up_entry, up_ok)
                    };
                    if first_ok {
                        dive_stack.push(first);
                    }
                    if second_ok {
                        dive_stack.push(second);
                    }
                } else {
                    if down_ok {
                        heap.push(down_entry);
                    }
                    if up_ok {
                        heap.push(up_entry);
                    }
                }
            }
        }
    }

    match incumbent {
        Some((obj, x)) => Ok(MilpSolution {
            status: MilpStatus::Optimal,
            best_bound: obj,
            gap: 0.0,
            objective: obj,
            x,
            nodes: explored,
            wall: started.elapsed(),
        }),
        None => Ok(MilpSolution {
            status: MilpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
            best_bound: f64::INFINITY,
            gap: f64::NAN,
            nodes: explored,
            wall: started.elapsed(),
        }),
    }
}
