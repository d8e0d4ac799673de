//! Branch-and-bound checked against brute-force enumeration.

use lpkit::{solve_lp_bounded, solve_milp, LpStatus, MilpStatus, Problem, Sense, SolverConfig, VarKind};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn knapsack_8_items_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for round in 0..10 {
        let n = 8;
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(1..=20) as f64).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(1..=15) as f64).collect();
        let capacity = weights.iter().sum::<f64>() * 0.5;

        let mut p = Problem::new("knapsack");
        let vars: Vec<_> = (0..n)
            .map(|j| p.add_var(format!("x{j}"), 0.0, 1.0, VarKind::Binary, -values[j]))
            .collect();
        p.add_con(
            "cap",
            vars.iter().zip(&weights).map(|(&v, &w)| (v, w)).collect(),
            Sense::Le,
            capacity,
        )
        .unwrap();

        let sol = solve_milp(&p, &SolverConfig::default()).unwrap();
        assert!(sol.is_success(), "round {round}: {:?}", sol.status);

        // All 2^8 subsets.
        let mut best = 0.0f64;
        for mask in 0u32..(1 << n) {
            let w: f64 = (0..n)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| weights[j])
                .sum();
            if w <= capacity {
                let v: f64 = (0..n)
                    .filter(|j| mask & (1 << j) != 0)
                    .map(|j| values[j])
                    .sum();
                best = best.max(v);
            }
        }
        assert!(
            (sol.objective + best).abs() <= 1e-9 * (1.0 + best),
            "round {round}: milp {} vs enumeration {}",
            sol.objective,
            -best
        );
    }
}

/// Mixed problems: enumerate all integer assignments, solve the continuous
/// remainder as an LP with the integers pinned.
#[test]
fn mixed_integer_matches_pinned_lp_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut nontrivial = 0;
    for round in 0..8 {
        let mut p = Problem::new("mixed");
        let a = p.add_var("a", 0.0, 3.0, VarKind::Integer, rng.random_range(-4..=-1) as f64);
        let b = p.add_var("b", 0.0, 2.0, VarKind::Integer, rng.random_range(-4..=-1) as f64);
        let x = p.add_var("x", 0.0, 10.0, VarKind::Continuous, 1.0);
        let y = p.add_var("y", 0.0, 10.0, VarKind::Continuous, -2.0);
        p.add_con(
            "c1",
            vec![(a, 2.0), (b, 1.0), (x, -1.0), (y, 1.0)],
            Sense::Le,
            rng.random_range(3..=8) as f64,
        )
        .unwrap();
        p.add_con("c2", vec![(a, 1.0), (y, 2.0)], Sense::Le, 9.0).unwrap();

        let sol = solve_milp(&p, &SolverConfig::default()).unwrap();
        assert!(sol.is_success(), "round {round}");

        let lb: Vec<f64> = p.vars().iter().map(|v| v.lower).collect();
        let ub: Vec<f64> = p.vars().iter().map(|v| v.upper).collect();
        let mut best = f64::INFINITY;
        for av in 0..=3 {
            for bv in 0..=2 {
                let mut l = lb.clone();
                let mut u = ub.clone();
                l[a] = av as f64;
                u[a] = av as f64;
                l[b] = bv as f64;
                u[b] = bv as f64;
                let r = solve_lp_bounded(&p, Some((&l, &u)), 0).unwrap();
                if r.status == LpStatus::Optimal {
                    best = best.min(r.objective);
                }
            }
        }
        assert!(
            (sol.objective - best).abs() <= 1e-8 * (1.0 + best.abs()),
            "round {round}: milp {} vs enumeration {}",
            sol.objective,
            best
        );
        if best.abs() > 1e-9 {
            nontrivial += 1;
        }
    }
    assert!(nontrivial >= 4);
}

#[test]
fn node_limit_reports_incumbent() {
    // A knapsack large enough to need several nodes.
    let mut p = Problem::new("limited");
    let weights = [3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0];
    for (j, w) in weights.iter().enumerate() {
        p.add_var(format!("x{j}"), 0.0, 1.0, VarKind::Binary, -(w + 0.5));
    }
    p.add_con(
        "cap",
        weights.iter().enumerate().map(|(j, &w)| (j, w)).collect(),
        Sense::Le,
        40.0,
    )
    .unwrap();
    let cfg = SolverConfig {
        node_limit: 2,
        ..SolverConfig::default()
    };
    let sol = solve_milp(&p, &cfg).unwrap();
    assert_eq!(sol.status, MilpStatus::NodeLimit);
    assert!(sol.nodes <= 2);
}

#[test]
fn milp_without_integers_equals_lp() {
    let mut p = Problem::new("lp");
    let x = p.add_var("x", 0.0, f64::INFINITY, VarKind::Continuous, 2.0);
    p.add_con("c", vec![(x, 1.0)], Sense::Ge, 4.5).unwrap();
    let milp = solve_milp(&p, &SolverConfig::default()).unwrap();
    let lp = lpkit::solve_lp(&p).unwrap();
    assert_eq!(milp.status, MilpStatus::Optimal);
    assert_eq!(milp.objective, lp.objective);
    assert_eq!(milp.x, lp.x);
}
