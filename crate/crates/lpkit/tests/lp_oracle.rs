//! Random LPs checked against an independent vertex-enumeration oracle.
//!
//! Each instance is converted to standard equality form (shift to zero lower
//! bounds, slack per inequality, explicit upper-bound rows) and every basis
//! subset is enumerated with dense Gaussian elimination. The best feasible
//! vertex objective must match the simplex within 1e-8.

use lpkit::{solve_lp, LpStatus, Problem, Sense, VarKind};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Dense Gaussian elimination solve; returns None when singular.
#[allow(clippy::needless_range_loop)]
fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut aug: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..m).collect();
    for k in 0..m {
        let (piv, best) = (k..m)
            .map(|i| (i, aug[i][k].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if best < 1e-10 {
            return None;
        }
        aug.swap(k, piv);
        rhs.swap(k, piv);
        perm.swap(k, piv);
        for i in k + 1..m {
            let f = aug[i][k] / aug[k][k];
            if f != 0.0 {
                for j in k..m {
                    aug[i][j] -= f * aug[k][j];
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let mut v = rhs[k];
        for j in k + 1..m {
            v -= aug[k][j] * x[j];
        }
        x[k] = v / aug[k][k];
    }
    Some(x)
}

/// Best vertex objective over all basis subsets, or None when infeasible.
fn vertex_enumeration(p: &Problem) -> Option<f64> {
    let n = p.num_vars();
    // Shifted variables y = x - l, then slacks, then upper-bound slacks.
    let shift: Vec<f64> = p.vars().iter().map(|v| v.lower).collect();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut ncols = n;

    // Constraint rows with slack columns appended on the fly.
    let mut slack_cols: Vec<(usize, usize, f64)> = Vec::new(); // (row, col, coef)
    for (i, c) in p.cons().iter().enumerate() {
        let mut coef = vec![0.0; n];
        let mut rhs = c.rhs;
        for &(j, a) in &c.terms {
            coef[j] = a;
            rhs -= a * shift[j];
        }
        match c.sense {
            Sense::Le => {
                slack_cols.push((i, ncols, 1.0));
                ncols += 1;
            }
            Sense::Ge => {
                slack_cols.push((i, ncols, -1.0));
                ncols += 1;
            }
            Sense::Eq => {}
        }
        rows.push((coef, rhs));
    }
    // Upper-bound rows y_j + t_j = u_j - l_j.
    for j in 0..n {
        let range = p.var(j).upper - p.var(j).lower;
        let mut coef = vec![0.0; n];
        coef[j] = 1.0;
        let i = rows.len();
        rows.push((coef, range));
        slack_cols.push((i, ncols, 1.0));
        ncols += 1;
    }

    let m = rows.len();
    // Dense column-major matrix of the full system.
    let mut cols: Vec<Vec<f64>> = vec![vec![0.0; m]; ncols];
    for (i, (coef, _)) in rows.iter().enumerate() {
        for (j, &a) in coef.iter().enumerate() {
            if a != 0.0 {
                cols[j][i] = a;
            }
        }
    }
    for &(i, jcol, a) in &slack_cols {
        cols[jcol][i] = a;
    }
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();

    // Enumerate every m-subset of columns as a candidate basis.
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        let a_basis: Vec<Vec<f64>> = (0..m)
            .map(|i| subset.iter().map(|&j| cols[j][i]).collect())
            .collect();
        if let Some(z) = dense_solve(&a_basis, &rhs) {
            if z.iter().all(|&v| v >= -1e-9) {
                let mut y = vec![0.0; n];
                for (k, &j) in subset.iter().enumerate() {
                    if j < n {
                        y[j] = z[k];
                    }
                }
                let obj: f64 = p
                    .vars()
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v.obj * (y[j] + shift[j]))
                    .sum();
                best = Some(match best {
                    Some(b) => b.min(obj),
                    None => obj,
                });
            }
        }
        // Next combination in lexicographic order.
        let mut k = m;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if subset[k] != ncols - m + k {
                subset[k] += 1;
                for t in k + 1..m {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.random_range(2..=5);
    let m = rng.random_range(1..=4);
    let mut p = Problem::new("rand");
    for j in 0..n {
        let lo = rng.random_range(-3..=0) as f64;
        let hi = lo + rng.random_range(1..=6) as f64;
        let obj = rng.random_range(-5..=5) as f64;
        p.add_var(format!("x{j}"), lo, hi, VarKind::Continuous, obj);
    }
    // Equality rows capped below n so the lifted standard form keeps at
    // least as many columns as rows and bases exist for the enumeration.
    let mut eq_left = n - 1;
    for i in 0..m {
        let terms: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| {
                let a = rng.random_range(-5..=5) as f64;
                (a != 0.0).then_some((j, a))
            })
            .collect();
        let sense = match rng.random_range(0..3) {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ if eq_left > 0 => {
                eq_left -= 1;
                Sense::Eq
            }
            _ => Sense::Le,
        };
        let rhs = rng.random_range(-8..=8) as f64;
        p.add_con(format!("c{i}"), terms, sense, rhs).unwrap();
    }
    p
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut optimal = 0;
    let mut infeasible = 0;
    for k in 0..40 {
        let p = random_instance(&mut rng);
        let sol = solve_lp(&p).unwrap();
        let oracle = vertex_enumeration(&p);
        match (sol.status, oracle) {
            (LpStatus::Optimal, Some(best)) => {
                optimal += 1;
                let diff = (sol.objective - best).abs();
                assert!(
                    diff <= 1e-8 * (1.0 + best.abs()),
                    "instance {k}: simplex {} vs oracle {best}",
                    sol.objective
                );
                // Weak duality must close at the optimum.
                assert!(
                    (sol.dual_objective - sol.objective).abs()
                        <= 1e-7 * (1.0 + sol.objective.abs()),
                    "instance {k}: dual {} vs primal {}",
                    sol.dual_objective,
                    sol.objective
                );
            }
            (LpStatus::Infeasible, None) => infeasible += 1,
            (status, oracle) => {
                panic!("instance {k}: simplex says {status:?}, oracle says {oracle:?}")
            }
        }
    }
    // The generator must exercise both outcomes for the test to mean much.
    assert!(optimal >= 10, "only {optimal} optimal instances");
    assert!(infeasible >= 3, "only {infeasible} infeasible instances");
}

/// Assignment LPs have integral vertices and are massively degenerate; the
/// optimum must match brute force over all permutations.
#[test]
fn assignment_lp_matches_permutation_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    for round in 0..5 {
        let n = 7usize;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(1..=50) as f64).collect())
            .collect();
        let mut p = Problem::new("assign");
        let mut vars = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                vars[i][j] = p.add_var(
                    format!("x{i}_{j}"),
                    0.0,
                    1.0,
                    VarKind::Continuous,
                    cost[i][j],
                );
            }
        }
        for i in 0..n {
            p.add_con(
                format!("row{i}"),
                (0..n).map(|j| (vars[i][j], 1.0)).collect(),
                Sense::Eq,
                1.0,
            )
            .unwrap();
            p.add_con(
                format!("col{i}"),
                (0..n).map(|j| (vars[j][i], 1.0)).collect(),
                Sense::Eq,
                1.0,
            )
            .unwrap();
        }
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "round {round}");

        // All n! assignments.
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        loop {
            let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            best = best.min(c);
            // Next lexicographic permutation.
            let Some(k) = (0..n - 1).rev().find(|&k| perm[k] < perm[k + 1]) else {
                break;
            };
            let l = (k + 1..n).rev().find(|&l| perm[l] > perm[k]).unwrap();
            perm.swap(k, l);
            perm[k + 1..].reverse();
        }
        assert!(
            (sol.objective - best).abs() <= 1e-8 * (1.0 + best),
            "round {round}: lp {} vs enumeration {best}",
            sol.objective
        );
        assert!(
            (sol.dual_objective - sol.objective).abs() <= 1e-7 * (1.0 + best),
            "round {round}: duality gap"
        );
    }
}

#[test]
fn free_variable_unconstrained_is_unbounded() {
    let mut p = Problem::new("t");
    p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous, 1.0);
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Unbounded);
}

#[test]
fn iteration_limit_is_flagged_not_silent() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let p = random_instance(&mut rng);
    match lpkit::solve_lp_bounded(&p, None, 1) {
        Err(lpkit::LpError::IterationLimit { .. }) => {}
        Ok(sol) => assert_eq!(
            sol.iterations, 0,
            "a solve that succeeds under a 1-iteration cap must be trivial"
        ),
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let p = random_instance(&mut rng);
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.x, b.x);
        assert!(a.objective == b.objective || (a.objective.is_nan() && b.objective.is_nan()));
    }
}
