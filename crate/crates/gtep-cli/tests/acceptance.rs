//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line. Run with `cargo test -p gtep-cli --test acceptance`.
//!
//! The pipeline criteria run on the bundled three-bus desk system with the
//! committed 14-day synthetic history. Seeds are fixed to a set on which the
//! two-stage clustering preconditions hold for every grid cell; stage-1
//! singletons are a documented hard error, not a fallback path.

use gtep::clustering::{
    mkm, stage_seed, tkm, to_representative_days, ClusterMethod, DEFAULT_MAX_ITER,
};
use gtep::evaluation::{exact_solution, percent_error, reprice_plan, run_pipeline, ExactResult};
use gtep::model::{
    build_chronological_model, build_representative_model, fix_investments, ExpansionPlan,
    PlanningModel, VarKey,
};
use gtep::system::{load_system, storage_investment_cost, BudgetMode, SystemData};
use gtep::timeseries::{
    build_day_observations, history_to_daily_profiles, load_hourly_csv, DailyProfiles,
    ObservationSet, HOURS,
};
use lpkit::{solve_milp, MilpSolution, SolverConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

const SEEDS: [u64; 5] = [1, 2, 3, 5, 9];

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../gtep/data")
        .join(file)
}

struct Fixture {
    system: SystemData,
    observations: ObservationSet,
    history: DailyProfiles,
    chrono: PlanningModel,
    exact: ExactResult,
}

fn fixture() -> &'static Fixture {
    static FIX: OnceLock<Fixture> = OnceLock::new();
    FIX.get_or_init(|| {
        let system = load_system(&data("desk3.toml")).unwrap();
        let (records, dropped) = load_hourly_csv(&data("desk_history_14d.csv")).unwrap();
        assert_eq!(dropped, 0);
        let observations = build_day_observations(&records);
        let history = history_to_daily_profiles(&records);
        let chrono = build_chronological_model(&system, &history).unwrap();
        let exact = exact_solution(&system, &history, &SolverConfig::default()).unwrap();
        assert!(exact.certified);
        Fixture {
            system,
            observations,
            history,
            chrono,
            exact,
        }
    })
}

fn solve(problem: &lpkit::Problem) -> MilpSolution {
    solve_milp(problem, &SolverConfig::default()).unwrap()
}

fn rows_of(data: &[Vec<f64>]) -> Vec<&[f64]> {
    data.iter().map(Vec::as_slice).collect()
}

/// Criterion 1: clustering property suite over 200 randomized instances.
#[test]
fn acceptance_01_clustering_properties() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut mkm_checked = 0usize;
    for inst in 0..200 {
        let n = rng.random_range(4..=40);
        let dim = rng.random_range(1..=8);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let data = rows_of(&points);

        let k = rng.random_range(1..=n.min(10));
        let result = tkm(&data, k, inst as u64, DEFAULT_MAX_ITER).unwrap();
        for w in result.sse_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "instance {inst}: SSE trace rose {w:?}");
        }
        assert_eq!(result.counts.iter().sum::<usize>(), n);
        assert!(result.counts.iter().all(|&c| c > 0));
        // Terminal centroids are member means.
        for c in 0..k {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&result.assignment)
                .filter(|(_, &a)| a == c)
                .map(|(p, _)| p)
                .collect();
            for d in 0..dim {
                let mean = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                assert!(
                    (result.centroids[c][d] - mean).abs() <= 1e-9,
                    "instance {inst}: centroid drifted from member mean"
                );
            }
        }

        let k1 = rng.random_range(1..=3.min(n / 2));
        let k2 = rng.random_range(1..=2);
        match mkm(&data, k1, k2, inst as u64) {
            Ok(m) => {
                assert_eq!(m.centroids.len(), k1 * k2, "instance {inst}");
                assert_eq!(m.counts.iter().sum::<usize>(), n, "instance {inst}");
                mkm_checked += 1;
            }
            Err(gtep::GtepError::SubClusterTooSmall { cluster, size, k2 }) => {
                // The precondition genuinely failed; confirm against the
                // stage-1 run it is derived from.
                let stage1 = tkm(&data, k1, inst as u64, DEFAULT_MAX_ITER).unwrap();
                assert_eq!(stage1.counts[cluster], size);
                assert!(size < k2);
            }
            Err(e) => panic!("instance {inst}: unexpected error {e}"),
        }
    }
    let elapsed = started.elapsed();
    assert!(mkm_checked >= 150, "only {mkm_checked} feasible two-stage runs");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 01 PASS: 200 instances, {mkm_checked} two-stage runs, {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: degenerate two-stage runs equal the plain method exactly.
#[test]
fn acceptance_02_degenerate_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let points: Vec<Vec<f64>> = (0..30)
        .map(|_| (0..5).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let data = rows_of(&points);
    for seed in 0..20u64 {
        let a = mkm(&data, 1, 6, seed).unwrap();
        let b = tkm(&data, 6, stage_seed(seed, 0), DEFAULT_MAX_ITER).unwrap();
        assert_eq!(a.assignment, b.assignment, "k1=1 seed {seed}");

        let c = mkm(&data, 6, 1, seed).unwrap();
        let d = tkm(&data, 6, seed, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(c.assignment, d.assignment, "k2=1 seed {seed}");
    }
    println!("criterion 02 PASS: both degenerate equivalences exact over 20 seeds");
}

fn desk_two_repdays() -> gtep::clustering::RepresentativeDaySet {
    let f = fixture();
    let clusters = tkm(&f.observations.vectors(), 2, 1, DEFAULT_MAX_ITER).unwrap();
    to_representative_days(&clusters, &f.observations, ClusterMethod::Tkm { k: 2 })
}

/// Criterion 3: branch-and-bound equals brute-force investment enumeration.
#[test]
fn acceptance_03_milp_oracle_equivalence() {
    let started = Instant::now();
    let f = fixture();
    let repdays = desk_two_repdays();
    let model = build_representative_model(&f.system, &repdays).unwrap();
    let milp = solve(&model.problem);
    assert!(milp.is_success());

    let line_ids: Vec<String> = f
        .system
        .candidate_lines()
        .map(|(_, l)| l.id.clone())
        .collect();
    let (sto_id, max_units) = f
        .system
        .candidate_storages()
        .map(|(_, s)| (s.id.clone(), s.candidate.as_ref().unwrap().max_units))
        .next()
        .unwrap();
    assert_eq!(line_ids.len(), 2);
    assert_eq!(max_units, 2);

    let mut best = f64::INFINITY;
    let mut combos = 0;
    for mask in 0..4u32 {
        for m in 0..=max_units {
            let plan = ExpansionPlan {
                line_built: line_ids
                    .iter()
                    .cloned()
                    .zip([(mask & 1) != 0, (mask & 2) != 0])
                    .collect(),
                storage_units: vec![(sto_id.clone(), m)],
                ..ExpansionPlan::default()
            };
            let pinned = fix_investments(&model, &f.system, &plan).unwrap();
            assert!(pinned.is_pure_lp());
            let sol = solve(&pinned.problem);
            if sol.is_success() {
                best = best.min(sol.objective);
            }
            combos += 1;
        }
    }
    assert_eq!(combos, 12);
    let rel = (milp.objective - best).abs() / (1.0 + best.abs());
    assert!(rel <= 1e-6, "milp {} vs enumeration {best}", milp.objective);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 03 PASS: objective {:.2} matches 12-combination enumeration ({:.1}s)",
        milp.objective,
        elapsed.as_secs_f64()
    );
}

/// Criterion 4: big-M candidate-line rows are exact against substitution.
#[test]
fn acceptance_04_linearization_exactness() {
    let f = fixture();
    let repdays = desk_two_repdays();
    let model = build_representative_model(&f.system, &repdays).unwrap();
    let line_ids: Vec<String> = f
        .system
        .candidate_lines()
        .map(|(_, l)| l.id.clone())
        .collect();

    for mask in 0..4u32 {
        let choice = [(mask & 1) != 0, (mask & 2) != 0];
        let plan = ExpansionPlan {
            line_built: line_ids.iter().cloned().zip(choice).collect(),
            ..ExpansionPlan::default()
        };
        let pinned = fix_investments(&model, &f.system, &plan).unwrap();
        let a = solve(&pinned.problem);

        // Direct substitution: built lines become existing, unbuilt vanish;
        // the budget absorbs the committed spend and the annualized cost is
        // added back for comparison.
        let mut sub = f.system.clone();
        let mut committed_full = 0.0;
        let mut committed_ann = 0.0;
        let mut keep = Vec::new();
        let mut c = 0usize;
        for line in &sub.lines {
            match &line.investment {
                None => keep.push(line.clone()),
                Some(inv) => {
                    if choice[c] {
                        let mut built = line.clone();
                        built.investment = None;
                        committed_full += inv.full;
                        committed_ann += inv.annualized;
                        keep.push(built);
                    }
                    c += 1;
                }
            }
        }
        sub.lines = keep;
        if let BudgetMode::Total(t) = sub.budget {
            sub.budget = BudgetMode::Total(t - committed_full);
        }
        let sub_model = build_representative_model(&sub, &repdays).unwrap();
        let b = solve(&sub_model.problem);

        assert!(a.is_success() && b.is_success(), "mask {mask}");
        let b_total = b.objective + committed_ann;
        let rel = (a.objective - b_total).abs() / (1.0 + b_total.abs());
        assert!(rel <= 1e-6, "mask {mask}: {} vs {}", a.objective, b_total);
    }
    println!("criterion 04 PASS: big-M optimum equals substitution for all 4 line assignments");
}

/// Criterion 5: storage recursion arithmetic reproduces hand values.
#[test]
fn acceptance_05_storage_arithmetic() {
    let f = fixture();
    // Build over two history days so both the within-day recursion and the
    // day link are exercised on the real desk model.
    let two_days = DailyProfiles {
        load_zones: f.history.load_zones.clone(),
        wind_zones: f.history.wind_zones.clone(),
        days: f.history.days[0..2].to_vec(),
    };
    let model = build_chronological_model(&f.system, &two_days).unwrap();
    let mut problem = model.problem.clone();

    // Storage s1 (eta = 0.9): charge 10 MW in day-1 hours 1-2, idle until the
    // last hour of day 1 where we charge 10 MW again, discharge 9 MW in
    // day-2 hour 1. Every other storage move is pinned to zero.
    for r in 0..2 {
        for h in 0..HOURS {
            let pc = model.var(VarKey::Charge { s: 0, r, h });
            let pd = model.var(VarKey::Discharge { s: 0, r, h });
            let (c, d) = match (r, h) {
                (0, 0) | (0, 1) => (0.1, 0.0),
                (0, 23) => (0.1, 0.0),
                (1, 0) => (0.0, 0.09),
                _ => (0.0, 0.0),
            };
            problem.set_bounds(pc, c, c);
            problem.set_bounds(pd, d, d);
        }
    }
    // The plan must include the storage for it to operate.
    let units = model.var(VarKey::StorageUnits { s: 0 });
    problem.set_bounds(units, 1.0, 1.0);

    let sol = solve(&problem);
    assert!(sol.is_success());
    let e = |r: usize, h: usize| sol.x[model.var(VarKey::Energy { s: 0, r, h })] * 100.0;
    // Charge 10 MW from empty -> 9 MWh; again -> 18; flat until hour 23;
    // +9 at the day boundary hour; discharge 9 MW drains 10 MWh.
    assert!((e(0, 0) - 9.0).abs() <= 1e-9, "{}", e(0, 0));
    assert!((e(0, 1) - 18.0).abs() <= 1e-9, "{}", e(0, 1));
    assert!((e(0, 22) - 18.0).abs() <= 1e-9, "{}", e(0, 22));
    assert!((e(0, 23) - 27.0).abs() <= 1e-9, "{}", e(0, 23));
    assert!((e(1, 0) - 17.0).abs() <= 1e-9, "{}", e(1, 0));
    println!("criterion 05 PASS: recursion and day-link arithmetic exact at eta = 0.9");
}

/// Criterion 6: the storage cost rule reproduces the bundled unit costs.
#[test]
fn acceptance_06_storage_cost_rule() {
    let cases = [
        (250.0, 125.0, 14_000_000.0),
        (200.0, 100.0, 11_200_000.0),
        (300.0, 150.0, 16_800_000.0),
        (400.0, 200.0, 22_400_000.0),
    ];
    for (e, p, annualized) in cases {
        let got = storage_investment_cost(e, p) * 0.1;
        let rel = (got - annualized).abs() / annualized;
        assert!(rel <= 1e-9, "({e}, {p}): {got} vs {annualized}");
    }
    println!("criterion 06 PASS: all four bundled storage unit costs reproduced");
}

/// Criterion 7: pipeline sanity on the desk system.
#[test]
fn acceptance_07_pipeline_sanity() {
    let f = fixture();
    let cfg = SolverConfig::default();
    let mut rows = 0;
    for k in [2usize, 4, 7] {
        for method in [ClusterMethod::Tkm { k }, ClusterMethod::mkm_for_k(k)] {
            for seed in SEEDS {
                let row = run_pipeline(
                    &f.system,
                    &f.observations,
                    &f.chrono,
                    method,
                    seed,
                    &f.exact,
                    &cfg,
                )
                .unwrap();
                assert!(row.eps_ct >= 0.0);
                // The signed property behind it: a fixed plan can never
                // price below the full-horizon optimum.
                assert!(
                    row.ct_k >= f.exact.total_cost - 1e-6 * f.exact.total_cost,
                    "{} {k} seed {seed}: {} < exact {}",
                    method.label(),
                    row.ct_k,
                    f.exact.total_cost
                );
                rows += 1;
            }
        }
    }
    assert_eq!(rows, 30);

    // Injecting the exact plan reproduces the exact cost.
    let (ct, _) = reprice_plan(&f.chrono, &f.system, &f.exact.plan, &cfg).unwrap();
    let eps = percent_error(ct, f.exact.total_cost).unwrap();
    assert!(eps <= 1e-9, "injected exact plan gives eps {eps}");
    println!("criterion 07 PASS: 30 rows nonnegative, injected exact plan eps {eps:.2e}");
}

/// Criterion 8: the two-stage method matches or beats the plain method at
/// matched K (one exception permitted across the grid).
#[test]
fn acceptance_08_method_comparison_trend() {
    let f = fixture();
    let cfg = SolverConfig::default();
    let mut violations = 0;
    let mut summary = Vec::new();
    for k in [4usize, 8] {
        let med = |method: ClusterMethod| -> f64 {
            let mut eps: Vec<f64> = SEEDS
                .iter()
                .map(|&seed| {
                    run_pipeline(
                        &f.system,
                        &f.observations,
                        &f.chrono,
                        method,
                        seed,
                        &f.exact,
                        &cfg,
                    )
                    .unwrap()
                    .eps_ct
                })
                .collect();
            eps.sort_by(f64::total_cmp);
            eps[eps.len() / 2]
        };
        let tkm_med = med(ClusterMethod::Tkm { k });
        let mkm_med = med(ClusterMethod::mkm_for_k(k));
        summary.push(format!("K={k}: tkm {tkm_med:.4}% mkm {mkm_med:.4}%"));
        if mkm_med > tkm_med + 1e-12 {
            violations += 1;
        }
    }
    println!("criterion 08 medians: {}", summary.join("; "));
    assert!(violations <= 1, "trend violated at {violations} of 2 grid points");
    println!("criterion 08 PASS: {violations} of 2 grid points above the plain method");
}

/// Criterion 9: LP/MPS round trips and the canonical golden files.
#[test]
fn acceptance_09_file_round_trips() {
    use lpkit::{export_problem, import_problem, FileFormat, Problem, Sense, VarKind};
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let cfg = SolverConfig::default();
    let mut solved = 0;
    for inst in 0..20 {
        let n = rng.random_range(3..=7);
        let m = rng.random_range(2..=5);
        let mut p = Problem::new("rt");
        for j in 0..n {
            let kind = match rng.random_range(0..3) {
                0 => VarKind::Integer,
                1 => VarKind::Binary,
                _ => VarKind::Continuous,
            };
            let (lo, hi) = match kind {
                VarKind::Binary => (0.0, 1.0),
                _ => {
                    let lo = rng.random_range(-2..=0) as f64;
                    (lo, lo + rng.random_range(1..=5) as f64)
                }
            };
            p.add_var(format!("x{j}"), lo, hi, kind, rng.random_range(-6..=6) as f64);
        }
        for i in 0..m {
            let terms: Vec<(usize, f64)> = (0..n)
                .filter_map(|j| {
                    let a = rng.random_range(-4..=4) as f64;
                    (a != 0.0).then_some((j, a))
                })
                .collect();
            p.add_con(format!("c{i}"), terms, Sense::Le, rng.random_range(2..=12) as f64)
                .unwrap();
        }
        let original = solve_milp(&p, &cfg).unwrap();
        for (fmt, ext) in [(FileFormat::LpText, "lp"), (FileFormat::Mps, "mps")] {
            let path = dir.path().join(format!("i{inst}.{ext}"));
            export_problem(&p, &path, fmt).unwrap();
            let q = import_problem(&path, fmt).unwrap();
            let again = solve_milp(&q, &cfg).unwrap();
            assert_eq!(again.status, original.status, "instance {inst} {ext}");
            if original.is_success() {
                let rel = (again.objective - original.objective).abs()
                    / (1.0 + original.objective.abs());
                assert!(rel <= 1e-9, "instance {inst} {ext}: rel {rel}");
            }
        }
        if original.is_success() {
            solved += 1;
        }
    }
    assert!(solved >= 10);

    // Golden byte equality for the canonical two-variable example.
    let mut p = Problem::new("sample");
    let x = p.add_var("x", 0.0, 4.0, VarKind::Continuous, 1.0);
    let y = p.add_var("y", 0.0, f64::INFINITY, VarKind::Continuous, 0.25);
    p.add_con("cap", vec![(x, 1.0), (y, 2.0)], Sense::Le, 10.0).unwrap();
    p.add_con("low", vec![(x, 1.0), (y, -1.0)], Sense::Ge, 0.5).unwrap();
    let lp_path = dir.path().join("golden.lp");
    export_problem(&p, &lp_path, FileFormat::LpText).unwrap();
    let golden = include_bytes!("../../lpkit/tests/data/golden_two_var.lp");
    assert_eq!(std::fs::read(&lp_path).unwrap(), golden);
    println!("criterion 09 PASS: 20 instances round-tripped in both formats, golden bytes equal");
}

/// Criterion 10: rerunning a command from its manifest is byte-identical.
#[test]
fn acceptance_10_manifest_determinism() {
    let f = fixture();
    let _ = f; // fixture warms nothing here; the binary runs standalone
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_gtep");
    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin)
            .args(args)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "gtep {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let system = data("desk3.toml");
    let history = data("desk_history_14d.csv");
    run(&[
        "evaluate",
        "--system",
        system.to_str().unwrap(),
        "--history",
        history.to_str().unwrap(),
        "--k-grid",
        "2",
        "--methods",
        "tkm",
        "--seed-list",
        "1,2",
        "--out",
        "first",
    ]);
    run(&[
        "rerun",
        "--manifest",
        dir.path().join("first/manifest.toml").to_str().unwrap(),
        "--out",
        dir.path().join("second").to_str().unwrap(),
    ]);
    for file in [
        "table.csv",
        "rows.csv",
        "cost_vs_k.csv",
        "error_vs_k.csv",
        "time_vs_k.csv",
        "exact.csv",
    ] {
        let a = std::fs::read(dir.path().join("first").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("second").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between run and rerun");
    }
    // The cluster command is deterministic outright.
    run(&[
        "cluster", "--in", history.to_str().unwrap(), "--method", "tkm", "--k", "3", "--seed",
        "7", "--out", "c1",
    ]);
    run(&[
        "cluster", "--in", history.to_str().unwrap(), "--method", "tkm", "--k", "3", "--seed",
        "7", "--out", "c2",
    ]);
    let a = std::fs::read(dir.path().join("c1/repdays.csv")).unwrap();
    let b = std::fs::read(dir.path().join("c2/repdays.csv")).unwrap();
    assert_eq!(a, b);
    println!("criterion 10 PASS: evaluate rerun and repeated cluster runs byte-identical");
}
