//! The comparison experiment: exact full-horizon solve, clustered solves,
//! plan re-evaluation against the full history, and the report files.

use crate::clustering::{mkm, tkm, to_representative_days, ClusterMethod, DEFAULT_MAX_ITER};
use crate::error::GtepError;
use crate::model::{
    build_chronological_model, build_representative_model, extract_solution, fix_investments,
    ExpansionPlan, PlanningModel,
};
use crate::system::SystemData;
use crate::timeseries::{DailyProfiles, ObservationSet};
use lpkit::{solve_milp, MilpStatus, SolverConfig};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct ExactResult {
    /// CT of the full-horizon optimum, $.
    pub total_cost: f64,
    pub plan: ExpansionPlan,
    /// Unserved fraction of total demand energy.
    pub shed_fraction: f64,
    pub wall: Duration,
    /// False when the solver stopped on a node or time limit.
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct EvaluationRow {
    pub method: ClusterMethod,
    pub seed: u64,
    /// Total annual cost after re-evaluating the clustered plan on the full
    /// history, $.
    pub ct_k: f64,
    /// Percent deviation from the exact cost.
    pub eps_ct: f64,
    /// Clustering plus representative-day solve.
    pub step1_wall: Duration,
    /// Fixed-plan chronological LP.
    pub step2_wall: Duration,
    pub plan_summary: String,
    pub certified: bool,
}

/// `100 * |ct_k - ct_e| / ct_e`.
pub fn percent_error(ct_k: f64, ct_e: f64) -> Result<f64, GtepError> {
    if ct_e <= 0.0 {
        return Err(GtepError::Evaluation(format!(
            "exact cost must be positive, got {ct_e}"
        )));
    }
    Ok(100.0 * (ct_k - ct_e).abs() / ct_e)
}

/// Solve the chronological model over the whole history.
pub fn exact_solution(
    system: &SystemData,
    history: &DailyProfiles,
    config: &SolverConfig,
) -> Result<ExactResult, GtepError> {
    let started = Instant::now();
    let model = build_chronological_model(system, history)?;
    let sol = solve_milp(&model.problem, config)?;
    if sol.x.is_empty() {
        return Err(GtepError::Evaluation(format!(
            "exact solve ended {:?} without an incumbent",
            sol.status
        )));
    }
    let (plan, schedule, costs) = extract_solution(&model, system, &sol.x)?;
    let shed_fraction = schedule.shed_fraction(&model, system);
    Ok(ExactResult {
        total_cost: costs.total,
        plan,
        shed_fraction,
        wall: started.elapsed(),
        certified: sol.is_success(),
    })
}

/// Step 2: pin a plan into the chronological model and price it on the full
/// history. The result is a pure LP by construction.
pub fn reprice_plan(
    chrono: &PlanningModel,
    system: &SystemData,
    plan: &ExpansionPlan,
    config: &SolverConfig,
) -> Result<(f64, Duration), GtepError> {
    let started = Instant::now();
    let fixed = fix_investments(chrono, system, plan)?;
    assert!(fixed.is_pure_lp(), "fixed model still has free integers");
    let sol = solve_milp(&fixed.problem, config)?;
    if !matches!(sol.status, MilpStatus::Optimal | MilpStatus::GapLimit) {
        return Err(GtepError::Evaluation(format!(
            "plan repricing ended {:?}",
            sol.status
        )));
    }
    let (_, _, costs) = extract_solution(&fixed, system, &sol.x)?;
    Ok((costs.total, started.elapsed()))
}

/// Steps 1-3 for one (method, seed): cluster, solve the representative-day
/// model, reprice the plan chronologically, report the percent error.
pub fn run_pipeline(
    system: &SystemData,
    observations: &ObservationSet,
    chrono: &PlanningModel,
    method: ClusterMethod,
    seed: u64,
    exact: &ExactResult,
    config: &SolverConfig,
) -> Result<EvaluationRow, GtepError> {
    let step1_started = Instant::now();
    let data = observations.vectors();
    let clusters = match method {
        ClusterMethod::Tkm { k } => tkm(&data, k, seed, DEFAULT_MAX_ITER)?,
        ClusterMethod::Mkm { k1, k2 } => mkm(&data, k1, k2, seed)?,
    };
    let repdays = to_representative_days(&clusters, observations, method);
    let model = build_representative_model(system, &repdays)?;
    let sol = solve_milp(&model.problem, config)?;
    if sol.x.is_empty() {
        return Err(GtepError::Evaluation(format!(
            "representative solve ended {:?} without an incumbent",
            sol.status
        )));
    }
    let (plan, _, _) = extract_solution(&model, system, &sol.x)?;
    let step1_wall = step1_started.elapsed();

    let (ct_k, step2_wall) = reprice_plan(chrono, system, &plan, config)?;
    Ok(EvaluationRow {
        method,
        seed,
        ct_k,
        eps_ct: percent_error(ct_k, exact.total_cost)?,
        step1_wall,
        step2_wall,
        plan_summary: plan.summary(),
        certified: sol.is_success(),
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median per (K, method) over seeds.
pub fn median_eps(rows: &[EvaluationRow], method_label: &str, k: usize) -> f64 {
    let mut eps: Vec<f64> = rows
        .iter()
        .filter(|r| r.method.label() == method_label && r.method.k() == k)
        .map(|r| r.eps_ct)
        .collect();
    median(&mut eps)
}

/// Write the comparison table and the plot-data files. Returns the paths
/// written.
pub fn report(
    rows: &[EvaluationRow],
    exact: &ExactResult,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, GtepError> {
    if rows.is_empty() {
        return Err(GtepError::Evaluation("no evaluation rows to report".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let mut ks: Vec<usize> = rows.iter().map(|r| r.method.k()).collect();
    ks.sort_unstable();
    ks.dedup();

    let stat = |label: &str, k: usize, get: &dyn Fn(&EvaluationRow) -> f64| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.method.label() == label && r.method.k() == k)
            .map(get)
            .collect()
    };
    let fmt = |v: f64| {
        if v.is_nan() {
            String::from("")
        } else {
            format!("{v:.6}")
        }
    };

    // One row per K with both methods side by side, medians over seeds.
    let mut table = String::from("K,CT_TKM,CT_MKM,eps_TKM,eps_MKM,time_TKM,time_MKM\n");
    for &k in &ks {
        let mut cells = vec![k.to_string()];
        for get in [
            &(|r: &EvaluationRow| r.ct_k) as &dyn Fn(&EvaluationRow) -> f64,
            &|r: &EvaluationRow| r.eps_ct,
            &|r: &EvaluationRow| r.step1_wall.as_secs_f64(),
        ] {
            for label in ["tkm", "mkm"] {
                let mut vals = stat(label, k, get);
                cells.push(fmt(median(&mut vals)));
            }
        }
        // Reorder: K, CT pair, eps pair, time pair already built that way.
        table.push_str(&cells.join(","));
        table.push('\n');
    }
    let table_path = out_dir.join("table.csv");
    std::fs::write(&table_path, table)?;
    written.push(table_path);

    // Long-form rows for plots and archival.
    let mut long = String::from(
        "method,K,k1,k2,seed,ct_k,eps_ct,step1_seconds,step2_seconds,certified,plan\n",
    );
    for r in rows {
        let (k1, k2) = match r.method {
            ClusterMethod::Tkm { .. } => (String::new(), String::new()),
            ClusterMethod::Mkm { k1, k2 } => (k1.to_string(), k2.to_string()),
        };
        long.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            r.method.label(),
            r.method.k(),
            k1,
            k2,
            r.seed,
            r.ct_k,
            r.eps_ct,
            r.step1_wall.as_secs_f64(),
            r.step2_wall.as_secs_f64(),
            r.certified,
            r.plan_summary.replace(',', ";"),
        ));
    }
    let rows_path = out_dir.join("rows.csv");
    std::fs::write(&rows_path, long)?;
    written.push(rows_path);

    // Per-curve plot data: cost, error and time against K.
    for (file, get) in [
        ("cost_vs_k.csv", &(|r: &EvaluationRow| r.ct_k) as &dyn Fn(&EvaluationRow) -> f64),
        ("error_vs_k.csv", &|r: &EvaluationRow| r.eps_ct),
        ("time_vs_k.csv", &|r: &EvaluationRow| r.step1_wall.as_secs_f64()),
    ] {
        let mut out = String::from("K,method,median,min,max\n");
        for &k in &ks {
            for label in ["tkm", "mkm"] {
                let mut vals = stat(label, k, get);
                if vals.is_empty() {
                    continue;
                }
                let lo = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                let hi = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                out.push_str(&format!(
                    "{k},{label},{},{},{}\n",
                    fmt(median(&mut vals)),
                    fmt(lo),
                    fmt(hi)
                ));
            }
        }
        let path = out_dir.join(file);
        std::fs::write(&path, out)?;
        written.push(path);
    }

    let exact_path = out_dir.join("exact.csv");
    std::fs::write(
        &exact_path,
        format!(
            "ct_exact,shed_fraction,wall_seconds,certified\n{:.6},{:.8},{:.6},{}\n",
            exact.total_cost,
            exact.shed_fraction,
            exact.wall.as_secs_f64(),
            exact.certified
        ),
    )?;
    written.push(exact_path);

    Ok(written)
}
