use crate::args::{ClusterArgs, EvaluateArgs, RerunArgs, SolveArgs, SynthArgs};
use crate::manifest::{absolute, Manifest, ManifestArgs, RowTiming, Timing, Tolerances};
use anyhow::{anyhow, Context};
use gtep::clustering::{
    mkm, read_repdays_csv, tkm, to_representative_days, write_repdays_csv, ClusterMethod,
    ClusteringResult, DEFAULT_MAX_ITER,
};
use gtep::evaluation::{exact_solution, run_pipeline, report, EvaluationRow};
use gtep::model::{build_representative_model, extract_solution};
use gtep::synth::{generate, write_history_csv, SynthSpec};
use gtep::system::load_system;
use gtep::timeseries::{build_day_observations, history_to_daily_profiles, load_hourly_csv};
use gtep::GtepError;
use lpkit::{export_problem, solve_milp, write_solution, FileFormat, SolverConfig};
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

/// Exit code 2: the request itself is invalid (flags, schemas, parameters).
/// Exit code 1: the run failed while executing a valid request.
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

pub fn usage(message: impl Into<String>) -> CliFailure {
    CliFailure {
        code: 2,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> CliFailure {
    CliFailure {
        code: 1,
        message: message.into(),
    }
}

/// Input-side problems exit 2, execution problems exit 1.
fn classify(err: anyhow::Error) -> CliFailure {
    if let Some(g) = err.downcast_ref::<GtepError>() {
        match g {
            GtepError::CsvSchema(_)
            | GtepError::CsvParse { .. }
            | GtepError::ClusterParam(_)
            | GtepError::SubClusterTooSmall { .. }
            | GtepError::SystemSchema { .. }
            | GtepError::SystemInvalid { .. }
            | GtepError::ModelBuild(_)
            | GtepError::PlanOutOfBounds { .. } => return usage(format!("{g}")),
            _ => {}
        }
    }
    runtime(format!("{err:#}"))
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os("GTEP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gtep-out"))
}

fn parse_method(args: &ClusterArgs) -> Result<ClusterMethod, CliFailure> {
    match args.method.as_str() {
        "tkm" => {
            let k = args
                .k
                .ok_or_else(|| usage("--method tkm requires --k"))?;
            Ok(ClusterMethod::Tkm { k })
        }
        "mkm" => {
            let (k1, k2) = match (args.k1, args.k2) {
                (Some(k1), Some(k2)) => (k1, k2),
                _ => return Err(usage("--method mkm requires both --k1 and --k2")),
            };
            Ok(ClusterMethod::Mkm { k1, k2 })
        }
        other => Err(usage(format!("unknown method `{other}` (expected tkm or mkm)"))),
    }
}

fn run_clustering(
    data: &[&[f64]],
    method: ClusterMethod,
    seed: u64,
) -> Result<ClusteringResult, GtepError> {
    match method {
        ClusterMethod::Tkm { k } => tkm(data, k, seed, DEFAULT_MAX_ITER),
        ClusterMethod::Mkm { k1, k2 } => mkm(data, k1, k2, seed),
    }
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<(), CliFailure> {
    let method = parse_method(args)?;
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir).map_err(|e| runtime(e.to_string()))?;

    let (records, dropped) = load_hourly_csv(&args.input).map_err(|e| classify(e.into()))?;
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} partial day(s) at the edges of the input");
    }
    let obs = build_day_observations(&records);
    let data = obs.vectors();
    let result = run_clustering(&data, method, args.seed).map_err(|e| classify(e.into()))?;
    let repdays = to_representative_days(&result, &obs, method);

    let csv_path = dir.join("repdays.csv");
    write_repdays_csv(&repdays, &csv_path).map_err(|e| classify(e.into()))?;

    let mut summary = String::new();
    summary.push_str(&format!(
        "method {} days {} sse {:.6} iterations {} converged {}\n",
        method.label(),
        repdays.days.len(),
        result.sse,
        result.iterations,
        result.converged
    ));
    for (c, day) in repdays.days.iter().enumerate() {
        summary.push_str(&format!("rep_day {} weight {}\n", c + 1, day.weight));
    }
    std::fs::write(dir.join("summary.txt"), summary).map_err(|e| runtime(e.to_string()))?;

    let manifest = Manifest {
        command: "cluster".into(),
        args: ManifestArgs {
            input: Some(absolute(&args.input)),
            method: Some(args.method.clone()),
            k: args.k,
            k1: args.k1,
            k2: args.k2,
            seed: Some(args.seed),
            ..ManifestArgs::default()
        },
        tolerances: Tolerances::with_gap(f64::NAN),
        timing: Timing::default(),
    };
    manifest.write(&dir).map_err(classify)?;
    println!(
        "wrote {} representative days to {}",
        repdays.days.len(),
        csv_path.display()
    );
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<(), CliFailure> {
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir).map_err(|e| runtime(e.to_string()))?;
    let system = load_system(&args.system).map_err(|e| classify(e.into()))?;
    let repdays = read_repdays_csv(&args.repdays).map_err(|e| classify(e.into()))?;
    let model = build_representative_model(&system, &repdays).map_err(|e| classify(e.into()))?;
    for w in &model.warnings {
        eprintln!("warning: {w}");
    }

    if let Some(export) = &args.export {
        let fmt = FileFormat::from_path(export)
            .ok_or_else(|| usage("--export path must end in .lp or .mps"))?;
        export_problem(&model.problem, export, fmt).map_err(|e| classify(e.into()))?;
        println!("exported model to {}", export.display());
        return Ok(());
    }

    let config = SolverConfig {
        rel_gap: args.gap,
        ..SolverConfig::default()
    };
    let sol = solve_milp(&model.problem, &config).map_err(|e| classify(e.into()))?;
    if sol.x.is_empty() {
        return Err(runtime(format!("solver finished {:?} without a point", sol.status)));
    }
    let (plan, schedule, costs) =
        extract_solution(&model, &system, &sol.x).map_err(|e| classify(e.into()))?;

    let mut plan_csv = String::from("candidate,kind,value\n");
    for (id, mw) in &plan.gen_capacity_mw {
        plan_csv.push_str(&format!("{id},generator_mw,{mw:.6}\n"));
    }
    for (id, built) in &plan.line_built {
        plan_csv.push_str(&format!("{id},line_built,{}\n", u8::from(*built)));
    }
    for (id, units) in &plan.storage_units {
        plan_csv.push_str(&format!("{id},storage_units,{units}\n"));
    }
    for (id, mw) in &plan.wind_capacity_mw {
        plan_csv.push_str(&format!("{id},wind_mw,{mw:.6}\n"));
    }
    std::fs::write(dir.join("plan.csv"), plan_csv).map_err(|e| runtime(e.to_string()))?;

    std::fs::write(
        dir.join("costs.csv"),
        format!(
            "operation,inv_generation,inv_lines,inv_storage,inv_wind,total\n{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            costs.operation,
            costs.inv_generation,
            costs.inv_lines,
            costs.inv_storage,
            costs.inv_wind,
            costs.total
        ),
    )
    .map_err(|e| runtime(e.to_string()))?;

    let mut sched = String::from("day,hour,kind,unit,value\n");
    for r in 0..model.n_days() {
        for h in 0..24 {
            let mut push = |kind: &str, id: &str, v: f64| {
                sched.push_str(&format!("{},{},{kind},{id},{v:.6}\n", r + 1, h + 1));
            };
            for (g, gen) in system.generators.iter().enumerate() {
                push("gen_mw", &gen.id, schedule.gen_mw[r][h][g]);
            }
            for (l, line) in system.lines.iter().enumerate() {
                push("flow_mw", &line.id, schedule.flow_mw[r][h][l]);
            }
            for (d, dem) in system.demands.iter().enumerate() {
                push("shed_mw", &dem.id, schedule.shed_mw[r][h][d]);
            }
            for (s, sto) in system.storages.iter().enumerate() {
                push("charge_mw", &sto.id, schedule.charge_mw[r][h][s]);
                push("discharge_mw", &sto.id, schedule.discharge_mw[r][h][s]);
                push("energy_mwh", &sto.id, schedule.energy_mwh[r][h][s]);
            }
            for (w, wind) in system.wind_units.iter().enumerate() {
                push("wind_mw", &wind.id, schedule.wind_mw[r][h][w]);
            }
        }
    }
    std::fs::write(dir.join("schedule.csv"), sched).map_err(|e| runtime(e.to_string()))?;

    write_solution(&model.problem, &sol.x, sol.objective, &dir.join("solution.sol"))
        .map_err(|e| classify(e.into()))?;

    let manifest = Manifest {
        command: "solve".into(),
        args: ManifestArgs {
            system: Some(absolute(&args.system)),
            repdays: Some(absolute(&args.repdays)),
            gap: Some(args.gap),
            ..ManifestArgs::default()
        },
        tolerances: Tolerances::with_gap(args.gap),
        timing: Timing::default(),
    };
    manifest.write(&dir).map_err(classify)?;
    println!(
        "status {:?}, total cost {:.2}, plan: {}",
        sol.status,
        costs.total,
        plan.summary()
    );
    Ok(())
}

pub struct EvaluatePlan {
    pub methods: Vec<String>,
    pub k_grid: Vec<usize>,
    pub seeds: Vec<u64>,
}

fn evaluate_plan(args: &EvaluateArgs, n_days: usize) -> Result<EvaluatePlan, CliFailure> {
    if args.k_grid.is_empty() && !args.exact_only {
        return Err(usage("--k-grid must list at least one K (or pass --exact-only)"));
    }
    for &k in &args.k_grid {
        if k == 0 || k > n_days {
            return Err(usage(format!(
                "K = {k} is outside 1..={n_days} (the history has {n_days} days)"
            )));
        }
    }
    for m in &args.methods {
        if m != "tkm" && m != "mkm" {
            return Err(usage(format!("unknown method `{m}`")));
        }
    }
    let seeds = match &args.seed_list {
        Some(list) if !list.is_empty() => list.clone(),
        _ => (0..args.seeds as u64).map(|s| args.seed_base + s).collect(),
    };
    if seeds.is_empty() {
        return Err(usage("need at least one seed"));
    }
    Ok(EvaluatePlan {
        methods: args.methods.clone(),
        k_grid: args.k_grid.clone(),
        seeds,
    })
}

pub fn cmd_evaluate(args: &EvaluateArgs, replay: Option<&Timing>) -> Result<(), CliFailure> {
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir).map_err(|e| runtime(e.to_string()))?;
    let system = load_system(&args.system).map_err(|e| classify(e.into()))?;
    let (records, dropped) = load_hourly_csv(&args.history).map_err(|e| classify(e.into()))?;
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} partial day(s)");
    }
    let plan = evaluate_plan(args, records.n_days())?;
    let history = history_to_daily_profiles(&records);
    let observations = build_day_observations(&records);
    let config = SolverConfig {
        rel_gap: args.gap,
        ..SolverConfig::default()
    };

    let exact = exact_solution(&system, &history, &config).map_err(|e| classify(e.into()))?;
    println!(
        "exact cost {:.2} (shed fraction {:.5}), plan: {}",
        exact.total_cost,
        exact.shed_fraction,
        exact.plan.summary()
    );

    let mut rows: Vec<EvaluationRow> = Vec::new();
    if !args.exact_only {
        let chrono = gtep::model::build_chronological_model(&system, &history)
            .map_err(|e| classify(e.into()))?;

        // Independent jobs over a shared queue; results are re-sorted so the
        // report does not depend on scheduling.
        let mut jobs: VecDeque<(ClusterMethod, u64)> = VecDeque::new();
        for &k in &plan.k_grid {
            for m in &plan.methods {
                let method = match m.as_str() {
                    "tkm" => ClusterMethod::Tkm { k },
                    _ => ClusterMethod::mkm_for_k(k),
                };
                for &seed in &plan.seeds {
                    jobs.push_back((method, seed));
                }
            }
        }
        let queue = Mutex::new(jobs);
        let results: Mutex<Vec<Result<EvaluationRow, GtepError>>> = Mutex::new(Vec::new());
        let workers = args.jobs.max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let job = queue.lock().unwrap().pop_front();
                    let Some((method, seed)) = job else { break };
                    let row = run_pipeline(
                        &system,
                        &observations,
                        &chrono,
                        method,
                        seed,
                        &exact,
                        &config,
                    );
                    results.lock().unwrap().push(row);
                });
            }
        });
        for row in results.into_inner().unwrap() {
            match row {
                Ok(r) => rows.push(r),
                Err(GtepError::SubClusterTooSmall { cluster, size, k2 }) => {
                    eprintln!(
                        "warning: skipping infeasible mkm row (stage-1 cluster {cluster} has {size} < k2 = {k2} members)"
                    );
                }
                Err(e) => return Err(classify(e.into())),
            }
        }
        rows.sort_by(|a, b| {
            (a.method.label(), a.method.k(), a.seed).cmp(&(b.method.label(), b.method.k(), b.seed))
        });
    }

    // A replayed run reports the original wall times.
    let mut exact_for_report = exact.clone();
    if let Some(t) = replay {
        if let Some(s) = t.exact_seconds {
            exact_for_report.wall = Duration::from_secs_f64(s);
        }
        for row in &mut rows {
            if let Some(rt) = t.rows.iter().find(|rt| {
                rt.method == row.method.label() && rt.k == row.method.k() && rt.seed == row.seed
            }) {
                row.step1_wall = Duration::from_secs_f64(rt.step1_seconds);
                row.step2_wall = Duration::from_secs_f64(rt.step2_seconds);
            }
        }
    }

    if rows.is_empty() && !args.exact_only {
        return Err(runtime("every pipeline row failed"));
    }
    if !rows.is_empty() {
        let written =
            report(&rows, &exact_for_report, &dir).map_err(|e| classify(e.into()))?;
        for p in &written {
            println!("wrote {}", p.display());
        }
    } else {
        std::fs::write(
            dir.join("exact.csv"),
            format!(
                "ct_exact,shed_fraction,wall_seconds,certified\n{:.6},{:.8},{:.6},{}\n",
                exact_for_report.total_cost,
                exact_for_report.shed_fraction,
                exact_for_report.wall.as_secs_f64(),
                exact_for_report.certified
            ),
        )
        .map_err(|e| runtime(e.to_string()))?;
        println!("wrote {}", dir.join("exact.csv").display());
    }

    let manifest = Manifest {
        command: "evaluate".into(),
        args: ManifestArgs {
            system: Some(absolute(&args.system)),
            history: Some(absolute(&args.history)),
            k_grid: Some(plan.k_grid.clone()),
            methods: Some(plan.methods.clone()),
            seed_list: Some(plan.seeds.clone()),
            exact_only: Some(args.exact_only),
            gap: Some(args.gap),
            ..ManifestArgs::default()
        },
        tolerances: Tolerances::with_gap(args.gap),
        timing: Timing {
            exact_seconds: Some(exact_for_report.wall.as_secs_f64()),
            rows: rows
                .iter()
                .map(|r| RowTiming {
                    method: r.method.label().into(),
                    k: r.method.k(),
                    seed: r.seed,
                    step1_seconds: r.step1_wall.as_secs_f64(),
                    step2_seconds: r.step2_wall.as_secs_f64(),
                })
                .collect(),
        },
    };
    manifest.write(&dir).map_err(classify)?;
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliFailure> {
    let spec = match args.profile.as_str() {
        "desk" => SynthSpec::desk(args.days, args.seed),
        "year" => SynthSpec {
            n_days: args.days,
            start: chrono_start(),
            load_zones: vec![("west".into(), 2000.0), ("east".into(), 1500.0)],
            wind_zones: vec![("north".into(), 600.0), ("south".into(), 500.0)],
            seed: args.seed,
        },
        other => return Err(usage(format!("unknown profile `{other}`"))),
    };
    let set = generate(&spec);
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| runtime(e.to_string()))?;
        }
    }
    write_history_csv(&set, &args.out).map_err(|e| runtime(e.to_string()))?;
    println!("wrote {} days to {}", set.n_days(), args.out.display());
    Ok(())
}

fn chrono_start() -> chrono::NaiveDate {
    chrono::NaiveDate::from_ymd_opt(2012, 1, 1).unwrap()
}

pub fn cmd_rerun(args: &RerunArgs) -> Result<(), CliFailure> {
    let manifest = Manifest::read(&args.manifest).map_err(|e| usage(format!("{e:#}")))?;
    let dir = args.out.clone().unwrap_or_else(|| {
        args.manifest
            .parent()
            .map(|p| p.join("rerun"))
            .unwrap_or_else(|| PathBuf::from("rerun"))
    });
    let a = &manifest.args;
    let need = |o: &Option<PathBuf>, what: &str| -> Result<PathBuf, CliFailure> {
        o.clone()
            .ok_or_else(|| usage(format!("manifest lacks `{what}`")))
    };
    match manifest.command.as_str() {
        "cluster" => cmd_cluster(&ClusterArgs {
            input: need(&a.input, "input")?,
            method: a.method.clone().ok_or_else(|| usage("manifest lacks method"))?,
            k: a.k,
            k1: a.k1,
            k2: a.k2,
            seed: a.seed.unwrap_or(0),
            out: Some(dir),
        }),
        "solve" => cmd_solve(&SolveArgs {
            system: need(&a.system, "system")?,
            repdays: need(&a.repdays, "repdays")?,
            export: None,
            gap: a.gap.unwrap_or(1e-6),
            out: Some(dir),
        }),
        "evaluate" => cmd_evaluate(
            &EvaluateArgs {
                system: need(&a.system, "system")?,
                history: need(&a.history, "history")?,
                k_grid: a.k_grid.clone().unwrap_or_default(),
                methods: a.methods.clone().unwrap_or_default(),
                seeds: a.seed_list.as_ref().map(Vec::len).unwrap_or(0),
                seed_base: 0,
                seed_list: a.seed_list.clone(),
                exact_only: a.exact_only.unwrap_or(false),
                gap: a.gap.unwrap_or(1e-6),
                jobs: 1,
                out: Some(dir),
            },
            Some(&manifest.timing),
        ),
        other => Err(usage(format!("manifest command `{other}` is not replayable"))),
    }
}

/// Fill unset CLI options from a TOML config file's `[defaults]` table.
pub fn apply_config(path: &Path, args: &mut crate::args::Command) -> anyhow::Result<()> {
    #[derive(serde::Deserialize, Default)]
    struct Defaults {
        out: Option<PathBuf>,
        gap: Option<f64>,
        seeds: Option<usize>,
        jobs: Option<usize>,
    }
    #[derive(serde::Deserialize)]
    struct ConfigFile {
        #[serde(default)]
        defaults: Defaults,
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("config {}", path.display()))?;
    let cfg: ConfigFile = toml::from_str(&text).map_err(|e| anyhow!("config: {e}"))?;
    use crate::args::Command::*;
    match args {
        Cluster(c) => {
            if c.out.is_none() {
                c.out = cfg.defaults.out.clone();
            }
        }
        Solve(s) => {
            if s.out.is_none() {
                s.out = cfg.defaults.out.clone();
            }
            if let Some(g) = cfg.defaults.gap {
                s.gap = g;
            }
        }
        Evaluate(e) => {
            if e.out.is_none() {
                e.out = cfg.defaults.out.clone();
            }
            if let Some(g) = cfg.defaults.gap {
                e.gap = g;
            }
            if let Some(s) = cfg.defaults.seeds {
                e.seeds = s;
            }
            if let Some(j) = cfg.defaults.jobs {
                e.jobs = j;
            }
        }
        Synth(_) | Rerun(_) => {}
    }
    Ok(())
}
