//! Expansion-planning MILP assembly and solution extraction.
//!
//! Network equations are assembled in per unit on the system base power with
//! angles in radians; objective and budget rows stay in dollars. Candidate
//! line flows use the big-M pair
//! `-F (1 - x) <= p - B (th_from - th_to) <= F (1 - x)`, which reduces to the
//! DC equality when the line is built and frees the angle difference when it
//! is not. The chronological variant links storage energy across consecutive
//! days instead of closing each day on its own.
//!
//! Model census. With R days, G generators, L lines (CL of them candidates),
//! D demands, S storages (CS candidates), W wind units (CW candidates), N
//! buses and CG candidate generators:
//!
//! - variables: `R * 24 * (G + L + D + 3S + W + N) + CG + CL + CS + CW`
//! - constraints, representative variant: one budget row per active budget,
//!   plus per day-hour `N + (L - CL) + 4 CL + CG + CW + S + 3 CS`, plus one
//!   end-of-day row per candidate storage per day (and per existing storage
//!   with nonzero initial energy). The chronological variant replaces the
//!   end-of-day rows with one linking row per storage per day after the
//!   first, already counted in the per-hour storage recursion total.

use crate::clustering::RepresentativeDaySet;
use crate::error::GtepError;
use crate::system::{BudgetMode, SystemData};
use crate::timeseries::{DailyProfiles, DayProfile, HOURS};
use lpkit::{Problem, Sense, VarId, VarKind};
use std::collections::HashMap;

/// Relative feasibility tolerance used whenever a point is checked against a
/// model.
pub const FEAS_REL: f64 = 1e-6;
/// Absolute feasibility tolerance in MW.
pub const FEAS_ABS_MW: f64 = 1e-4;
/// Accepted distance from integrality for plan values.
pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKey {
    GenOutput { g: usize, r: usize, h: usize },
    Flow { l: usize, r: usize, h: usize },
    Shed { d: usize, r: usize, h: usize },
    Charge { s: usize, r: usize, h: usize },
    Discharge { s: usize, r: usize, h: usize },
    Energy { s: usize, r: usize, h: usize },
    WindOutput { w: usize, r: usize, h: usize },
    Angle { n: usize, r: usize, h: usize },
    GenCapacity { g: usize },
    WindCapacity { w: usize },
    LineBuilt { l: usize },
    StorageUnits { s: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Weighted representative days, each closed in on itself.
    Representative,
    /// Full history with day-to-day storage continuity.
    Chronological,
}

#[derive(Debug, Clone)]
pub struct PlanningModel {
    pub problem: Problem,
    pub kind: ModelKind,
    /// Day weights (sigma for representative days, all ones chronologically).
    pub weights: Vec<f64>,
    index: HashMap<VarKey, VarId>,
    pub warnings: Vec<String>,
}

impl PlanningModel {
    pub fn var(&self, key: VarKey) -> VarId {
        *self
            .index
            .get(&key)
            .expect("variable key outside the model's index")
    }

    pub fn try_var(&self, key: VarKey) -> Option<VarId> {
        self.index.get(&key).copied()
    }

    pub fn n_days(&self) -> usize {
        self.weights.len()
    }

    /// True when no integer variable can still take two values.
    pub fn is_pure_lp(&self) -> bool {
        !self.problem.has_free_integers()
    }
}

enum Horizon<'a> {
    Representative(&'a RepresentativeDaySet),
    Chronological(&'a DailyProfiles),
}

impl<'a> Horizon<'a> {
    fn load_zones(&self) -> &[String] {
        match self {
            Horizon::Representative(r) => &r.load_zones,
            Horizon::Chronological(c) => &c.load_zones,
        }
    }

    fn wind_zones(&self) -> &[String] {
        match self {
            Horizon::Representative(r) => &r.wind_zones,
            Horizon::Chronological(c) => &c.wind_zones,
        }
    }

    fn n_days(&self) -> usize {
        match self {
            Horizon::Representative(r) => r.days.len(),
            Horizon::Chronological(c) => c.days.len(),
        }
    }

    fn profile(&self, r: usize) -> &DayProfile {
        match self {
            Horizon::Representative(set) => &set.days[r].profile,
            Horizon::Chronological(c) => &c.days[r],
        }
    }

    fn weight(&self, r: usize) -> f64 {
        match self {
            Horizon::Representative(set) => set.days[r].weight as f64,
            Horizon::Chronological(_) => 1.0,
        }
    }
}

/// Representative-day expansion model: weighted operation plus investment.
pub fn build_representative_model(
    system: &SystemData,
    repdays: &RepresentativeDaySet,
) -> Result<PlanningModel, GtepError> {
    if repdays.days.is_empty() {
        return Err(GtepError::ModelBuild("no representative days".into()));
    }
    build(system, Horizon::Representative(repdays), ModelKind::Representative)
}

/// Full-horizon model with storage energy carried across days.
pub fn build_chronological_model(
    system: &SystemData,
    history: &DailyProfiles,
) -> Result<PlanningModel, GtepError> {
    if history.days.is_empty() {
        return Err(GtepError::ModelBuild("history must span at least one day".into()));
    }
    build(system, Horizon::Chronological(history), ModelKind::Chronological)
}

fn build(
    system: &SystemData,
    horizon: Horizon<'_>,
    kind: ModelKind,
) -> Result<PlanningModel, GtepError> {
    let base = system.options.base_power;
    let dt = system.options.delta_tau;
    let f_big = system.options.big_m;
    let n_days = horizon.n_days();

    // Map each demand and wind unit onto its profile row.
    let zone_of = |zones: &[String], zone: &str, owner: &str| -> Result<usize, GtepError> {
        zones
            .iter()
            .position(|z| z == zone)
            .ok_or_else(|| {
                GtepError::ModelBuild(format!(
                    "{owner} belongs to zone `{zone}` which the profile set does not provide"
                ))
            })
    };
    let demand_zone: Vec<usize> = system
        .demands
        .iter()
        .map(|d| zone_of(horizon.load_zones(), &d.zone, &format!("demand {}", d.id)))
        .collect::<Result<_, _>>()?;
    let wind_zone: Vec<usize> = system
        .wind_units
        .iter()
        .map(|w| zone_of(horizon.wind_zones(), &w.zone, &format!("wind unit {}", w.id)))
        .collect::<Result<_, _>>()?;

    let mut problem = Problem::new(format!("{}_{}", system.name, match kind {
        ModelKind::Representative => "repdays",
        ModelKind::Chronological => "chrono",
    }));
    let mut index: HashMap<VarKey, VarId> = HashMap::new();

    // Investment variables.
    for (g, gen) in system.candidate_generators() {
        let inv = gen.investment.as_ref().unwrap();
        let id = problem.add_var(
            format!("cap_g_{}", gen.id),
            0.0,
            gen.capacity / base,
            VarKind::Continuous,
            inv.annualized * base,
        );
        index.insert(VarKey::GenCapacity { g }, id);
    }
    for (l, line) in system.candidate_lines() {
        let inv = line.investment.as_ref().unwrap();
        let id = problem.add_var(
            format!("build_{}", line.id),
            0.0,
            1.0,
            VarKind::Binary,
            inv.annualized,
        );
        index.insert(VarKey::LineBuilt { l }, id);
    }
    for (s, sto) in system.candidate_storages() {
        let cand = sto.candidate.as_ref().unwrap();
        let id = problem.add_var(
            format!("units_{}", sto.id),
            0.0,
            cand.max_units as f64,
            VarKind::Integer,
            cand.investment.annualized,
        );
        index.insert(VarKey::StorageUnits { s }, id);
    }
    for (w, wind) in system.candidate_wind() {
        let inv = wind.investment.as_ref().unwrap();
        let id = problem.add_var(
            format!("cap_w_{}", wind.id),
            0.0,
            wind.capacity / base,
            VarKind::Continuous,
            inv.annualized * base,
        );
        index.insert(VarKey::WindCapacity { w }, id);
    }

    // Budget rows use full (non-annualized) investment costs.
    {
        let gen_terms: Vec<(VarId, f64)> = system
            .candidate_generators()
            .map(|(g, gen)| {
                (
                    index[&VarKey::GenCapacity { g }],
                    gen.investment.as_ref().unwrap().full * base,
                )
            })
            .collect();
        let line_terms: Vec<(VarId, f64)> = system
            .candidate_lines()
            .map(|(l, line)| {
                (
                    index[&VarKey::LineBuilt { l }],
                    line.investment.as_ref().unwrap().full,
                )
            })
            .collect();
        let sto_terms: Vec<(VarId, f64)> = system
            .candidate_storages()
            .map(|(s, sto)| {
                (
                    index[&VarKey::StorageUnits { s }],
                    sto.candidate.as_ref().unwrap().investment.full,
                )
            })
            .collect();
        let wind_terms: Vec<(VarId, f64)> = system
            .candidate_wind()
            .map(|(w, wind)| {
                (
                    index[&VarKey::WindCapacity { w }],
                    wind.investment.as_ref().unwrap().full * base,
                )
            })
            .collect();
        match &system.budget {
            BudgetMode::PerCategory {
                generation,
                lines,
                storage,
                wind,
            } => {
                for (terms, cap, name) in [
                    (gen_terms, *generation, "bud_gen"),
                    (line_terms, *lines, "bud_line"),
                    (sto_terms, *storage, "bud_sto"),
                    (wind_terms, *wind, "bud_wind"),
                ] {
                    if !terms.is_empty() && cap.is_finite() {
                        problem.add_con(name, terms, Sense::Le, cap)?;
                    }
                }
            }
            BudgetMode::Total(total) => {
                let all: Vec<(VarId, f64)> = gen_terms
                    .into_iter()
                    .chain(line_terms)
                    .chain(sto_terms)
                    .chain(wind_terms)
                    .collect();
                if !all.is_empty() {
                    problem.add_con("bud_total", all, Sense::Le, *total)?;
                }
            }
        }
    }

    let mut weights = Vec::with_capacity(n_days);

    for r in 0..n_days {
        let day = horizon.profile(r);
        let sigma = horizon.weight(r);
        weights.push(sigma);
        let rr = r + 1;

        // Hour-indexed operation variables for this day.
        for h in 0..HOURS {
            let hh = h + 1;
            for (g, gen) in system.generators.iter().enumerate() {
                let (ub, obj) = (gen.capacity / base, sigma * dt * base * gen.cost);
                let id = problem.add_var(
                    format!("pg_{}_r{rr}_h{hh}", gen.id),
                    0.0,
                    ub,
                    VarKind::Continuous,
                    obj,
                );
                index.insert(VarKey::GenOutput { g, r, h }, id);
            }
            for (l, line) in system.lines.iter().enumerate() {
                let cap = line.capacity / base;
                let id = problem.add_var(
                    format!("pl_{}_r{rr}_h{hh}", line.id),
                    -cap,
                    cap,
                    VarKind::Continuous,
                    0.0,
                );
                index.insert(VarKey::Flow { l, r, h }, id);
            }
            for (d, dem) in system.demands.iter().enumerate() {
                let beta = day.beta[demand_zone[d]][h];
                let id = problem.add_var(
                    format!("ls_{}_r{rr}_h{hh}", dem.id),
                    0.0,
                    beta * dem.peak / base,
                    VarKind::Continuous,
                    sigma * dt * base * dem.shed_cost,
                );
                index.insert(VarKey::Shed { d, r, h }, id);
            }
            for (s, sto) in system.storages.iter().enumerate() {
                let units = sto
                    .candidate
                    .as_ref()
                    .map(|c| c.max_units as f64)
                    .unwrap_or(1.0);
                let pcap = units * sto.power_capacity / base;
                let ecap = units * sto.energy_capacity / base;
                let pc = problem.add_var(
                    format!("pc_{}_r{rr}_h{hh}", sto.id),
                    0.0,
                    pcap,
                    VarKind::Continuous,
                    0.0,
                );
                let pd = problem.add_var(
                    format!("pd_{}_r{rr}_h{hh}", sto.id),
                    0.0,
                    pcap,
                    VarKind::Continuous,
                    0.0,
                );
                let e = problem.add_var(
                    format!("soc_{}_r{rr}_h{hh}", sto.id),
                    0.0,
                    ecap,
                    VarKind::Continuous,
                    0.0,
                );
                index.insert(VarKey::Charge { s, r, h }, pc);
                index.insert(VarKey::Discharge { s, r, h }, pd);
                index.insert(VarKey::Energy { s, r, h }, e);
            }
            for (w, wind) in system.wind_units.iter().enumerate() {
                let alpha = day.alpha[wind_zone[w]][h];
                let id = problem.add_var(
                    format!("pw_{}_r{rr}_h{hh}", wind.id),
                    0.0,
                    alpha * wind.capacity / base,
                    VarKind::Continuous,
                    0.0,
                );
                index.insert(VarKey::WindOutput { w, r, h }, id);
            }
            for (n, bus) in system.buses.iter().enumerate() {
                let (lo, hi) = if bus.is_reference {
                    (0.0, 0.0)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                };
                let id = problem.add_var(
                    format!("th_{}_r{rr}_h{hh}", bus.id),
                    lo,
                    hi,
                    VarKind::Continuous,
                    0.0,
                );
                index.insert(VarKey::Angle { n, r, h }, id);
            }
        }

        for h in 0..HOURS {
            let hh = h + 1;

            // Nodal balance: generation + inflow + discharge + wind + shed
            // equals demand + outflow + charge.
            for (n, bus) in system.buses.iter().enumerate() {
                let mut terms: Vec<(VarId, f64)> = Vec::new();
                let mut rhs = 0.0;
                for (g, gen) in system.generators.iter().enumerate() {
                    if gen.bus == n {
                        terms.push((index[&VarKey::GenOutput { g, r, h }], 1.0));
                    }
                }
                for (l, line) in system.lines.iter().enumerate() {
                    if line.to == n {
                        terms.push((index[&VarKey::Flow { l, r, h }], 1.0));
                    }
                    if line.from == n {
                        terms.push((index[&VarKey::Flow { l, r, h }], -1.0));
                    }
                }
                for (s, sto) in system.storages.iter().enumerate() {
                    if sto.bus == n {
                        terms.push((index[&VarKey::Discharge { s, r, h }], 1.0));
                        terms.push((index[&VarKey::Charge { s, r, h }], -1.0));
                    }
                }
                for (w, wind) in system.wind_units.iter().enumerate() {
                    if wind.bus == n {
                        terms.push((index[&VarKey::WindOutput { w, r, h }], 1.0));
                    }
                }
                for (d, dem) in system.demands.iter().enumerate() {
                    if dem.bus == n {
                        terms.push((index[&VarKey::Shed { d, r, h }], 1.0));
                        rhs += day.beta[demand_zone[d]][h] * dem.peak / base;
                    }
                }
                problem.add_con(
                    format!("bal_{}_r{rr}_h{hh}", bus.id),
                    terms,
                    Sense::Eq,
                    rhs,
                )?;
            }

            // Flow definitions and candidate-line couplings.
            for (l, line) in system.lines.iter().enumerate() {
                let b = line.susceptance();
                let pl = index[&VarKey::Flow { l, r, h }];
                let th_from = index[&VarKey::Angle { n: line.from, r, h }];
                let th_to = index[&VarKey::Angle { n: line.to, r, h }];
                match index.get(&VarKey::LineBuilt { l }) {
                    None => {
                        problem.add_con(
                            format!("flow_{}_r{rr}_h{hh}", line.id),
                            vec![(pl, 1.0), (th_from, -b), (th_to, b)],
                            Sense::Eq,
                            0.0,
                        )?;
                    }
                    Some(&x) => {
                        // p - B dth + F x <= F  and  p - B dth - F x >= -F.
                        problem.add_con(
                            format!("flowlin_hi_{}_r{rr}_h{hh}", line.id),
                            vec![(pl, 1.0), (th_from, -b), (th_to, b), (x, f_big)],
                            Sense::Le,
                            f_big,
                        )?;
                        problem.add_con(
                            format!("flowlin_lo_{}_r{rr}_h{hh}", line.id),
                            vec![(pl, 1.0), (th_from, -b), (th_to, b), (x, -f_big)],
                            Sense::Ge,
                            -f_big,
                        )?;
                        let cap = line.capacity / base;
                        problem.add_con(
                            format!("capx_hi_{}_r{rr}_h{hh}", line.id),
                            vec![(pl, 1.0), (x, -cap)],
                            Sense::Le,
                            0.0,
                        )?;
                        problem.add_con(
                            format!("capx_lo_{}_r{rr}_h{hh}", line.id),
                            vec![(pl, 1.0), (x, cap)],
                            Sense::Ge,
                            0.0,
                        )?;
                    }
                }
            }

            // Candidate generator and wind output caps.
            for (g, _) in system.candidate_generators() {
                problem.add_con(
                    format!("gcap_{}_r{rr}_h{hh}", system.generators[g].id),
                    vec![
                        (index[&VarKey::GenOutput { g, r, h }], 1.0),
                        (index[&VarKey::GenCapacity { g }], -1.0),
                    ],
                    Sense::Le,
                    0.0,
                )?;
            }
            for (w, wind) in system.candidate_wind() {
                let alpha = day.alpha[wind_zone[w]][h];
                problem.add_con(
                    format!("wcap_{}_r{rr}_h{hh}", wind.id),
                    vec![
                        (index[&VarKey::WindOutput { w, r, h }], 1.0),
                        (index[&VarKey::WindCapacity { w }], -alpha),
                    ],
                    Sense::Le,
                    0.0,
                )?;
            }

            // Storage dynamics and candidate sizing rows.
            for (s, sto) in system.storages.iter().enumerate() {
                let e = index[&VarKey::Energy { s, r, h }];
                let pc = index[&VarKey::Charge { s, r, h }];
                let pd = index[&VarKey::Discharge { s, r, h }];
                let e0 = sto.initial_energy / base;
                let units = index.get(&VarKey::StorageUnits { s }).copied();

                let charge_coef = -sto.eta_charge * dt;
                let discharge_coef = dt / sto.eta_discharge;
                if h == 0 {
                    let first_day = r == 0;
                    match kind {
                        ModelKind::Representative => {
                            // Every representative day starts from E0.
                            let mut terms =
                                vec![(e, 1.0), (pc, charge_coef), (pd, discharge_coef)];
                            let mut rhs = e0;
                            if let Some(u) = units {
                                terms.push((u, -e0));
                                rhs = 0.0;
                            }
                            problem.add_con(
                                format!("soc0_{}_r{rr}", sto.id),
                                terms,
                                Sense::Eq,
                                rhs,
                            )?;
                        }
                        ModelKind::Chronological if first_day => {
                            let mut terms =
                                vec![(e, 1.0), (pc, charge_coef), (pd, discharge_coef)];
                            let mut rhs = e0;
                            if let Some(u) = units {
                                terms.push((u, -e0));
                                rhs = 0.0;
                            }
                            problem.add_con(
                                format!("soc0_{}_r{rr}", sto.id),
                                terms,
                                Sense::Eq,
                                rhs,
                            )?;
                        }
                        ModelKind::Chronological => {
                            // Continuity with the previous day's last hour.
                            let prev = index[&VarKey::Energy {
                                s,
                                r: r - 1,
                                h: HOURS - 1,
                            }];
                            problem.add_con(
                                format!("soclink_{}_r{rr}", sto.id),
                                vec![
                                    (e, 1.0),
                                    (prev, -1.0),
                                    (pc, charge_coef),
                                    (pd, discharge_coef),
                                ],
                                Sense::Eq,
                                0.0,
                            )?;
                        }
                    }
                } else {
                    let prev = index[&VarKey::Energy { s, r, h: h - 1 }];
                    problem.add_con(
                        format!("soc_{}_r{rr}_h{hh}", sto.id),
                        vec![
                            (e, 1.0),
                            (prev, -1.0),
                            (pc, charge_coef),
                            (pd, discharge_coef),
                        ],
                        Sense::Eq,
                        0.0,
                    )?;
                }

                // End-of-day minimum holds only in the representative model;
                // chronologically the linking constraints carry the energy.
                if kind == ModelKind::Representative && h == HOURS - 1 {
                    match units {
                        None => {
                            if e0 > 0.0 {
                                problem.add_con(
                                    format!("eod_{}_r{rr}", sto.id),
                                    vec![(e, 1.0)],
                                    Sense::Ge,
                                    e0,
                                )?;
                            }
                        }
                        Some(u) => {
                            problem.add_con(
                                format!("eod_{}_r{rr}", sto.id),
                                vec![(e, 1.0), (u, -e0)],
                                Sense::Ge,
                                0.0,
                            )?;
                        }
                    }
                }

                if let Some(u) = units {
                    let pcap = sto.power_capacity / base;
                    let ecap = sto.energy_capacity / base;
                    problem.add_con(
                        format!("emax_{}_r{rr}_h{hh}", sto.id),
                        vec![(e, 1.0), (u, -ecap)],
                        Sense::Le,
                        0.0,
                    )?;
                    problem.add_con(
                        format!("cmax_{}_r{rr}_h{hh}", sto.id),
                        vec![(pc, 1.0), (u, -pcap)],
                        Sense::Le,
                        0.0,
                    )?;
                    problem.add_con(
                        format!("dmax_{}_r{rr}_h{hh}", sto.id),
                        vec![(pd, 1.0), (u, -pcap)],
                        Sense::Le,
                        0.0,
                    )?;
                }
            }
        }
    }

    // Every balance row must carry the shed variables of its bus; with them
    // present, shedding everything is always feasible.
    for (i, c) in problem.cons().iter().enumerate() {
        if let Some(bus_id) = c.name.strip_prefix("bal_") {
            let bus_id = bus_id.split("_r").next().unwrap_or("");
            let n = system.bus_index(bus_id).expect("balance row names a bus");
            let shed_count = c
                .terms
                .iter()
                .filter(|(j, _)| problem.var(*j).name.starts_with("ls_"))
                .count();
            let demands_here = system.demands.iter().filter(|d| d.bus == n).count();
            assert!(
                shed_count == demands_here,
                "balance row {i} lost a shed variable"
            );
        }
    }

    let mut warnings = Vec::new();
    if let Some(f_safe) = big_m_safe_bound(system) {
        if f_big < f_safe {
            warnings.push(format!(
                "big-M constant {f_big} is below the safe bound {f_safe:.3e} for this system; \
                 candidate-line linearization may cut feasible flows"
            ));
        }
    }

    Ok(PlanningModel {
        problem,
        kind,
        weights,
        index,
        warnings,
    })
}

/// Conservative lower bound on a sufficient big-M: the largest per-unit
/// susceptance times an upper bound on any angle spread reachable at feasible
/// flows (every line at capacity along a worst-case path).
pub fn big_m_safe_bound(system: &SystemData) -> Option<f64> {
    let base = system.options.base_power;
    let span: f64 = system
        .lines
        .iter()
        .map(|l| (l.capacity / base) * l.reactance)
        .sum();
    system
        .lines
        .iter()
        .map(|l| l.susceptance() * span)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        })
}

/// Chosen sizes for every candidate, in physical units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpansionPlan {
    /// (generator id, MW to build)
    pub gen_capacity_mw: Vec<(String, f64)>,
    /// (line id, build decision)
    pub line_built: Vec<(String, bool)>,
    /// (storage id, units to build)
    pub storage_units: Vec<(String, u32)>,
    /// (wind unit id, MW to build)
    pub wind_capacity_mw: Vec<(String, f64)>,
}

impl ExpansionPlan {
    /// All-zero plan for a system's candidates.
    pub fn empty(system: &SystemData) -> ExpansionPlan {
        ExpansionPlan {
            gen_capacity_mw: system
                .candidate_generators()
                .map(|(_, g)| (g.id.clone(), 0.0))
                .collect(),
            line_built: system
                .candidate_lines()
                .map(|(_, l)| (l.id.clone(), false))
                .collect(),
            storage_units: system
                .candidate_storages()
                .map(|(_, s)| (s.id.clone(), 0))
                .collect(),
            wind_capacity_mw: system
                .candidate_wind()
                .map(|(_, w)| (w.id.clone(), 0.0))
                .collect(),
        }
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        for (id, mw) in &self.gen_capacity_mw {
            parts.push(format!("{id}={mw:.1}MW"));
        }
        for (id, built) in &self.line_built {
            parts.push(format!("{id}={}", if *built { 1 } else { 0 }));
        }
        for (id, units) in &self.storage_units {
            parts.push(format!("{id}={units}u"));
        }
        for (id, mw) in &self.wind_capacity_mw {
            parts.push(format!("{id}={mw:.1}MW"));
        }
        parts.join(" ")
    }
}

/// Pin all investment variables to the plan, producing a pure LP.
pub fn fix_investments(
    model: &PlanningModel,
    system: &SystemData,
    plan: &ExpansionPlan,
) -> Result<PlanningModel, GtepError> {
    let base = system.options.base_power;
    let mut fixed = model.clone();
    let mut pin = |key: VarKey, name: &str, value: f64, integral: bool| -> Result<(), GtepError> {
        let id = fixed
            .index
            .get(&key)
            .copied()
            .ok_or_else(|| GtepError::ModelBuild(format!("plan names unknown candidate {name}")))?;
        let var = &fixed.problem.vars()[id];
        if value < var.lower - FEAS_ABS_MW / base || value > var.upper + FEAS_ABS_MW / base {
            return Err(GtepError::PlanOutOfBounds {
                name: name.to_string(),
                value,
                lower: var.lower,
                upper: var.upper,
            });
        }
        if integral && (value - value.round()).abs() > INT_TOL {
            return Err(GtepError::PlanOutOfBounds {
                name: format!("{name} (integrality)"),
                value,
                lower: value.floor(),
                upper: value.ceil(),
            });
        }
        let v = value.clamp(var.lower, var.upper);
        fixed.problem.set_bounds(id, v, v);
        // A pinned integer is a constant; relaxing it makes the result a
        // structural LP.
        fixed.problem.set_kind(id, VarKind::Continuous);
        Ok(())
    };

    let by_id = |items: &[(usize, String)], id: &str| -> Option<usize> {
        items.iter().find(|(_, i)| i == id).map(|(k, _)| *k)
    };
    let gens: Vec<(usize, String)> = system
        .candidate_generators()
        .map(|(g, gen)| (g, gen.id.clone()))
        .collect();
    for (id, mw) in &plan.gen_capacity_mw {
        let g = by_id(&gens, id)
            .ok_or_else(|| GtepError::ModelBuild(format!("unknown candidate generator {id}")))?;
        pin(VarKey::GenCapacity { g }, id, mw / base, false)?;
    }
    let lines: Vec<(usize, String)> = system
        .candidate_lines()
        .map(|(l, line)| (l, line.id.clone()))
        .collect();
    for (id, built) in &plan.line_built {
        let l = by_id(&lines, id)
            .ok_or_else(|| GtepError::ModelBuild(format!("unknown candidate line {id}")))?;
        pin(VarKey::LineBuilt { l }, id, if *built { 1.0 } else { 0.0 }, true)?;
    }
    let stos: Vec<(usize, String)> = system
        .candidate_storages()
        .map(|(s, sto)| (s, sto.id.clone()))
        .collect();
    for (id, units) in &plan.storage_units {
        let s = by_id(&stos, id)
            .ok_or_else(|| GtepError::ModelBuild(format!("unknown candidate storage {id}")))?;
        pin(VarKey::StorageUnits { s }, id, *units as f64, true)?;
    }
    let winds: Vec<(usize, String)> = system
        .candidate_wind()
        .map(|(w, wind)| (w, wind.id.clone()))
        .collect();
    for (id, mw) in &plan.wind_capacity_mw {
        let w = by_id(&winds, id)
            .ok_or_else(|| GtepError::ModelBuild(format!("unknown candidate wind unit {id}")))?;
        pin(VarKey::WindCapacity { w }, id, mw / base, false)?;
    }
    Ok(fixed)
}

/// Hour-by-hour operating point, physical units.
#[derive(Debug, Clone)]
pub struct OperationSchedule {
    /// `[day][hour][unit]`, MW.
    pub gen_mw: Vec<Vec<Vec<f64>>>,
    pub flow_mw: Vec<Vec<Vec<f64>>>,
    pub shed_mw: Vec<Vec<Vec<f64>>>,
    pub charge_mw: Vec<Vec<Vec<f64>>>,
    pub discharge_mw: Vec<Vec<Vec<f64>>>,
    /// MWh.
    pub energy_mwh: Vec<Vec<Vec<f64>>>,
    pub wind_mw: Vec<Vec<Vec<f64>>>,
    /// Radians.
    pub angle_rad: Vec<Vec<Vec<f64>>>,
}

impl OperationSchedule {
    /// Weighted fraction of demand energy that went unserved.
    pub fn shed_fraction(&self, model: &PlanningModel, system: &SystemData) -> f64 {
        let base = system.options.base_power;
        let mut shed = 0.0;
        let mut demand = 0.0;
        for (r, &w) in model.weights.iter().enumerate() {
            for h in 0..HOURS {
                for d in 0..system.demands.len() {
                    shed += w * self.shed_mw[r][h][d];
                    let ls = model.var(VarKey::Shed { d, r, h });
                    demand += w * model.problem.var(ls).upper * base;
                }
            }
        }
        if demand > 0.0 {
            shed / demand
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CostBreakdown {
    /// Weighted generation plus load-shedding cost, $.
    pub operation: f64,
    pub inv_generation: f64,
    pub inv_lines: f64,
    pub inv_storage: f64,
    pub inv_wind: f64,
    pub total: f64,
}

/// Map a raw solver point back into typed structures, validating it first.
pub fn extract_solution(
    model: &PlanningModel,
    system: &SystemData,
    x: &[f64],
) -> Result<(ExpansionPlan, OperationSchedule, CostBreakdown), GtepError> {
    let base = system.options.base_power;
    if x.len() != model.problem.num_vars() {
        return Err(GtepError::SolutionRejected(format!(
            "point has {} values, model has {} variables",
            x.len(),
            model.problem.num_vars()
        )));
    }
    let viol = model.problem.max_violations(x);
    let abs_pu = FEAS_ABS_MW / base;
    if viol.constraint_rel > FEAS_REL && viol.constraint_abs > abs_pu {
        let worst = viol
            .worst_constraint
            .map(|i| model.problem.con(i).name.clone())
            .unwrap_or_default();
        return Err(GtepError::SolutionRejected(format!(
            "constraint residual {:.3e} (relative {:.3e}) at {worst}",
            viol.constraint_abs, viol.constraint_rel
        )));
    }
    if viol.bound_abs > abs_pu {
        return Err(GtepError::SolutionRejected(format!(
            "bound violation {:.3e}",
            viol.bound_abs
        )));
    }
    for (j, v) in model.problem.vars().iter().enumerate() {
        if v.kind.is_integral() && (x[j] - x[j].round()).abs() > INT_TOL {
            return Err(GtepError::SolutionRejected(format!(
                "integer variable {} has fractional value {}",
                v.name, x[j]
            )));
        }
    }

    let plan = ExpansionPlan {
        gen_capacity_mw: system
            .candidate_generators()
            .map(|(g, gen)| (gen.id.clone(), x[model.var(VarKey::GenCapacity { g })] * base))
            .collect(),
        line_built: system
            .candidate_lines()
            .map(|(l, line)| (line.id.clone(), x[model.var(VarKey::LineBuilt { l })] > 0.5))
            .collect(),
        storage_units: system
            .candidate_storages()
            .map(|(s, sto)| {
                (
                    sto.id.clone(),
                    x[model.var(VarKey::StorageUnits { s })].round() as u32,
                )
            })
            .collect(),
        wind_capacity_mw: system
            .candidate_wind()
            .map(|(w, wind)| (wind.id.clone(), x[model.var(VarKey::WindCapacity { w })] * base))
            .collect(),
    };

    let n_days = model.n_days();
    let grab = |key: fn(usize, usize, usize) -> VarKey, count: usize, scale: f64| {
        (0..n_days)
            .map(|r| {
                (0..HOURS)
                    .map(|h| {
                        (0..count)
                            .map(|u| x[model.var(key(u, r, h))] * scale)
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let schedule = OperationSchedule {
        gen_mw: grab(|g, r, h| VarKey::GenOutput { g, r, h }, system.generators.len(), base),
        flow_mw: grab(|l, r, h| VarKey::Flow { l, r, h }, system.lines.len(), base),
        shed_mw: grab(|d, r, h| VarKey::Shed { d, r, h }, system.demands.len(), base),
        charge_mw: grab(|s, r, h| VarKey::Charge { s, r, h }, system.storages.len(), base),
        discharge_mw: grab(
            |s, r, h| VarKey::Discharge { s, r, h },
            system.storages.len(),
            base,
        ),
        energy_mwh: grab(|s, r, h| VarKey::Energy { s, r, h }, system.storages.len(), base),
        wind_mw: grab(|w, r, h| VarKey::WindOutput { w, r, h }, system.wind_units.len(), base),
        angle_rad: grab(|n, r, h| VarKey::Angle { n, r, h }, system.buses.len(), 1.0),
    };

    let dt = system.options.delta_tau;
    let mut operation = 0.0;
    for (r, &w) in model.weights.iter().enumerate() {
        for h in 0..HOURS {
            for (g, gen) in system.generators.iter().enumerate() {
                operation += w * dt * gen.cost * schedule.gen_mw[r][h][g];
            }
            for (d, dem) in system.demands.iter().enumerate() {
                operation += w * dt * dem.shed_cost * schedule.shed_mw[r][h][d];
            }
        }
    }
    let inv_generation: f64 = system
        .candidate_generators()
        .zip(&plan.gen_capacity_mw)
        .map(|((_, gen), (_, mw))| gen.investment.as_ref().unwrap().annualized * mw)
        .sum();
    let inv_lines: f64 = system
        .candidate_lines()
        .zip(&plan.line_built)
        .map(|((_, line), (_, built))| {
            if *built {
                line.investment.as_ref().unwrap().annualized
            } else {
                0.0
            }
        })
        .sum();
    let inv_storage: f64 = system
        .candidate_storages()
        .zip(&plan.storage_units)
        .map(|((_, sto), (_, units))| {
            sto.candidate.as_ref().unwrap().investment.annualized * *units as f64
        })
        .sum();
    let inv_wind: f64 = system
        .candidate_wind()
        .zip(&plan.wind_capacity_mw)
        .map(|((_, wind), (_, mw))| wind.investment.as_ref().unwrap().annualized * mw)
        .sum();
    let total = operation + inv_generation + inv_lines + inv_storage + inv_wind;

    let objective = model.problem.objective_value(x);
    if (total - objective).abs() > FEAS_REL * (1.0 + objective.abs()) {
        return Err(GtepError::SolutionRejected(format!(
            "cost breakdown {total} disagrees with objective {objective}"
        )));
    }

    Ok((
        plan,
        schedule,
        CostBreakdown {
            operation,
            inv_generation,
            inv_lines,
            inv_storage,
            inv_wind,
            total,
        },
    ))
}
