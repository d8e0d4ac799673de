//! Physical and economic system data: buses, generators, lines, storage,
//! wind units, demands, investment budgets, and solver-facing options.
//!
//! Systems load from a TOML file; candidate units are the entries carrying
//! investment data. All powers are MW, energies MWh, costs $, reactances per
//! unit on the configured base power.

use crate::error::GtepError;
use serde::Deserialize;
use std::collections::HashSet;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Bus {
    pub id: String,
    pub is_reference: bool,
}

/// Full and annualized investment cost of one candidate unit.
#[derive(Debug, Clone, Copy)]
pub struct Investment {
    pub full: f64,
    pub annualized: f64,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub id: String,
    pub bus: usize,
    /// Capacity, MW; for candidates the upper bound on capacity to build.
    pub capacity: f64,
    /// Operation cost, $/MWh.
    pub cost: f64,
    /// $/MW; present only for candidates.
    pub investment: Option<Investment>,
}

#[derive(Debug, Clone)]
pub struct Line {
    pub id: String,
    pub from: usize,
    pub to: usize,
    /// Per-unit reactance 1/B on the system base.
    pub reactance: f64,
    /// MW.
    pub capacity: f64,
    /// $ for the whole line; present only for candidates.
    pub investment: Option<Investment>,
}

impl Line {
    /// Per-unit susceptance.
    pub fn susceptance(&self) -> f64 {
        1.0 / self.reactance
    }
}

#[derive(Debug, Clone)]
pub struct StorageCandidate {
    pub max_units: u32,
    /// $ per unit built.
    pub investment: Investment,
}

#[derive(Debug, Clone)]
pub struct Storage {
    pub id: String,
    pub bus: usize,
    /// MWh per unit.
    pub energy_capacity: f64,
    /// Charging and discharging power limit, MW per unit.
    pub power_capacity: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    /// MWh at the first hour, per unit.
    pub initial_energy: f64,
    pub candidate: Option<StorageCandidate>,
}

#[derive(Debug, Clone)]
pub struct WindUnit {
    pub id: String,
    pub bus: usize,
    pub zone: String,
    /// MW; for candidates the upper bound on capacity to build.
    pub capacity: f64,
    /// $/MW; present only for candidates.
    pub investment: Option<Investment>,
}

#[derive(Debug, Clone)]
pub struct Demand {
    pub id: String,
    pub bus: usize,
    pub zone: String,
    /// Peak consumption, MW.
    pub peak: f64,
    /// Load-shedding cost, $/MWh.
    pub shed_cost: f64,
}

#[derive(Debug, Clone)]
pub enum BudgetMode {
    PerCategory {
        generation: f64,
        lines: f64,
        storage: f64,
        wind: f64,
    },
    Total(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct SystemOptions {
    /// Big-M constant for candidate-line flow linearization.
    pub big_m: f64,
    /// Time step, hours.
    pub delta_tau: f64,
    /// MVA base for the per-unit network equations.
    pub base_power: f64,
    /// Annualized investment cost as a fraction of full cost.
    pub annualization_factor: f64,
}

#[derive(Debug, Clone)]
pub struct SystemData {
    pub name: String,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    pub storages: Vec<Storage>,
    pub wind_units: Vec<WindUnit>,
    pub demands: Vec<Demand>,
    pub budget: BudgetMode,
    pub options: SystemOptions,
}

/// Investment cost of one storage unit: $60,000 per MWh of energy capacity
/// plus $1,000,000 per MW of power capacity.
pub fn storage_investment_cost(energy_mwh: f64, power_mw: f64) -> f64 {
    60_000.0 * energy_mwh + 1_000_000.0 * power_mw
}

impl SystemData {
    pub fn reference_bus(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.is_reference)
            .expect("validated systems have a reference bus")
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Load zones in first-appearance order.
    pub fn load_zones(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in &self.demands {
            if !out.contains(&d.zone) {
                out.push(d.zone.clone());
            }
        }
        out
    }

    pub fn wind_zones(&self) -> Vec<String> {
        let mut out = Vec::new();
        for w in &self.wind_units {
            if !out.contains(&w.zone) {
                out.push(w.zone.clone());
            }
        }
        out
    }

    pub fn candidate_generators(&self) -> impl Iterator<Item = (usize, &Generator)> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.investment.is_some())
    }

    pub fn candidate_lines(&self) -> impl Iterator<Item = (usize, &Line)> {
        self.lines
            .iter()
            .enumerate()
            .filter(|(_, l)| l.investment.is_some())
    }

    pub fn candidate_storages(&self) -> impl Iterator<Item = (usize, &Storage)> {
        self.storages
            .iter()
            .enumerate()
            .filter(|(_, s)| s.candidate.is_some())
    }

    pub fn candidate_wind(&self) -> impl Iterator<Item = (usize, &WindUnit)> {
        self.wind_units
            .iter()
            .enumerate()
            .filter(|(_, w)| w.investment.is_some())
    }

    /// All invariant violations, one line each; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        let nb = self.buses.len();

        let refs = self.buses.iter().filter(|b| b.is_reference).count();
        if refs != 1 {
            diags.push(format!("system must have exactly one reference bus, found {refs}"));
        }
        let mut seen = HashSet::new();
        for b in &self.buses {
            if !seen.insert(&b.id) {
                diags.push(format!("duplicate bus id {}", b.id));
            }
        }
        let mut ids = HashSet::new();
        let mut check_id = |kind: &str, id: &String, diags: &mut Vec<String>| {
            if !ids.insert(id.clone()) {
                diags.push(format!("duplicate {kind} id {id}"));
            }
        };

        for g in &self.generators {
            check_id("generator", &g.id, &mut diags);
            if g.bus >= nb {
                diags.push(format!("generator {}: dangling bus reference", g.id));
            }
            if g.capacity <= 0.0 {
                diags.push(format!("generator {}: capacity must be positive", g.id));
            }
            if g.cost < 0.0 {
                diags.push(format!("generator {}: negative operation cost", g.id));
            }
        }
        for l in &self.lines {
            check_id("line", &l.id, &mut diags);
            if l.from >= nb || l.to >= nb {
                diags.push(format!("line {}: dangling bus reference", l.id));
            }
            if l.from == l.to {
                diags.push(format!("line {}: sending and receiving end coincide", l.id));
            }
            if l.reactance <= 0.0 {
                diags.push(format!("line {}: reactance must be positive", l.id));
            }
            if l.capacity <= 0.0 {
                diags.push(format!("line {}: capacity must be positive", l.id));
            }
        }
        for s in &self.storages {
            check_id("storage", &s.id, &mut diags);
            if s.bus >= nb {
                diags.push(format!("storage {}: dangling bus reference", s.id));
            }
            if s.energy_capacity <= 0.0 || s.power_capacity <= 0.0 {
                diags.push(format!("storage {}: capacities must be positive", s.id));
            }
            for (eta, which) in [(s.eta_charge, "charge"), (s.eta_discharge, "discharge")] {
                if !(eta > 0.0 && eta <= 1.0) {
                    diags.push(format!("storage {}: {which} efficiency out of range (0, 1]", s.id));
                }
            }
            if s.initial_energy < 0.0 || s.initial_energy > s.energy_capacity {
                diags.push(format!("storage {}: initial energy outside [0, capacity]", s.id));
            }
            if let Some(c) = &s.candidate {
                if c.max_units == 0 {
                    diags.push(format!("storage {}: candidate with zero max units", s.id));
                }
            }
        }
        for w in &self.wind_units {
            check_id("wind unit", &w.id, &mut diags);
            if w.bus >= nb {
                diags.push(format!("wind unit {}: dangling bus reference", w.id));
            }
            if w.capacity <= 0.0 {
                diags.push(format!("wind unit {}: capacity must be positive", w.id));
            }
        }
        for d in &self.demands {
            check_id("demand", &d.id, &mut diags);
            if d.bus >= nb {
                diags.push(format!("demand {}: dangling bus reference", d.id));
            }
            if d.peak < 0.0 {
                diags.push(format!("demand {}: negative peak", d.id));
            }
            if d.shed_cost < 0.0 {
                diags.push(format!("demand {}: negative shed cost", d.id));
            }
        }
        match &self.budget {
            BudgetMode::Total(t) if *t < 0.0 => diags.push("negative total budget".into()),
            BudgetMode::PerCategory {
                generation,
                lines,
                storage,
                wind,
            } => {
                for (v, what) in [
                    (generation, "generation"),
                    (lines, "line"),
                    (storage, "storage"),
                    (wind, "wind"),
                ] {
                    if *v < 0.0 {
                        diags.push(format!("negative {what} budget"));
                    }
                }
            }
            _ => {}
        }
        if self.options.base_power <= 0.0 {
            diags.push("base power must be positive".into());
        }
        if self.options.delta_tau <= 0.0 {
            diags.push("time step must be positive".into());
        }
        if !(self.options.annualization_factor > 0.0 && self.options.annualization_factor <= 1.0) {
            diags.push("annualization factor must lie in (0, 1]".into());
        }
        if self.options.big_m <= 0.0 {
            diags.push("big-M constant must be positive".into());
        }
        diags
    }
}

// --- TOML schema ---

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    name: Option<String>,
    options: RawOptions,
    budgets: RawBudgets,
    buses: Vec<RawBus>,
    generators: Vec<RawGenerator>,
    lines: Vec<RawLine>,
    #[serde(default)]
    storages: Vec<RawStorage>,
    #[serde(default)]
    wind: Vec<RawWind>,
    demands: Vec<RawDemand>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    reference_bus: String,
    #[serde(default = "default_big_m")]
    big_m: f64,
    #[serde(default = "default_delta_tau")]
    delta_tau: f64,
    #[serde(default = "default_base_power")]
    base_power: f64,
    #[serde(default = "default_annualization")]
    annualization_factor: f64,
    /// System-wide storage efficiency defaults.
    #[serde(default = "default_eta")]
    charge_efficiency: f64,
    #[serde(default = "default_eta")]
    discharge_efficiency: f64,
}

fn default_big_m() -> f64 {
    500_000.0
}
fn default_delta_tau() -> f64 {
    1.0
}
fn default_base_power() -> f64 {
    100.0
}
fn default_annualization() -> f64 {
    0.1
}
fn default_eta() -> f64 {
    0.9
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudgets {
    mode: String,
    total: Option<f64>,
    generation: Option<f64>,
    lines: Option<f64>,
    storage: Option<f64>,
    wind: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBus {
    id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    id: String,
    bus: String,
    capacity: f64,
    cost: f64,
    inv_cost_annualized: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    id: String,
    from: String,
    to: String,
    reactance: f64,
    capacity: f64,
    inv_cost_annualized: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStorage {
    id: String,
    bus: String,
    energy_capacity: f64,
    power_capacity: f64,
    charge_efficiency: Option<f64>,
    discharge_efficiency: Option<f64>,
    #[serde(default)]
    initial_energy: f64,
    max_units: Option<u32>,
    inv_cost_annualized: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWind {
    id: String,
    bus: String,
    zone: String,
    capacity: f64,
    inv_cost_annualized: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDemand {
    id: String,
    bus: String,
    zone: String,
    peak: f64,
    shed_cost: f64,
}

/// Parse and validate a system file.
pub fn load_system(path: &Path) -> Result<SystemData, GtepError> {
    let text = std::fs::read_to_string(path).map_err(|e| GtepError::SystemSchema {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let raw: RawSystem = toml::from_str(&text).map_err(|e| GtepError::SystemSchema {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let system = resolve(raw, path)?;
    let diagnostics = system.validate();
    if diagnostics.is_empty() {
        Ok(system)
    } else {
        Err(GtepError::SystemInvalid { diagnostics })
    }
}

fn resolve(raw: RawSystem, path: &Path) -> Result<SystemData, GtepError> {
    let schema_err = |message: String| GtepError::SystemSchema {
        path: path.display().to_string(),
        message,
    };
    let bus_ids: Vec<String> = raw.buses.iter().map(|b| b.id.clone()).collect();
    let bus_of = |id: &str, owner: &str| -> Result<usize, GtepError> {
        bus_ids
            .iter()
            .position(|b| b == id)
            .ok_or_else(|| schema_err(format!("{owner} references unknown bus `{id}`")))
    };

    let factor = raw.options.annualization_factor;
    let investment = |annualized: Option<f64>| {
        annualized.map(|a| Investment {
            annualized: a,
            full: a / factor,
        })
    };

    let buses = raw
        .buses
        .iter()
        .map(|b| Bus {
            id: b.id.clone(),
            is_reference: b.id == raw.options.reference_bus,
        })
        .collect::<Vec<_>>();
    if !buses.iter().any(|b| b.is_reference) {
        return Err(schema_err(format!(
            "reference bus `{}` is not in the bus list",
            raw.options.reference_bus
        )));
    }

    let generators = raw
        .generators
        .into_iter()
        .map(|g| {
            Ok(Generator {
                bus: bus_of(&g.bus, &format!("generator {}", g.id))?,
                id: g.id,
                capacity: g.capacity,
                cost: g.cost,
                investment: investment(g.inv_cost_annualized),
            })
        })
        .collect::<Result<Vec<_>, GtepError>>()?;

    let lines = raw
        .lines
        .into_iter()
        .map(|l| {
            Ok(Line {
                from: bus_of(&l.from, &format!("line {}", l.id))?,
                to: bus_of(&l.to, &format!("line {}", l.id))?,
                id: l.id,
                reactance: l.reactance,
                capacity: l.capacity,
                investment: investment(l.inv_cost_annualized),
            })
        })
        .collect::<Result<Vec<_>, GtepError>>()?;

    let storages = raw
        .storages
        .into_iter()
        .map(|s| {
            let candidate = match (s.max_units, s.inv_cost_annualized) {
                (None, None) => None,
                (Some(m), annualized) => {
                    // When the file gives no cost, derive it from the
                    // energy/power cost rule and annualize.
                    let full_default =
                        storage_investment_cost(s.energy_capacity, s.power_capacity);
                    let inv = match annualized {
                        Some(a) => Investment {
                            annualized: a,
                            full: a / factor,
                        },
                        None => Investment {
                            full: full_default,
                            annualized: full_default * factor,
                        },
                    };
                    Some(StorageCandidate {
                        max_units: m,
                        investment: inv,
                    })
                }
                (None, Some(_)) => {
                    return Err(schema_err(format!(
                        "storage {}: investment cost without max_units",
                        s.id
                    )))
                }
            };
            Ok(Storage {
                bus: bus_of(&s.bus, &format!("storage {}", s.id))?,
                id: s.id,
                energy_capacity: s.energy_capacity,
                power_capacity: s.power_capacity,
                eta_charge: s.charge_efficiency.unwrap_or(raw.options.charge_efficiency),
                eta_discharge: s
                    .discharge_efficiency
                    .unwrap_or(raw.options.discharge_efficiency),
                initial_energy: s.initial_energy,
                candidate,
            })
        })
        .collect::<Result<Vec<_>, GtepError>>()?;

    let wind_units = raw
        .wind
        .into_iter()
        .map(|w| {
            Ok(WindUnit {
                bus: bus_of(&w.bus, &format!("wind unit {}", w.id))?,
                id: w.id,
                zone: w.zone,
                capacity: w.capacity,
                investment: investment(w.inv_cost_annualized),
            })
        })
        .collect::<Result<Vec<_>, GtepError>>()?;

    let demands = raw
        .demands
        .into_iter()
        .map(|d| {
            Ok(Demand {
                bus: bus_of(&d.bus, &format!("demand {}", d.id))?,
                id: d.id,
                zone: d.zone,
                peak: d.peak,
                shed_cost: d.shed_cost,
            })
        })
        .collect::<Result<Vec<_>, GtepError>>()?;

    let budget = match raw.budgets.mode.as_str() {
        "total" => BudgetMode::Total(
            raw.budgets
                .total
                .ok_or_else(|| schema_err("budget mode `total` needs a `total` value".into()))?,
        ),
        "per_category" => BudgetMode::PerCategory {
            generation: raw.budgets.generation.unwrap_or(f64::INFINITY),
            lines: raw.budgets.lines.unwrap_or(f64::INFINITY),
            storage: raw.budgets.storage.unwrap_or(f64::INFINITY),
            wind: raw.budgets.wind.unwrap_or(f64::INFINITY),
        },
        other => return Err(schema_err(format!("unknown budget mode `{other}`"))),
    };

    Ok(SystemData {
        name: raw.name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "system".into())
        }),
        buses,
        generators,
        lines,
        storages,
        wind_units,
        demands,
        budget,
        options: SystemOptions {
            big_m: raw.options.big_m,
            delta_tau: raw.options.delta_tau,
            base_power: raw.options.base_power,
            annualization_factor: raw.options.annualization_factor,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn minimal_toml() -> String {
        r#"
name = "mini"

[options]
reference_bus = "b1"

[budgets]
mode = "total"
total = 1e8

[[buses]]
id = "b1"

[[buses]]
id = "b2"

[[generators]]
id = "g1"
bus = "b1"
capacity = 100.0
cost = 40.0

[[lines]]
id = "l1"
from = "b1"
to = "b2"
reactance = 0.1
capacity = 80.0

[[demands]]
id = "d1"
bus = "b2"
zone = "west"
peak = 60.0
shed_cost = 2000.0
"#
        .to_string()
    }

    fn load_str(s: &str) -> Result<SystemData, GtepError> {
        let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
        f.write_all(s.as_bytes()).unwrap();
        load_system(f.path())
    }

    #[test]
    fn minimal_system_loads() {
        let sys = load_str(&minimal_toml()).unwrap();
        assert_eq!(sys.buses.len(), 2);
        assert_eq!(sys.reference_bus(), 0);
        assert_eq!(sys.options.big_m, 500_000.0);
        assert_eq!(sys.options.base_power, 100.0);
        assert!(sys.validate().is_empty());
    }

    #[test]
    fn storage_cost_rule() {
        assert_eq!(storage_investment_cost(250.0, 125.0), 140_000_000.0);
        assert_eq!(storage_investment_cost(0.0, 0.0), 0.0);
        assert_eq!(storage_investment_cost(400.0, 200.0), 224_000_000.0);
        // Linearity in scale.
        let a = 3.0;
        let f = storage_investment_cost(120.0, 55.0);
        assert!((storage_investment_cost(a * 120.0, a * 55.0) - a * f).abs() < 1e-6);
    }

    #[test]
    fn dangling_bus_rejected() {
        let bad = minimal_toml().replace("bus = \"b2\"", "bus = \"nope\"");
        let err = load_str(&bad).unwrap_err();
        assert!(err.to_string().contains("nope"), "{err}");
    }

    #[test]
    fn unknown_reference_bus_rejected() {
        let bad = minimal_toml().replace("reference_bus = \"b1\"", "reference_bus = \"zz\"");
        assert!(load_str(&bad).is_err());
    }

    #[test]
    fn efficiency_out_of_range_diagnosed() {
        let sys = load_str(&minimal_toml()).unwrap();
        let mut bad = sys;
        bad.storages.push(Storage {
            id: "s1".into(),
            bus: 0,
            energy_capacity: 10.0,
            power_capacity: 5.0,
            eta_charge: 0.9,
            eta_discharge: 0.0,
            initial_energy: 0.0,
            candidate: None,
        });
        let diags = bad.validate();
        assert!(diags.iter().any(|d| d.contains("efficiency out of range")), "{diags:?}");
    }

    #[test]
    fn self_loop_line_diagnosed() {
        let mut sys = load_str(&minimal_toml()).unwrap();
        sys.lines[0].to = sys.lines[0].from;
        let diags = sys.validate();
        assert!(diags.iter().any(|d| d.contains("coincide")), "{diags:?}");
    }

    #[test]
    fn duplicate_reference_diagnosed() {
        let mut sys = load_str(&minimal_toml()).unwrap();
        sys.buses[1].is_reference = true;
        let diags = sys.validate();
        assert!(diags.iter().any(|d| d.contains("reference")), "{diags:?}");
    }

    #[test]
    fn storage_candidate_cost_derived_from_rule() {
        let toml = minimal_toml()
            + r#"
[[storages]]
id = "s1"
bus = "b1"
energy_capacity = 200.0
power_capacity = 100.0
max_units = 2
"#;
        let sys = load_str(&toml).unwrap();
        let cand = sys.storages[0].candidate.as_ref().unwrap();
        assert_eq!(cand.investment.full, 112_000_000.0);
        assert!((cand.investment.annualized - 11_200_000.0).abs() < 1.0);
    }
}
