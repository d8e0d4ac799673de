//! Bundled system files: the 24-bus test system must load with its expected
//! composition, and the desk system must be valid and warning-free.

use gtep::model::{big_m_safe_bound, build_representative_model};
use gtep::synth::{generate, SynthSpec};
use gtep::system::load_system;
use gtep::timeseries::{build_day_observations, history_to_daily_profiles};
use std::path::{Path, PathBuf};

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(file)
}

#[test]
fn rts24_composition() {
    let sys = load_system(&data("rts24.toml")).unwrap();
    assert_eq!(sys.buses.len(), 24);
    assert_eq!(sys.generators.len(), 18);
    assert_eq!(sys.candidate_generators().count(), 7);
    assert_eq!(sys.lines.len(), 44);
    assert_eq!(sys.candidate_lines().count(), 6);
    assert_eq!(sys.storages.len(), 7);
    assert_eq!(sys.candidate_storages().count(), 5);
    assert_eq!(sys.wind_units.len(), 6);
    assert_eq!(sys.candidate_wind().count(), 4);
    assert_eq!(sys.demands.len(), 17);
    assert!(sys.validate().is_empty());
    assert_eq!(sys.buses[sys.reference_bus()].id, "n1");
    assert_eq!(sys.load_zones(), vec!["west", "east"]);
    assert_eq!(sys.wind_zones(), vec!["south", "north"]);
}

#[test]
fn rts24_storage_costs_follow_the_energy_power_rule() {
    let sys = load_system(&data("rts24.toml")).unwrap();
    for (_, sto) in sys.candidate_storages() {
        let cand = sto.candidate.as_ref().unwrap();
        let expected = gtep::system::storage_investment_cost(
            sto.energy_capacity,
            sto.power_capacity,
        ) * sys.options.annualization_factor;
        let rel = (cand.investment.annualized - expected).abs() / expected;
        assert!(rel < 1e-9, "{}: {} vs {}", sto.id, cand.investment.annualized, expected);
    }
}

#[test]
fn rts24_big_m_is_sufficient() {
    let sys = load_system(&data("rts24.toml")).unwrap();
    let safe = big_m_safe_bound(&sys).unwrap();
    assert!(
        sys.options.big_m >= safe,
        "configured {} below safe bound {safe}",
        sys.options.big_m
    );
}

#[test]
fn rts24_one_day_model_builds_clean() {
    // A single representative day over the full 24-bus system; build only,
    // no solve. Checks zone wiring and the warning path stays quiet.
    let sys = load_system(&data("rts24.toml")).unwrap();
    let records = generate(&SynthSpec {
        n_days: 3,
        start: chrono::NaiveDate::from_ymd_opt(2012, 1, 1).unwrap(),
        load_zones: vec![("west".into(), 2000.0), ("east".into(), 1500.0)],
        wind_zones: vec![("north".into(), 600.0), ("south".into(), 500.0)],
        seed: 5,
    });
    let obs = build_day_observations(&records);
    let hist = history_to_daily_profiles(&records);
    let repdays = gtep::clustering::RepresentativeDaySet {
        load_zones: hist.load_zones.clone(),
        wind_zones: hist.wind_zones.clone(),
        days: vec![gtep::clustering::RepresentativeDay {
            weight: 365,
            profile: hist.days[0].clone(),
        }],
        source: None,
        seed: None,
    };
    let model = build_representative_model(&sys, &repdays).unwrap();
    assert!(model.warnings.is_empty(), "{:?}", model.warnings);
    // 24 hourly blocks over generators, lines, demands, storage triples,
    // wind and angles, plus the four investment classes.
    let per_hour = 18 + 44 + 17 + 3 * 7 + 6 + 24;
    assert_eq!(model.problem.num_vars(), 24 * per_hour + 7 + 6 + 5 + 4);
    let _ = obs;
}

#[test]
fn desk_history_csv_matches_generator() {
    // The committed CSV is the canonical desk history; it must stay in sync
    // with the generator settings that tests use in memory.
    let (read, dropped) = gtep::timeseries::load_hourly_csv(&data("desk_history_14d.csv")).unwrap();
    assert_eq!(dropped, 0);
    assert_eq!(read.n_days(), 14);
    let generated = generate(&SynthSpec::desk(14, 42));
    for day in 0..14 {
        for h in 0..24 {
            for z in 0..2 {
                let a = read.load[day][h][z];
                let b = generated.load[day][h][z];
                assert!((a - b).abs() < 5e-4, "load deviates at {day}/{h}/{z}: {a} vs {b}");
            }
            let a = read.wind[day][h][0];
            let b = generated.wind[day][h][0];
            assert!((a - b).abs() < 5e-4, "wind deviates at {day}/{h}");
        }
    }
}
