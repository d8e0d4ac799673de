//! Deterministic synthetic load/wind histories.
//!
//! Load follows a daily double-peak shape modulated by weekday and slow
//! seasonal factors; wind is a clamped AR(1) process. A few engineered
//! extreme days (demand spike, calm day, storm day) are planted so that
//! clustering methods differ in how well they keep the tails visible.

use crate::timeseries::{HourlyRecordSet, HOURS};
use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_days: usize,
    pub start: NaiveDate,
    /// (zone label, base demand MW)
    pub load_zones: Vec<(String, f64)>,
    /// (zone label, installed capacity MW)
    pub wind_zones: Vec<(String, f64)>,
    pub seed: u64,
}

impl SynthSpec {
    /// Small two-zone demo history used across tests and docs.
    pub fn desk(n_days: usize, seed: u64) -> SynthSpec {
        SynthSpec {
            n_days,
            start: NaiveDate::from_ymd_opt(2012, 1, 1).unwrap(),
            load_zones: vec![("west".into(), 150.0), ("east".into(), 100.0)],
            wind_zones: vec![("north".into(), 60.0)],
            seed,
        }
    }
}

fn daily_shape(h: usize) -> f64 {
    // Morning and evening peaks over a night valley.
    let t = h as f64;
    let morning = (-(t - 8.5).powi(2) / 8.0).exp();
    let evening = (-(t - 19.0).powi(2) / 10.0).exp();
    0.62 + 0.22 * morning + 0.3 * evening
}

pub fn generate(spec: &SynthSpec) -> HourlyRecordSet {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nl = spec.load_zones.len();
    let nw = spec.wind_zones.len();

    // Planted extremes, deterministic positions within the horizon. Each
    // extreme comes as a pair of similar days so a coarse clustering stage
    // never isolates a singleton.
    let peak_days = [spec.n_days / 3, spec.n_days / 3 + 1];
    let calm_days = [(2 * spec.n_days) / 3, (2 * spec.n_days) / 3 + 1];
    let storm_days = [
        spec.n_days.saturating_sub(3),
        spec.n_days.saturating_sub(2),
    ];

    let mut load = Vec::with_capacity(spec.n_days);
    let mut wind = Vec::with_capacity(spec.n_days);
    let mut wind_state: Vec<f64> = (0..nw).map(|_| rng.random_range(0.2..0.8)).collect();

    for day in 0..spec.n_days {
        let weekday = day % 7;
        let weekly = if weekday >= 5 { 0.85 } else { 1.0 };
        let seasonal = 1.0 + 0.12 * ((day as f64) * std::f64::consts::TAU / 365.0).cos();
        let day_factor: f64 = if day == peak_days[0] {
            1.35
        } else if day == peak_days[1] {
            1.32
        } else {
            rng.random_range(0.95..1.05)
        };

        let mut day_load = Vec::with_capacity(HOURS);
        let mut day_wind = Vec::with_capacity(HOURS);
        for h in 0..HOURS {
            let mut row = Vec::with_capacity(nl);
            for (z, (_, base)) in spec.load_zones.iter().enumerate() {
                let wiggle = 1.0 + 0.02 * rng.random_range(-1.0..1.0);
                // The second zone peaks slightly later to decorrelate zones.
                let shape = daily_shape((h + z) % HOURS);
                row.push(base * shape * weekly * seasonal * day_factor * wiggle);
            }
            day_load.push(row);

            let mut wrow = Vec::with_capacity(nw);
            for (z, (_, cap)) in spec.wind_zones.iter().enumerate() {
                let target: f64 = if calm_days.contains(&day) {
                    0.03
                } else if storm_days.contains(&day) {
                    0.95
                } else {
                    wind_state[z]
                };
                wind_state[z] = (0.85 * target + 0.15 * rng.random_range(0.0..1.0))
                    .clamp(0.0, 1.0);
                wrow.push(cap * wind_state[z]);
            }
            day_wind.push(wrow);
        }
        load.push(day_load);
        wind.push(day_wind);
    }

    HourlyRecordSet {
        load_zones: spec.load_zones.iter().map(|(z, _)| z.clone()).collect(),
        wind_zones: spec.wind_zones.iter().map(|(z, _)| z.clone()).collect(),
        load,
        wind,
        first_day: Some(spec.start),
    }
}

/// Write a record set as the hourly CSV the ingestion side reads.
pub fn write_history_csv(set: &HourlyRecordSet, path: &Path) -> std::io::Result<()> {
    let start = set
        .first_day
        .unwrap_or_else(|| NaiveDate::from_ymd_opt(2012, 1, 1).unwrap());
    let mut out = String::from("timestamp");
    for z in &set.load_zones {
        let _ = write!(out, ",load_{z}");
    }
    for z in &set.wind_zones {
        let _ = write!(out, ",wind_{z}");
    }
    out.push('\n');
    let mut date = start;
    for day in 0..set.n_days() {
        for h in 0..HOURS {
            let _ = write!(out, "{}T{:02}:00:00", date.format("%Y-%m-%d"), h);
            for z in 0..set.load_zones.len() {
                let _ = write!(out, ",{:.4}", set.load[day][h][z]);
            }
            for z in 0..set.wind_zones.len() {
                let _ = write!(out, ",{:.4}", set.wind[day][h][z]);
            }
            out.push('\n');
        }
        date = date.succ_opt().expect("date range");
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{build_day_observations, load_hourly_csv};

    #[test]
    fn deterministic_given_seed() {
        let a = generate(&SynthSpec::desk(10, 7));
        let b = generate(&SynthSpec::desk(10, 7));
        assert_eq!(a.load, b.load);
        assert_eq!(a.wind, b.wind);
        let c = generate(&SynthSpec::desk(10, 8));
        assert_ne!(a.load, c.load);
    }

    #[test]
    fn csv_roundtrip_day_count() {
        let set = generate(&SynthSpec::desk(14, 3));
        let f = tempfile::NamedTempFile::new().unwrap();
        write_history_csv(&set, f.path()).unwrap();
        let (read, dropped) = load_hourly_csv(f.path()).unwrap();
        assert_eq!(read.n_days(), 14);
        assert_eq!(dropped, 0);
        assert_eq!(read.load_zones, vec!["west", "east"]);
        let obs = build_day_observations(&read);
        assert_eq!(obs.observations[0].vector.len(), 24 * 3);
    }

    #[test]
    fn planted_peak_day_dominates() {
        let set = generate(&SynthSpec::desk(14, 11));
        let daily_total: Vec<f64> = (0..14)
            .map(|d| set.load[d].iter().flat_map(|h| h.iter()).sum())
            .collect();
        let peak_day = 14 / 3;
        let max_day = daily_total
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(max_day, peak_day);
    }
}
