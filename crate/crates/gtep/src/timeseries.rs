//! Hourly load/wind history: CSV ingestion, day assembly, and min-max
//! normalization of the per-day observation vectors fed to clustering.

use crate::error::GtepError;
use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use std::collections::BTreeMap;
use std::path::Path;

pub const HOURS: usize = 24;

/// One year-ish of complete hourly days, per zone.
#[derive(Debug, Clone)]
pub struct HourlyRecordSet {
    pub load_zones: Vec<String>,
    pub wind_zones: Vec<String>,
    /// `load[day][hour][zone]`, MW.
    pub load: Vec<Vec<Vec<f64>>>,
    /// `wind[day][hour][zone]`, MW or per unit of installed.
    pub wind: Vec<Vec<Vec<f64>>>,
    pub first_day: Option<NaiveDate>,
}

impl HourlyRecordSet {
    pub fn n_days(&self) -> usize {
        self.load.len()
    }

    pub fn n_features(&self) -> usize {
        self.load_zones.len() + self.wind_zones.len()
    }

    /// Historical peak per load zone, MW.
    pub fn load_peaks(&self) -> Vec<f64> {
        peaks(&self.load, self.load_zones.len())
    }

    /// Historical peak per wind zone.
    pub fn wind_peaks(&self) -> Vec<f64> {
        peaks(&self.wind, self.wind_zones.len())
    }
}

fn peaks(data: &[Vec<Vec<f64>>], zones: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; zones];
    for day in data {
        for hour in day {
            for (z, &v) in hour.iter().enumerate() {
                out[z] = out[z].max(v);
            }
        }
    }
    out
}

/// Column mapping for the hourly CSV: a timestamp column plus one column per
/// load and wind zone.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub timestamp: String,
    /// (column name, zone label)
    pub load: Vec<(String, String)>,
    pub wind: Vec<(String, String)>,
}

impl CsvSchema {
    /// Derive the mapping from a header: `timestamp`, `load_<zone>`,
    /// `wind_<zone>`.
    pub fn from_header(header: &[String]) -> Result<CsvSchema, GtepError> {
        let mut schema = CsvSchema {
            timestamp: String::new(),
            load: Vec::new(),
            wind: Vec::new(),
        };
        for name in header {
            if name == "timestamp" {
                schema.timestamp = name.clone();
            } else if let Some(zone) = name.strip_prefix("load_") {
                schema.load.push((name.clone(), zone.to_string()));
            } else if let Some(zone) = name.strip_prefix("wind_") {
                schema.wind.push((name.clone(), zone.to_string()));
            } else {
                return Err(GtepError::CsvSchema(format!(
                    "unrecognized column `{name}` (expected timestamp, load_<zone>, wind_<zone>)"
                )));
            }
        }
        if schema.timestamp.is_empty() {
            return Err(GtepError::CsvSchema("missing `timestamp` column".into()));
        }
        if schema.load.is_empty() || schema.wind.is_empty() {
            return Err(GtepError::CsvSchema(
                "need at least one load_<zone> and one wind_<zone> column".into(),
            ));
        }
        Ok(schema)
    }
}

fn parse_stamp(s: &str, line: usize) -> Result<NaiveDateTime, GtepError> {
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt);
        }
    }
    Err(GtepError::CsvParse {
        line,
        message: format!("bad timestamp `{s}`"),
    })
}

/// Load an hourly CSV, deriving the column mapping from its header.
///
/// Leading and trailing partial days are dropped (their count is returned);
/// gaps or duplicate timestamps anywhere else are rejected.
pub fn load_hourly_csv(path: &Path) -> Result<(HourlyRecordSet, usize), GtepError> {
    load_hourly_csv_with(path, None)
}

/// Same as [`load_hourly_csv`] with an explicit column mapping; columns not
/// named in the schema are ignored.
pub fn load_hourly_csv_with(
    path: &Path,
    schema: Option<&CsvSchema>,
) -> Result<(HourlyRecordSet, usize), GtepError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| GtepError::Io(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| GtepError::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let derived;
    let schema = match schema {
        Some(s) => {
            for (col, _) in s.load.iter().chain(&s.wind) {
                if !header.contains(col) {
                    return Err(GtepError::CsvSchema(format!(
                        "schema names column `{col}` which the file lacks"
                    )));
                }
            }
            if !header.contains(&s.timestamp) {
                return Err(GtepError::CsvSchema(format!(
                    "schema names timestamp column `{}` which the file lacks",
                    s.timestamp
                )));
            }
            if s.load.is_empty() || s.wind.is_empty() {
                return Err(GtepError::CsvSchema(
                    "schema needs at least one load and one wind column".into(),
                ));
            }
            s
        }
        None => {
            derived = CsvSchema::from_header(&header)?;
            &derived
        }
    };

    let col_of = |name: &str| header.iter().position(|h| h == name).unwrap();
    let ts_col = col_of(&schema.timestamp);
    let load_cols: Vec<usize> = schema.load.iter().map(|(c, _)| col_of(c)).collect();
    let wind_cols: Vec<usize> = schema.wind.iter().map(|(c, _)| col_of(c)).collect();

    let mut rows: Vec<(NaiveDateTime, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut prev: Option<NaiveDateTime> = None;
    for (k, record) in reader.records().enumerate() {
        let line = k + 2; // header is line 1
        let record = record.map_err(|e| GtepError::CsvParse {
            line,
            message: e.to_string(),
        })?;
        let stamp = parse_stamp(&record[ts_col], line)?;
        if let Some(p) = prev {
            if stamp == p {
                return Err(GtepError::CsvParse {
                    line,
                    message: format!("duplicate timestamp {stamp}"),
                });
            }
            if stamp != p + TimeDelta::hours(1) {
                return Err(GtepError::CsvParse {
                    line,
                    message: format!("gap or disorder: {p} followed by {stamp}"),
                });
            }
        }
        prev = Some(stamp);
        let parse_cell = |col: usize, what: &str| -> Result<f64, GtepError> {
            let raw = &record[col];
            let v = raw.parse::<f64>().map_err(|_| GtepError::CsvParse {
                line,
                message: format!("bad {what} value `{raw}`"),
            })?;
            if v < 0.0 || !v.is_finite() {
                return Err(GtepError::CsvParse {
                    line,
                    message: format!("{what} value {v} must be finite and nonnegative"),
                });
            }
            Ok(v)
        };
        let load: Vec<f64> = load_cols
            .iter()
            .map(|&c| parse_cell(c, "load"))
            .collect::<Result<_, _>>()?;
        let wind: Vec<f64> = wind_cols
            .iter()
            .map(|&c| parse_cell(c, "wind"))
            .collect::<Result<_, _>>()?;
        rows.push((stamp, load, wind));
    }

    // Group into calendar days of exactly 24 entries.
    type HourEntry = (u32, Vec<f64>, Vec<f64>);
    let mut by_day: BTreeMap<NaiveDate, Vec<HourEntry>> = BTreeMap::new();
    for (stamp, load, wind) in rows {
        by_day
            .entry(stamp.date())
            .or_default()
            .push((stamp.time().format("%H").to_string().parse().unwrap(), load, wind));
    }
    let mut dropped = 0usize;
    let mut set = HourlyRecordSet {
        load_zones: schema.load.iter().map(|(_, z)| z.clone()).collect(),
        wind_zones: schema.wind.iter().map(|(_, z)| z.clone()).collect(),
        load: Vec::new(),
        wind: Vec::new(),
        first_day: None,
    };
    for (date, mut entries) in by_day {
        if entries.len() != HOURS {
            // Continuity was already enforced, so short days can only sit at
            // the edges of the file.
            dropped += 1;
            continue;
        }
        entries.sort_by_key(|e| e.0);
        set.first_day.get_or_insert(date);
        set.load.push(entries.iter().map(|e| e.1.clone()).collect());
        set.wind.push(entries.iter().map(|e| e.2.clone()).collect());
    }
    if set.load.is_empty() {
        return Err(GtepError::CsvSchema("no complete days in input".into()));
    }
    Ok((set, dropped))
}

/// One day flattened for clustering: load zones first, then wind zones,
/// hour-major within each zone.
#[derive(Debug, Clone)]
pub struct DayObservation {
    pub day_index: usize,
    pub vector: Vec<f64>,
}

/// Per-dimension min-max scaling parameters.
#[derive(Debug, Clone)]
pub struct ScalingParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingParams {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn is_constant(&self, d: usize) -> bool {
        self.max[d] <= self.min[d]
    }
}

/// Normalized observations plus everything needed to map centroids back to
/// physical profiles.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    pub observations: Vec<DayObservation>,
    pub scaling: ScalingParams,
    pub load_zones: Vec<String>,
    pub wind_zones: Vec<String>,
    /// Historical peak per load zone, MW; β profiles divide by these.
    pub load_peaks: Vec<f64>,
    /// Historical peak per wind zone; α profiles divide by these.
    pub wind_peaks: Vec<f64>,
}

impl ObservationSet {
    pub fn n_features(&self) -> usize {
        self.load_zones.len() + self.wind_zones.len()
    }

    pub fn vectors(&self) -> Vec<&[f64]> {
        self.observations.iter().map(|o| o.vector.as_slice()).collect()
    }
}

/// A single day's per-unit profiles: demand factors per load zone and wind
/// capacity factors per wind zone.
#[derive(Debug, Clone)]
pub struct DayProfile {
    pub beta: Vec<[f64; HOURS]>,
    pub alpha: Vec<[f64; HOURS]>,
}

/// The full chronological history as per-unit daily profiles.
#[derive(Debug, Clone)]
pub struct DailyProfiles {
    pub load_zones: Vec<String>,
    pub wind_zones: Vec<String>,
    pub days: Vec<DayProfile>,
}

impl DailyProfiles {
    pub fn n_days(&self) -> usize {
        self.days.len()
    }
}

/// Convert raw history into per-unit profiles by dividing each zone by its
/// historical peak, the same convention used for representative days.
pub fn history_to_daily_profiles(records: &HourlyRecordSet) -> DailyProfiles {
    let load_peaks = records.load_peaks();
    let wind_peaks = records.wind_peaks();
    let nl = records.load_zones.len();
    let nw = records.wind_zones.len();
    let days = (0..records.n_days())
        .map(|day| {
            let mut beta = vec![[0.0f64; HOURS]; nl];
            let mut alpha = vec![[0.0f64; HOURS]; nw];
            for h in 0..HOURS {
                for z in 0..nl {
                    if load_peaks[z] > 0.0 {
                        beta[z][h] = records.load[day][h][z] / load_peaks[z];
                    }
                }
                for z in 0..nw {
                    if wind_peaks[z] > 0.0 {
                        alpha[z][h] = records.wind[day][h][z] / wind_peaks[z];
                    }
                }
            }
            DayProfile { beta, alpha }
        })
        .collect();
    DailyProfiles {
        load_zones: records.load_zones.clone(),
        wind_zones: records.wind_zones.clone(),
        days,
    }
}

/// Min-max normalize each dimension to [0, 1]; constant dimensions map to 0.
pub fn normalize(raw: &[Vec<f64>]) -> (Vec<Vec<f64>>, ScalingParams) {
    assert!(!raw.is_empty(), "normalize needs at least one vector");
    let dim = raw[0].len();
    let mut min = vec![f64::INFINITY; dim];
    let mut max = vec![f64::NEG_INFINITY; dim];
    for v in raw {
        for (d, &x) in v.iter().enumerate() {
            min[d] = min[d].min(x);
            max[d] = max[d].max(x);
        }
    }
    let params = ScalingParams { min, max };
    let scaled = raw
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(d, &x)| {
                    if params.is_constant(d) {
                        0.0
                    } else {
                        (x - params.min[d]) / (params.max[d] - params.min[d])
                    }
                })
                .collect()
        })
        .collect();
    (scaled, params)
}

/// Inverse of [`normalize`]; constant dimensions recover their minimum.
pub fn denormalize(scaled: &[f64], params: &ScalingParams) -> Vec<f64> {
    scaled
        .iter()
        .enumerate()
        .map(|(d, &x)| {
            if params.is_constant(d) {
                params.min[d]
            } else {
                params.min[d] + x * (params.max[d] - params.min[d])
            }
        })
        .collect()
}

/// Flatten a record set into normalized per-day observations.
pub fn build_day_observations(records: &HourlyRecordSet) -> ObservationSet {
    assert!(records.n_days() >= 1, "need at least one day");
    let nl = records.load_zones.len();
    let nw = records.wind_zones.len();
    let dim = HOURS * (nl + nw);
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(records.n_days());
    for day in 0..records.n_days() {
        let mut v = Vec::with_capacity(dim);
        for z in 0..nl {
            for h in 0..HOURS {
                v.push(records.load[day][h][z]);
            }
        }
        for z in 0..nw {
            for h in 0..HOURS {
                v.push(records.wind[day][h][z]);
            }
        }
        raw.push(v);
    }
    let (scaled, scaling) = normalize(&raw);
    ObservationSet {
        observations: scaled
            .into_iter()
            .enumerate()
            .map(|(day_index, vector)| DayObservation { day_index, vector })
            .collect(),
        scaling,
        load_zones: records.load_zones.clone(),
        wind_zones: records.wind_zones.clone(),
        load_peaks: records.load_peaks(),
        wind_peaks: records.wind_peaks(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(rows: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "timestamp,load_west,wind_north").unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f
    }

    fn hourly_rows(start: &str, n: usize) -> Vec<String> {
        let mut t = NaiveDateTime::parse_from_str(start, "%Y-%m-%dT%H:%M:%S").unwrap();
        let mut out = Vec::new();
        for k in 0..n {
            out.push(format!(
                "{},{},{}",
                t.format("%Y-%m-%dT%H:%M:%S"),
                100.0 + (k % 24) as f64,
                (k % 7) as f64
            ));
            t += TimeDelta::hours(1);
        }
        out
    }

    #[test]
    fn two_complete_days() {
        let f = write_csv(&hourly_rows("2012-03-01T00:00:00", 48));
        let (set, dropped) = load_hourly_csv(f.path()).unwrap();
        assert_eq!(set.n_days(), 2);
        assert_eq!(dropped, 0);
    }

    #[test]
    fn trailing_partial_day_dropped_with_warning() {
        let f = write_csv(&hourly_rows("2012-03-01T00:00:00", 50));
        let (set, dropped) = load_hourly_csv(f.path()).unwrap();
        assert_eq!(set.n_days(), 2);
        assert_eq!(dropped, 1);
    }

    #[test]
    fn leading_partial_day_dropped() {
        let f = write_csv(&hourly_rows("2012-03-01T20:00:00", 4 + 24));
        let (set, dropped) = load_hourly_csv(f.path()).unwrap();
        assert_eq!(set.n_days(), 1);
        assert_eq!(dropped, 1);
    }

    #[test]
    fn leap_year_has_366_days() {
        let f = write_csv(&hourly_rows("2012-01-01T00:00:00", 8784));
        let (set, dropped) = load_hourly_csv(f.path()).unwrap();
        assert_eq!(set.n_days(), 366);
        assert_eq!(dropped, 0);
    }

    #[test]
    fn duplicate_timestamp_rejected() {
        let mut rows = hourly_rows("2012-03-01T00:00:00", 24);
        rows.insert(5, rows[4].clone());
        let f = write_csv(&rows);
        let err = load_hourly_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn gap_rejected_with_line_number() {
        let mut rows = hourly_rows("2012-03-01T00:00:00", 24);
        rows.remove(10);
        let f = write_csv(&rows);
        let err = load_hourly_csv(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gap"), "{msg}");
        assert!(msg.contains("line 12"), "{msg}");
    }

    #[test]
    fn malformed_value_includes_line() {
        let mut rows = hourly_rows("2012-03-01T00:00:00", 24);
        rows[3] = rows[3].replace("103", "oops");
        let f = write_csv(&rows);
        let err = load_hourly_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 5"), "{err}");
    }

    #[test]
    fn negative_load_rejected() {
        let mut rows = hourly_rows("2012-03-01T00:00:00", 24);
        rows[0] = "2012-03-01T00:00:00,-5,0".into();
        let f = write_csv(&rows);
        assert!(load_hourly_csv(f.path()).is_err());
    }

    #[test]
    fn observation_layout_and_length() {
        let f = write_csv(&hourly_rows("2012-03-01T00:00:00", 48));
        let (set, _) = load_hourly_csv(f.path()).unwrap();
        let obs = build_day_observations(&set);
        assert_eq!(obs.observations.len(), 2);
        assert_eq!(obs.observations[0].vector.len(), 48);
        assert_eq!(obs.observations[1].day_index, 1);
    }

    #[test]
    fn explicit_schema_ignores_extra_columns() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "stamp,load_west,junk,wind_north").unwrap();
        let mut t = NaiveDateTime::parse_from_str("2012-03-01T00:00:00", "%Y-%m-%dT%H:%M:%S").unwrap();
        for k in 0..24 {
            writeln!(f, "{},{},x,{}", t.format("%Y-%m-%dT%H:%M:%S"), 100 + k, k % 5).unwrap();
            t += TimeDelta::hours(1);
        }
        let schema = CsvSchema {
            timestamp: "stamp".into(),
            load: vec![("load_west".into(), "west".into())],
            wind: vec![("wind_north".into(), "north".into())],
        };
        let (set, _) = load_hourly_csv_with(f.path(), Some(&schema)).unwrap();
        assert_eq!(set.n_days(), 1);
        assert_eq!(set.load_zones, vec!["west"]);
        // The default loader rejects the unknown column.
        assert!(load_hourly_csv(f.path()).is_err());
    }

    #[test]
    fn normalize_examples() {
        let raw = vec![vec![0.0, 7.0], vec![200.0, 7.0], vec![50.0, 7.0]];
        let (scaled, params) = normalize(&raw);
        assert_eq!(scaled[2][0], 0.25);
        assert_eq!(scaled[1][0], 1.0);
        // Constant dimension maps to zero, denormalizes to its min.
        assert_eq!(scaled[0][1], 0.0);
        assert_eq!(denormalize(&scaled[0], &params)[1], 7.0);
    }

    #[test]
    fn normalization_monotone() {
        let raw = vec![vec![1.0, 5.0], vec![3.0, 9.0], vec![2.0, 7.0]];
        let (scaled, _) = normalize(&raw);
        // raw[0] <= raw[2] componentwise implies scaled[0] <= scaled[2].
        assert!(scaled[0][0] <= scaled[2][0] && scaled[0][1] <= scaled[2][1]);
    }
}
