//! K-means over day observations: the plain Lloyd iteration (TKM) and the
//! two-stage variant (MKM) that re-clusters each coarse cluster to keep
//! extreme days visible, plus conversion of centroids into weighted
//! representative days.

use crate::error::GtepError;
use crate::timeseries::{denormalize, DayProfile, ObservationSet, HOURS};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    /// Centroids in normalized space, one per cluster.
    pub centroids: Vec<Vec<f64>>,
    /// Observation index -> cluster index.
    pub assignment: Vec<usize>,
    pub counts: Vec<usize>,
    /// Within-cluster sum of squared distances at the returned state.
    pub sse: f64,
    /// SSE after each iteration; non-increasing. For MKM this holds the
    /// stage-1 value followed by the refined total.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest-centroid assignment; ties break toward the lowest cluster index.
pub fn assign(data: &[&[f64]], centroids: &[Vec<f64>]) -> Vec<usize> {
    assert!(!centroids.is_empty());
    data.iter()
        .map(|obs| {
            let mut best = 0usize;
            let mut best_d = sq_dist(obs, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(obs, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

pub fn sse_of(data: &[&[f64]], assignment: &[usize], centroids: &[Vec<f64>]) -> f64 {
    data.iter()
        .zip(assignment)
        .map(|(obs, &c)| sq_dist(obs, &centroids[c]))
        .sum()
}

/// Cluster means. An empty cluster is reseeded with the observation farthest
/// from its own current centroid (ties to the lowest observation index);
/// its count stays zero until the next assignment pass picks it up.
pub fn recompute_centroids(
    data: &[&[f64]],
    assignment: &[usize],
    k: usize,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let dim = data[0].len();
    let mut centroids = vec![vec![0.0f64; dim]; k];
    let mut counts = vec![0usize; k];
    for (obs, &c) in data.iter().zip(assignment) {
        counts[c] += 1;
        for (d, &v) in obs.iter().enumerate() {
            centroids[c][d] += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            for v in &mut centroids[c] {
                *v *= inv;
            }
        }
    }
    // Reseed empties from the farthest observation.
    for c in 0..k {
        if counts[c] == 0 {
            let mut far = 0usize;
            let mut far_d = -1.0f64;
            for (i, obs) in data.iter().enumerate() {
                let d = sq_dist(obs, &centroids[assignment[i]]);
                if d > far_d {
                    far_d = d;
                    far = i;
                }
            }
            centroids[c] = data[far].to_vec();
        }
    }
    (centroids, counts)
}

pub const DEFAULT_MAX_ITER: usize = 300;

/// Traditional K-means: seeded start on K distinct observations, Lloyd
/// iterations until the assignment stops changing.
pub fn tkm(
    data: &[&[f64]],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusteringResult, GtepError> {
    let n = data.len();
    if k == 0 {
        return Err(GtepError::ClusterParam("k must be at least 1".into()));
    }
    if k > n {
        return Err(GtepError::ClusterParam(format!(
            "k = {k} exceeds the {n} observations"
        )));
    }

    // Partial Fisher-Yates draw of k distinct observation indices.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut centroids: Vec<Vec<f64>> = pool[..k].iter().map(|&i| data[i].to_vec()).collect();

    let mut assignment = assign(data, &centroids);
    let mut sse_trace = vec![sse_of(data, &assignment, &centroids)];
    let mut iterations = 0usize;
    let mut converged = false;
    let mut counts;

    loop {
        let (new_centroids, _) = recompute_centroids(data, &assignment, k);
        let new_assignment = assign(data, &new_centroids);
        iterations += 1;
        centroids = new_centroids;
        sse_trace.push(sse_of(data, &new_assignment, &centroids));
        if new_assignment == assignment {
            converged = true;
            break;
        }
        assignment = new_assignment;
        if iterations >= max_iter {
            break;
        }
    }

    // Restore the centroid-equals-member-mean invariant for the state that is
    // actually returned, then make sure no cluster is empty.
    let (c2, n2) = recompute_centroids(data, &assignment, k);
    centroids = c2;
    counts = n2;
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let mut far = usize::MAX;
        let mut far_d = -1.0f64;
        for (i, obs) in data.iter().enumerate() {
            if counts[assignment[i]] < 2 {
                continue;
            }
            let d = sq_dist(obs, &centroids[assignment[i]]);
            if d > far_d {
                far_d = d;
                far = i;
            }
        }
        assert!(far != usize::MAX, "no donor cluster for empty cluster fill");
        counts[assignment[far]] -= 1;
        assignment[far] = empty;
        counts[empty] += 1;
        let (c3, n3) = recompute_centroids(data, &assignment, k);
        centroids = c3;
        counts = n3;
    }
    let sse = sse_of(data, &assignment, &centroids);
    if sse_trace.last().copied().unwrap_or(f64::INFINITY) > sse {
        sse_trace.push(sse);
    }

    Ok(ClusteringResult {
        centroids,
        assignment,
        counts,
        sse,
        sse_trace,
        iterations,
        converged,
        seed,
    })
}

/// Seed for the stage-2 run inside MKM cluster `cluster`; splitmix64 over the
/// top-level seed keeps runs independent and reproducible.
pub fn stage_seed(seed: u64, cluster: usize) -> u64 {
    let mut z = seed ^ (cluster as u64).wrapping_mul(0x9E3779B97F4A7C15);
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Modified K-means: TKM into `k1` clusters, then TKM with `k2` inside each,
/// giving exactly `k1 * k2` clusters. Fails when a stage-1 cluster holds
/// fewer than `k2` members.
pub fn mkm(
    data: &[&[f64]],
    k1: usize,
    k2: usize,
    seed: u64,
) -> Result<ClusteringResult, GtepError> {
    if k2 == 0 {
        return Err(GtepError::ClusterParam("k2 must be at least 1".into()));
    }
    let stage1 = tkm(data, k1, seed, DEFAULT_MAX_ITER)?;
    for (c, &size) in stage1.counts.iter().enumerate() {
        if size < k2 {
            return Err(GtepError::SubClusterTooSmall {
                cluster: c,
                size,
                k2,
            });
        }
    }

    let k = k1 * k2;
    let dim = data[0].len();
    let mut centroids = vec![vec![0.0f64; dim]; k];
    let mut counts = vec![0usize; k];
    let mut assignment = vec![0usize; data.len()];
    let mut sse = 0.0f64;
    let mut iterations = stage1.iterations;
    let mut converged = stage1.converged;

    for c1 in 0..k1 {
        let member_ids: Vec<usize> = (0..data.len())
            .filter(|&i| stage1.assignment[i] == c1)
            .collect();
        let members: Vec<&[f64]> = member_ids.iter().map(|&i| data[i]).collect();
        let sub = tkm(&members, k2, stage_seed(seed, c1), DEFAULT_MAX_ITER)?;
        for (local, &global) in member_ids.iter().enumerate() {
            assignment[global] = c1 * k2 + sub.assignment[local];
        }
        for c2 in 0..k2 {
            centroids[c1 * k2 + c2] = sub.centroids[c2].clone();
            counts[c1 * k2 + c2] = sub.counts[c2];
        }
        sse += sub.sse;
        iterations += sub.iterations;
        converged &= sub.converged;
    }

    Ok(ClusteringResult {
        centroids,
        assignment,
        counts,
        sse,
        sse_trace: vec![stage1.sse, sse],
        iterations,
        converged,
        seed,
    })
}

/// Which clustering produced a representative-day set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMethod {
    Tkm { k: usize },
    Mkm { k1: usize, k2: usize },
}

impl ClusterMethod {
    /// Default two-stage split for a total of `k` days: the most balanced
    /// factor pair with the larger factor first, so 10 becomes (5, 2) and a
    /// prime k degenerates to (k, 1).
    pub fn mkm_for_k(k: usize) -> ClusterMethod {
        let mut k2 = 1;
        for d in 2..=k {
            if d * d > k {
                break;
            }
            if k.is_multiple_of(d) {
                k2 = d;
            }
        }
        ClusterMethod::Mkm { k1: k / k2, k2 }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClusterMethod::Tkm { .. } => "tkm",
            ClusterMethod::Mkm { .. } => "mkm",
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            ClusterMethod::Tkm { k } => k,
            ClusterMethod::Mkm { k1, k2 } => k1 * k2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepresentativeDay {
    /// Number of historical days this day stands for.
    pub weight: usize,
    pub profile: DayProfile,
}

#[derive(Debug, Clone)]
pub struct RepresentativeDaySet {
    pub load_zones: Vec<String>,
    pub wind_zones: Vec<String>,
    pub days: Vec<RepresentativeDay>,
    pub source: Option<ClusterMethod>,
    pub seed: Option<u64>,
}

impl RepresentativeDaySet {
    pub fn total_weight(&self) -> usize {
        self.days.iter().map(|d| d.weight).sum()
    }
}

/// Slice denormalized centroids into per-zone 24-hour profiles. Load divides
/// by the zone's historical peak (so beta * peak demand reproduces MW); wind
/// divides by the zone's historical maximum, giving capacity factors in
/// [0, 1].
pub fn to_representative_days(
    result: &ClusteringResult,
    obs: &ObservationSet,
    source: ClusterMethod,
) -> RepresentativeDaySet {
    assert!(
        result.counts.iter().all(|&c| c > 0),
        "representative days need nonempty clusters"
    );
    let nl = obs.load_zones.len();
    let nw = obs.wind_zones.len();
    let days = result
        .centroids
        .iter()
        .zip(&result.counts)
        .map(|(centroid, &count)| {
            let phys = denormalize(centroid, &obs.scaling);
            let mut beta = Vec::with_capacity(nl);
            for z in 0..nl {
                let peak = obs.load_peaks[z];
                let mut prof = [0.0f64; HOURS];
                for (h, p) in prof.iter_mut().enumerate() {
                    *p = if peak > 0.0 { phys[z * HOURS + h] / peak } else { 0.0 };
                }
                beta.push(prof);
            }
            let mut alpha = Vec::with_capacity(nw);
            for z in 0..nw {
                let peak = obs.wind_peaks[z];
                let mut prof = [0.0f64; HOURS];
                for (h, p) in prof.iter_mut().enumerate() {
                    *p = if peak > 0.0 {
                        phys[(nl + z) * HOURS + h] / peak
                    } else {
                        0.0
                    };
                }
                alpha.push(prof);
            }
            RepresentativeDay {
                weight: count,
                profile: DayProfile { beta, alpha },
            }
        })
        .collect();
    RepresentativeDaySet {
        load_zones: obs.load_zones.clone(),
        wind_zones: obs.wind_zones.clone(),
        days,
        source: Some(source),
        seed: Some(result.seed),
    }
}

/// 9 significant digits, the pinned formatting of the repday CSV.
fn fmt_pu(v: f64) -> String {
    format!("{v:.8e}")
}

/// Write the representative-day CSV: columns rep_day, weight, zone, feature,
/// hour (1-24), value_pu.
pub fn write_repdays_csv(set: &RepresentativeDaySet, path: &Path) -> Result<(), GtepError> {
    let mut out = String::new();
    if let Some(src) = &set.source {
        match src {
            ClusterMethod::Tkm { k } => {
                out.push_str(&format!("# source tkm k={k}"));
            }
            ClusterMethod::Mkm { k1, k2 } => {
                out.push_str(&format!("# source mkm k1={k1} k2={k2}"));
            }
        }
        if let Some(seed) = set.seed {
            out.push_str(&format!(" seed={seed}"));
        }
        out.push('\n');
    }
    out.push_str("rep_day,weight,zone,feature,hour,value_pu\n");
    for (r, day) in set.days.iter().enumerate() {
        for (z, zone) in set.load_zones.iter().enumerate() {
            for h in 0..HOURS {
                out.push_str(&format!(
                    "{},{},{},load,{},{}\n",
                    r + 1,
                    day.weight,
                    zone,
                    h + 1,
                    fmt_pu(day.profile.beta[z][h])
                ));
            }
        }
        for (z, zone) in set.wind_zones.iter().enumerate() {
            for h in 0..HOURS {
                out.push_str(&format!(
                    "{},{},{},wind,{},{}\n",
                    r + 1,
                    day.weight,
                    zone,
                    h + 1,
                    fmt_pu(day.profile.alpha[z][h])
                ));
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a representative-day CSV back.
pub fn read_repdays_csv(path: &Path) -> Result<RepresentativeDaySet, GtepError> {
    let text = std::fs::read_to_string(path)?;
    let mut source = None;
    let mut seed = None;
    let mut rows: Vec<(usize, usize, String, bool, usize, f64)> = Vec::new();
    let mut header_seen = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.starts_with('#') {
            for part in raw.trim_start_matches('#').split_whitespace() {
                if let Some(v) = part.strip_prefix("k=") {
                    source = Some(ClusterMethod::Tkm {
                        k: v.parse().unwrap_or(0),
                    });
                } else if let Some(v) = part.strip_prefix("seed=") {
                    seed = v.parse().ok();
                }
            }
            // mkm comments carry k1=/k2=.
            let get = |key: &str| -> Option<usize> {
                raw.split_whitespace()
                    .find_map(|p| p.strip_prefix(key))
                    .and_then(|v| v.parse().ok())
            };
            if let (Some(k1), Some(k2)) = (get("k1="), get("k2=")) {
                source = Some(ClusterMethod::Mkm { k1, k2 });
            }
            continue;
        }
        if !header_seen {
            if raw.trim() != "rep_day,weight,zone,feature,hour,value_pu" {
                return Err(GtepError::CsvParse {
                    line,
                    message: "unexpected repday header".into(),
                });
            }
            header_seen = true;
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(GtepError::CsvParse {
                line,
                message: "expected 6 fields".into(),
            });
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize, GtepError> {
            s.parse().map_err(|_| GtepError::CsvParse {
                line,
                message: format!("bad {what} `{s}`"),
            })
        };
        let rep = parse_usize(fields[0], "rep_day")?;
        let weight = parse_usize(fields[1], "weight")?;
        let is_load = match fields[3] {
            "load" => true,
            "wind" => false,
            other => {
                return Err(GtepError::CsvParse {
                    line,
                    message: format!("bad feature `{other}`"),
                })
            }
        };
        let hour = parse_usize(fields[4], "hour")?;
        if !(1..=HOURS).contains(&hour) {
            return Err(GtepError::CsvParse {
                line,
                message: format!("hour {hour} out of range"),
            });
        }
        let value = fields[5].parse::<f64>().map_err(|_| GtepError::CsvParse {
            line,
            message: format!("bad value `{}`", fields[5]),
        })?;
        rows.push((rep, weight, fields[2].to_string(), is_load, hour, value));
    }
    if rows.is_empty() {
        return Err(GtepError::CsvSchema("empty representative-day file".into()));
    }

    let n_days = rows.iter().map(|r| r.0).max().unwrap();
    let mut load_zones: Vec<String> = Vec::new();
    let mut wind_zones: Vec<String> = Vec::new();
    for r in &rows {
        let zones = if r.3 { &mut load_zones } else { &mut wind_zones };
        if !zones.contains(&r.2) {
            zones.push(r.2.clone());
        }
    }
    let mut days: Vec<RepresentativeDay> = (0..n_days)
        .map(|_| RepresentativeDay {
            weight: 0,
            profile: DayProfile {
                beta: vec![[f64::NAN; HOURS]; load_zones.len()],
                alpha: vec![[f64::NAN; HOURS]; wind_zones.len()],
            },
        })
        .collect();
    for (rep, weight, zone, is_load, hour, value) in rows {
        let day = &mut days[rep - 1];
        day.weight = weight;
        let (zones, target) = if is_load {
            (&load_zones, &mut day.profile.beta)
        } else {
            (&wind_zones, &mut day.profile.alpha)
        };
        let z = zones.iter().position(|s| *s == zone).unwrap();
        target[z][hour - 1] = value;
    }
    for (r, day) in days.iter().enumerate() {
        let complete = day
            .profile
            .beta
            .iter()
            .chain(day.profile.alpha.iter())
            .all(|prof| prof.iter().all(|v| v.is_finite()));
        if !complete || day.weight == 0 {
            return Err(GtepError::CsvSchema(format!(
                "representative day {} is incomplete",
                r + 1
            )));
        }
    }
    Ok(RepresentativeDaySet {
        load_zones,
        wind_zones,
        days,
        source,
        seed,
    })
}
