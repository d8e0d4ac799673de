//! Run manifests: everything needed to replay a command byte-identically,
//! including the wall times that feed the report's time columns.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize, Clone)]
pub struct Manifest {
    pub command: String,
    pub args: ManifestArgs,
    pub tolerances: Tolerances,
    /// Measured during the original run; a rerun reuses these values so the
    /// report files come out byte-identical.
    #[serde(default)]
    pub timing: Timing,
}

#[derive(Debug, Serialize, Deserialize, Clone, Default)]
pub struct ManifestArgs {
    pub input: Option<PathBuf>,
    pub system: Option<PathBuf>,
    pub history: Option<PathBuf>,
    pub repdays: Option<PathBuf>,
    pub method: Option<String>,
    pub k: Option<usize>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub seed: Option<u64>,
    pub k_grid: Option<Vec<usize>>,
    pub methods: Option<Vec<String>>,
    pub seed_list: Option<Vec<u64>>,
    pub exact_only: Option<bool>,
    pub gap: Option<f64>,
    pub export: Option<PathBuf>,
    pub days: Option<usize>,
    pub profile: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, Clone, Copy)]
pub struct Tolerances {
    pub feas_rel: f64,
    pub feas_abs_mw: f64,
    pub int_tol: f64,
    pub mip_gap: f64,
}

impl Tolerances {
    pub fn with_gap(gap: f64) -> Tolerances {
        Tolerances {
            feas_rel: gtep::model::FEAS_REL,
            feas_abs_mw: gtep::model::FEAS_ABS_MW,
            int_tol: gtep::model::INT_TOL,
            mip_gap: gap,
        }
    }
}

#[derive(Debug, Serialize, Deserialize, Clone, Default)]
pub struct Timing {
    pub exact_seconds: Option<f64>,
    #[serde(default)]
    pub rows: Vec<RowTiming>,
}

#[derive(Debug, Serialize, Deserialize, Clone)]
pub struct RowTiming {
    pub method: String,
    pub k: usize,
    pub seed: u64,
    pub step1_seconds: f64,
    pub step2_seconds: f64,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join("manifest.toml");
        std::fs::write(&path, toml::to_string_pretty(self)?)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> anyhow::Result<Manifest> {
        Ok(toml::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Absolutize a path so the manifest replays from anywhere.
pub fn absolute(path: &Path) -> PathBuf {
    std::fs::canonicalize(path).unwrap_or_else(|_| {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            std::env::current_dir()
                .map(|d| d.join(path))
                .unwrap_or_else(|_| path.to_path_buf())
        }
    })
}
