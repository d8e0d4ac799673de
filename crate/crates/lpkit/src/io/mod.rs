//! Problem and solution file formats: LP text, fixed MPS, and `name value`
//! solution listings.

pub mod lp;
pub mod mps;
pub mod sol;

use crate::error::LpError;
use crate::problem::Problem;
use std::collections::HashMap;
use std::path::Path;

/// Supported problem file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    LpText,
    Mps,
}

impl FileFormat {
    /// Pick a format from a file extension (`.lp` / `.mps`).
    pub fn from_path(path: &Path) -> Option<FileFormat> {
        match path.extension()?.to_str()? {
            "lp" => Some(FileFormat::LpText),
            "mps" => Some(FileFormat::Mps),
            _ => None,
        }
    }
}

/// Write `problem` to `path` in the chosen format.
pub fn export_problem(problem: &Problem, path: &Path, format: FileFormat) -> Result<(), LpError> {
    let text = match format {
        FileFormat::LpText => lp::write_lp(problem)?,
        FileFormat::Mps => mps::write_mps(problem)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Read a problem back from `path`.
pub fn import_problem(path: &Path, format: FileFormat) -> Result<Problem, LpError> {
    let text = std::fs::read_to_string(path)?;
    match format {
        FileFormat::LpText => lp::parse_lp(&text),
        FileFormat::Mps => mps::parse_mps(&text),
    }
}

/// Shortest decimal representation that parses back to the identical f64.
pub(crate) fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == 0.0 {
        "0".into()
    } else {
        let s = format!("{v:?}");
        s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
    }
}

/// Map each variable name to its id, rejecting duplicates.
pub(crate) fn name_index(problem: &Problem) -> Result<HashMap<&str, usize>, LpError> {
    let mut map = HashMap::with_capacity(problem.num_vars());
    for (j, v) in problem.vars().iter().enumerate() {
        if map.insert(v.name.as_str(), j).is_some() {
            return Err(LpError::InvalidName(format!(
                "duplicate variable name `{}`",
                v.name
            )));
        }
    }
    Ok(map)
}
