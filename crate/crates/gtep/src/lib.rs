//! Generation, transmission and storage expansion planning driven by
//! representative days.
//!
//! The pipeline: ingest hourly load/wind history (`timeseries`), reduce it to
//! weighted representative days with plain or two-stage K-means
//! (`clustering`), assemble the expansion MILP over a validated power system
//! (`system`, `model`), solve it with the bundled simplex/branch-and-bound
//! crate, and quantify the clustering-induced cost error against the exact
//! full-horizon solve (`evaluation`).

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod synth;
pub mod system;
pub mod timeseries;

pub use error::GtepError;
