//! Instance generation, certified runs and batch certification.
//!
//! Reports carry exact rationals as strings and a schema version. Every
//! field except `wall_time_ms` is a deterministic function of the inputs.

pub mod certify;
pub mod generate;
pub mod run;

pub use certify::{certify_suite, BatchConfig, CaseReport, CertifySummary, ConfigError};
pub use generate::{generate, BoundPolicy, Family, GenerateError, GeneratorSpec, WeightPolicy};
pub use run::{relabeling, run, run_with, BoundKind, References, RunError, RunParams, RunReport, Solver};

pub const REPORT_VERSION: u32 = 1;

/// Field names excluded from determinism comparisons.
pub const TIMING_FIELDS: &[&str] = &["wall_time_ms"];

/// Removes timing fields at every depth.
pub fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            for f in TIMING_FIELDS {
                map.remove(*f);
            }
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
