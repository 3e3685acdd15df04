//! File formats: canonical datasets, scenario files and presets, external
//! measurement import, and indicator map export.
//!
//! Every angle in a file is in degrees. Floating-point values are written with
//! 17 significant digits so that parsing them back is exact.

mod dataset;
mod import;
mod map;
mod scenario;

pub use dataset::{load_dataset, parse_dataset, save_dataset, write_dataset, DATASET_MAGIC};
pub use import::{
    export_measured_csv, import_external, AngleConvention, FieldColumns, FrequencySelector,
    ImportMapping, SNAP_TOLERANCE_DEG,
};
pub use map::{export_map, read_map_csv, MapFormat};
pub use scenario::{load_scenario, parse_scenario, preset, Scenario, PRESETS};

use num_complex::Complex64;

use crate::error::Error;

/// 17 significant digits, enough to recover any `f64` exactly.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_f64(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok()
}

/// Parse `RE` or `RE,IM` (also `RE IM`).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let parts: Vec<&str> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    match parts.as_slice() {
        [re] => Some(Complex64::new(parse_f64(re)?, 0.0)),
        [re, im] => Some(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
        _ => None,
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &std::path::Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
