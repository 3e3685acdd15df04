use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{fmt_f64, parse_f64, write_string};
use crate::error::{Error, Result};
use crate::forward::{DataOrigin, EntryKind, MaskedMeasurementMatrix};
use crate::geometry::{angular_distance, MeasurementConfig};

/// Largest gap, in degrees, between a file angle and the ring position it is
/// assigned to. Also the slack allowed on the bistatic angle for measured rows.
pub const SNAP_TOLERANCE_DEG: f64 = 0.5;

/// How antenna columns identify positions on the rings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleConvention {
    /// 1-based antenna index.
    Index1,
    /// 0-based antenna index.
    Index0,
    /// Polar angle in degrees, snapped to the nearest ring position.
    Degrees,
}

/// Where the field values live. Column numbers are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldColumns {
    Scattered { re: usize, im: usize },
    /// Scattered field is `total - incident`.
    TotalIncident { total_re: usize, total_im: usize, incident_re: usize, incident_im: usize },
}

/// Keep only rows whose frequency column matches `hz` to 1 ppm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencySelector {
    pub column: usize,
    pub hz: f64,
}

/// Column layout of an external measurement table.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportMapping {
    pub tx_column: usize,
    pub rx_column: usize,
    pub fields: FieldColumns,
    pub angles: AngleConvention,
    pub frequency: Option<FrequencySelector>,
    pub delimiter: u8,
    /// Skip the first record.
    pub has_header: bool,
}

impl ImportMapping {
    /// `tx, rx, re, im` with 1-based indices and a header line, as written by
    /// [`export_measured_csv`].
    pub fn identity() -> Self {
        Self {
            tx_column: 0,
            rx_column: 1,
            fields: FieldColumns::Scattered { re: 2, im: 3 },
            angles: AngleConvention::Index1,
            frequency: None,
            delimiter: b',',
            has_header: true,
        }
    }

    fn columns(&self) -> Vec<(&'static str, usize)> {
        let mut cols = vec![("tx", self.tx_column), ("rx", self.rx_column)];
        match self.fields {
            FieldColumns::Scattered { re, im } => cols.extend([("scattered re", re), ("scattered im", im)]),
            FieldColumns::TotalIncident { total_re, total_im, incident_re, incident_im } => cols.extend([
                ("total re", total_re),
                ("total im", total_im),
                ("incident re", incident_re),
                ("incident im", incident_im),
            ]),
        }
        if let Some(f) = self.frequency {
            cols.push(("frequency", f.column));
        }
        cols
    }

    pub fn validate(&self) -> Result<()> {
        let cols = self.columns();
        for (i, (name, col)) in cols.iter().enumerate() {
            if let Some((other, _)) = cols[i + 1..].iter().find(|(_, c)| c == col) {
                return Err(Error::UnmappedColumn(format!(
                    "`{name}` and `{other}` both map to column {col}"
                )));
            }
        }
        Ok(())
    }
}

fn snap(value: f64, convention: AngleConvention, count: usize, kind: &'static str) -> Result<usize> {
    match convention {
        AngleConvention::Index1 | AngleConvention::Index0 => {
            let base = if convention == AngleConvention::Index1 { 1.0 } else { 0.0 };
            let index = value - base;
            if index.fract() != 0.0 || index < 0.0 || index >= count as f64 {
                return Err(Error::IndexOutOfRange { kind, index: value.max(0.0) as usize, len: count });
            }
            Ok(index as usize + 1)
        }
        AngleConvention::Degrees => {
            let step = 360.0 / count as f64;
            let k = (value / step).round();
            if (value - k * step).abs() > SNAP_TOLERANCE_DEG || !value.is_finite() {
                return Err(Error::AngleSnap { kind, angle_deg: value });
            }
            Ok((k as i64).rem_euclid(count as i64) as usize + 1)
        }
    }
}

/// Read an external table into a masked matrix for `config`.
///
/// Rows present are measured; absent `(m, n)` pairs become converted with
/// `constant`. Measured rows must sit at least `α - 0.5°` from their
/// transmitter.
pub fn import_external(
    path: &Path,
    mapping: &ImportMapping,
    config: &MeasurementConfig,
    constant: Complex64,
) -> Result<MaskedMeasurementMatrix> {
    mapping.validate()?;
    config.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .has_headers(mapping.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::MalformedHeader(format!("{other:?}")),
        })?;

    let (tx, rx) = (config.tx_count, config.rx_count);
    let mut entries = vec![constant; tx * rx];
    let mut mask = vec![EntryKind::Converted; tx * rx];
    let slack = SNAP_TOLERANCE_DEG.to_radians();

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::MalformedRow { line, reason: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let number = |name: &str, col: usize| -> Result<f64> {
            let raw = record.get(col).ok_or_else(|| {
                Error::UnmappedColumn(format!("`{name}` column {col} missing on line {line}"))
            })?;
            parse_f64(raw).ok_or_else(|| Error::MalformedRow {
                line,
                reason: format!("`{name}` value `{raw}` is not a number"),
            })
        };
        if let Some(sel) = mapping.frequency {
            if (number("frequency", sel.column)? - sel.hz).abs() > 1e-6 * sel.hz.abs() {
                continue;
            }
        }
        let m = snap(number("tx", mapping.tx_column)?, mapping.angles, tx, "transmitter")?;
        let n = snap(number("rx", mapping.rx_column)?, mapping.angles, rx, "receiver")?;
        let value = match mapping.fields {
            FieldColumns::Scattered { re, im } => {
                Complex64::new(number("scattered re", re)?, number("scattered im", im)?)
            }
            FieldColumns::TotalIncident { total_re, total_im, incident_re, incident_im } => {
                Complex64::new(number("total re", total_re)?, number("total im", total_im)?)
                    - Complex64::new(number("incident re", incident_re)?, number("incident im", incident_im)?)
            }
        };
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::MalformedRow { line, reason: "field value is not finite".into() });
        }
        let i = (m - 1) * rx + (n - 1);
        if mask[i] == EntryKind::Measured {
            return Err(Error::DuplicateRow { m, n });
        }
        let distance = angular_distance(config.rx_angle(n)?, config.tx_angle(m)?);
        if distance < config.bistatic_angle() - slack {
            return Err(Error::MaskInconsistent {
                m,
                n,
                reason: format!(
                    "row at angular distance {:.3} deg is inside the bistatic gap of {} deg",
                    distance.to_degrees(),
                    config.bistatic_angle_deg
                ),
            });
        }
        entries[i] = value;
        mask[i] = EntryKind::Measured;
    }
    MaskedMeasurementMatrix::from_parts(*config, constant, DataOrigin::Imported, entries, mask)
}

/// Write the measured entries as `tx,rx,re,im` with 1-based indices.
pub fn export_measured_csv(matrix: &MaskedMeasurementMatrix, path: &Path) -> Result<()> {
    let rx = matrix.config().rx_count;
    let mut out = String::from("tx,rx,re,im\n");
    for (i, (v, kind)) in matrix.entries().iter().zip(matrix.mask()).enumerate() {
        if *kind == EntryKind::Measured {
            let _ = writeln!(out, "{},{},{},{}", i / rx + 1, i % rx + 1, fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    write_string(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{synthesize, ForwardModel, ObjectSet};

    fn preset_matrix(constant: Complex64) -> MaskedMeasurementMatrix {
        let cfg = MeasurementConfig::fresnel();
        synthesize(&cfg, &ObjectSet::fresnel_two_disks(cfg.eps_b), constant, ForwardModel::Point).unwrap()
    }

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn identity_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Complex64::new(0.5, 0.0);
        let matrix = preset_matrix(c);
        let path = dir.path().join("export.csv");
        export_measured_csv(&matrix, &path).unwrap();
        let back = import_external(&path, &ImportMapping::identity(), matrix.config(), c).unwrap();
        assert_eq!(back.entries(), matrix.entries());
        assert_eq!(back.mask(), matrix.mask());
        assert_eq!(back.origin(), DataOrigin::Imported);
        for m in 1..=36 {
            let measured = back.mask_column(m).unwrap().iter().filter(|k| **k == EntryKind::Measured).count();
            assert_eq!(measured, 49);
        }
    }

    #[test]
    fn total_minus_incident_in_degrees() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = MeasurementConfig::fresnel();
        let text = "# freq; tx_deg; rx_deg; tot_re; tot_im; inc_re; inc_im\n\
                    4e9;0.2;180.3;1.5;2.0;0.5;0.25\n\
                    2e9;0;180;9;9;0;0\n\
                    4e9;10;-120.1;1;1;1;1\n";
        let path = write(&dir, "raw.txt", text);
        let mapping = ImportMapping {
            tx_column: 1,
            rx_column: 2,
            fields: FieldColumns::TotalIncident { total_re: 3, total_im: 4, incident_re: 5, incident_im: 6 },
            angles: AngleConvention::Degrees,
            frequency: Some(FrequencySelector { column: 0, hz: 4e9 }),
            delimiter: b';',
            has_header: false,
        };
        let c = Complex64::new(0.0, 0.0);
        let matrix = import_external(&path, &mapping, &cfg, c).unwrap();
        assert_eq!(matrix.get(37, 1).unwrap(), Complex64::new(1.0, 1.75));
        assert_eq!(matrix.kind(37, 1).unwrap(), EntryKind::Measured);
        // -120.1° snaps to receiver 49 at 240°.
        assert_eq!(matrix.get(49, 2).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(matrix.kind(49, 2).unwrap(), EntryKind::Measured);
        let measured = matrix.mask().iter().filter(|k| **k == EntryKind::Measured).count();
        assert_eq!(measured, 2);
    }

    #[test]
    fn import_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = MeasurementConfig::fresnel();
        let c = Complex64::new(0.0, 0.0);
        let id = ImportMapping::identity();

        let dup = write(&dir, "dup.csv", "tx,rx,re,im\n1,37,1,0\n1,37,2,0\n");
        assert!(matches!(import_external(&dup, &id, &cfg, c), Err(Error::DuplicateRow { m: 1, n: 37 })));

        let gap = write(&dir, "gap.csv", "tx,rx,re,im\n1,3,1,0\n");
        assert!(matches!(import_external(&gap, &id, &cfg, c), Err(Error::MaskInconsistent { .. })));

        let short = write(&dir, "short.csv", "tx,rx,re,im\n1,37,1\n");
        assert!(matches!(import_external(&short, &id, &cfg, c), Err(Error::UnmappedColumn(_))));

        let text = write(&dir, "text.csv", "tx,rx,re,im\n1,37,x,0\n");
        assert!(matches!(import_external(&text, &id, &cfg, c), Err(Error::MalformedRow { .. })));

        let clash = ImportMapping { fields: FieldColumns::Scattered { re: 1, im: 3 }, ..id.clone() };
        assert!(matches!(import_external(&text, &clash, &cfg, c), Err(Error::UnmappedColumn(_))));

        let degrees = ImportMapping { angles: AngleConvention::Degrees, ..id.clone() };
        let off = write(&dir, "off.csv", "tx,rx,re,im\n0,182.6,1,0\n");
        assert!(matches!(import_external(&off, &degrees, &cfg, c), Err(Error::AngleSnap { .. })));

        let missing = dir.path().join("missing.csv");
        assert!(matches!(import_external(&missing, &id, &cfg, c), Err(Error::Io { .. })));
    }
}
