use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{fmt_f64, parse_f64, read_to_string, write_string, SNAP_TOLERANCE_DEG};
use crate::error::{Error, Result};
use crate::forward::{DataOrigin, EntryKind, ForwardModel, MaskedMeasurementMatrix};
use crate::geometry::{angular_distance, MeasurementConfig};

/// First line of every canonical dataset file.
pub const DATASET_MAGIC: &str = "# aperture-dsm dataset v1";

const COLUMNS: &str = "m,n,theta_m_deg,theta_n_deg,flag,re,im";

const HEADER_KEYS: [&str; 11] = [
    "frequency_hz",
    "eps_b",
    "mu_b",
    "tx_radius",
    "rx_radius",
    "tx_count",
    "rx_count",
    "alpha_deg",
    "c_re",
    "c_im",
    "model",
];

fn model_tag(origin: DataOrigin) -> String {
    match origin {
        DataOrigin::Synthetic(ForwardModel::Point) => "point".into(),
        DataOrigin::Synthetic(ForwardModel::Disk { quad_points }) => format!("disk:{quad_points}"),
        DataOrigin::Imported => "imported".into(),
    }
}

fn parse_model_tag(tag: &str) -> Option<DataOrigin> {
    match tag {
        "point" => Some(DataOrigin::Synthetic(ForwardModel::Point)),
        "imported" => Some(DataOrigin::Imported),
        _ => {
            let q = tag.strip_prefix("disk:")?.parse().ok()?;
            Some(DataOrigin::Synthetic(ForwardModel::Disk { quad_points: q }))
        }
    }
}

/// Serialise `matrix` in the canonical text format.
pub fn write_dataset(matrix: &MaskedMeasurementMatrix) -> String {
    let cfg = matrix.config();
    let c = matrix.constant();
    let mut out = String::new();
    let _ = writeln!(out, "{DATASET_MAGIC}");
    let _ = writeln!(out, "frequency_hz = {}", fmt_f64(cfg.frequency_hz));
    let _ = writeln!(out, "eps_b = {}", fmt_f64(cfg.eps_b));
    let _ = writeln!(out, "mu_b = {}", fmt_f64(cfg.mu_b));
    let _ = writeln!(out, "tx_radius = {}", fmt_f64(cfg.tx_radius));
    let _ = writeln!(out, "rx_radius = {}", fmt_f64(cfg.rx_radius));
    let _ = writeln!(out, "tx_count = {}", cfg.tx_count);
    let _ = writeln!(out, "rx_count = {}", cfg.rx_count);
    let _ = writeln!(out, "alpha_deg = {}", fmt_f64(cfg.bistatic_angle_deg));
    let _ = writeln!(out, "c_re = {}", fmt_f64(c.re));
    let _ = writeln!(out, "c_im = {}", fmt_f64(c.im));
    let _ = writeln!(out, "model = {}", model_tag(matrix.origin()));
    let _ = writeln!(out, "{COLUMNS}");
    for m in 1..=cfg.tx_count {
        let theta_m = fmt_f64(360.0 * (m - 1) as f64 / cfg.tx_count as f64);
        for n in 1..=cfg.rx_count {
            let i = (m - 1) * cfg.rx_count + (n - 1);
            let v = matrix.entries()[i];
            let flag = match matrix.mask()[i] {
                EntryKind::Measured => 'M',
                EntryKind::Converted => 'C',
            };
            let theta_n = fmt_f64(360.0 * (n - 1) as f64 / cfg.rx_count as f64);
            let _ = writeln!(out, "{m},{n},{theta_m},{theta_n},{flag},{},{}", fmt_f64(v.re), fmt_f64(v.im));
        }
    }
    out
}

pub fn save_dataset(matrix: &MaskedMeasurementMatrix, path: &Path) -> Result<()> {
    write_string(path, &write_dataset(matrix))
}

pub fn load_dataset(path: &Path) -> Result<MaskedMeasurementMatrix> {
    parse_dataset(&read_to_string(path)?)
}

struct Header {
    config: MeasurementConfig,
    constant: Complex64,
    origin: DataOrigin,
}

fn parse_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Header> {
    let bad = |msg: String| Error::MalformedHeader(msg);
    match lines.next() {
        Some((_, l)) if l.trim() == DATASET_MAGIC => {}
        _ => return Err(bad(format!("first line must be `{DATASET_MAGIC}`"))),
    }
    let mut values: HashMap<&str, &str> = HashMap::new();
    loop {
        let Some((line_no, line)) = lines.next() else {
            return Err(bad("missing column header line".into()));
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == COLUMNS {
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {line_no}: expected `key = value`")))?;
        let key = key.trim();
        if !HEADER_KEYS.contains(&key) {
            return Err(bad(format!("line {line_no}: unknown key `{key}`")));
        }
        if values.insert(key, value.trim()).is_some() {
            return Err(bad(format!("line {line_no}: key `{key}` repeated")));
        }
    }
    let get = |key: &str| values.get(key).copied().ok_or_else(|| bad(format!("missing key `{key}`")));
    let real = |key: &str| -> Result<f64> {
        parse_f64(get(key)?).ok_or_else(|| bad(format!("`{key}` is not a number")))
    };
    let count = |key: &str| -> Result<usize> {
        get(key)?.parse().map_err(|_| bad(format!("`{key}` is not a non-negative integer")))
    };
    let config = MeasurementConfig {
        frequency_hz: real("frequency_hz")?,
        eps_b: real("eps_b")?,
        mu_b: real("mu_b")?,
        tx_radius: real("tx_radius")?,
        rx_radius: real("rx_radius")?,
        tx_count: count("tx_count")?,
        rx_count: count("rx_count")?,
        bistatic_angle_deg: real("alpha_deg")?,
    };
    config.validate().map_err(|e| bad(e.to_string()))?;
    let constant = Complex64::new(real("c_re")?, real("c_im")?);
    let origin = parse_model_tag(get("model")?).ok_or_else(|| bad("unknown model tag".into()))?;
    Ok(Header { config, constant, origin })
}

/// Parse a canonical dataset.
///
/// Synthetic data must carry exactly the geometric mask. Imported data may
/// mark any subset as converted, but each measured entry must sit at least
/// `α - 0.5°` from its transmitter.
pub fn parse_dataset(text: &str) -> Result<MaskedMeasurementMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let Header { config, constant, origin } = parse_header(&mut lines)?;
    let (tx, rx) = (config.tx_count, config.rx_count);
    let expected = tx * rx;
    let ends_cleanly = text.ends_with('\n');

    let mut entries = vec![Complex64::new(0.0, 0.0); expected];
    let mut mask = vec![EntryKind::Converted; expected];
    let mut seen = vec![false; expected];
    let mut found = 0usize;
    let rows: Vec<(usize, &str)> = lines.filter(|(_, l)| !l.trim().is_empty()).collect();
    let last_line = rows.last().map(|r| r.0);

    for (line, raw) in rows {
        let row = match parse_row(raw, &config) {
            Ok(row) => row,
            // A cut-off final line means the file was truncated.
            Err(_) if Some(line) == last_line && !ends_cleanly => {
                return Err(Error::RowCount { expected, found });
            }
            Err(reason) => return Err(Error::MalformedRow { line, reason }),
        };
        let (m, n, kind, value) = row;
        let i = (m - 1) * rx + (n - 1);
        if seen[i] {
            return Err(Error::DuplicateRow { m, n });
        }
        seen[i] = true;
        found += 1;

        let distance = angular_distance(config.rx_angle(n)?, config.tx_angle(m)?);
        let alpha = config.bistatic_angle();
        match origin {
            DataOrigin::Synthetic(_) => {
                let geometric = if config.is_measured(m, n)? { EntryKind::Measured } else { EntryKind::Converted };
                if geometric != kind {
                    return Err(Error::MaskInconsistent {
                        m,
                        n,
                        reason: format!(
                            "flag {kind:?} at angular distance {:.3} deg with alpha {} deg",
                            distance.to_degrees(),
                            config.bistatic_angle_deg
                        ),
                    });
                }
            }
            DataOrigin::Imported => {
                if kind == EntryKind::Measured && distance < alpha - SNAP_TOLERANCE_DEG.to_radians() {
                    return Err(Error::MaskInconsistent {
                        m,
                        n,
                        reason: format!(
                            "measured at angular distance {:.3} deg below alpha {} deg",
                            distance.to_degrees(),
                            config.bistatic_angle_deg
                        ),
                    });
                }
            }
        }
        if kind == EntryKind::Converted && value != constant {
            return Err(Error::MaskInconsistent { m, n, reason: "converted entry differs from C".into() });
        }
        entries[i] = value;
        mask[i] = kind;
    }
    if found != expected {
        return Err(Error::RowCount { expected, found });
    }
    MaskedMeasurementMatrix::from_parts(config, constant, origin, entries, mask)
}

type Row = (usize, usize, EntryKind, Complex64);

fn parse_row(raw: &str, config: &MeasurementConfig) -> std::result::Result<Row, String> {
    let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
    if fields.len() != 7 {
        return Err(format!("expected 7 fields, found {}", fields.len()));
    }
    let index = |s: &str, len: usize, what: &str| -> std::result::Result<usize, String> {
        match s.parse::<usize>() {
            Ok(v) if (1..=len).contains(&v) => Ok(v),
            _ => Err(format!("{what} index `{s}` outside 1..={len}")),
        }
    };
    let m = index(fields[0], config.tx_count, "transmitter")?;
    let n = index(fields[1], config.rx_count, "receiver")?;
    let number = |s: &str, what: &str| parse_f64(s).ok_or_else(|| format!("{what} `{s}` is not a number"));
    let theta_m = number(fields[2], "theta_m_deg")?;
    let theta_n = number(fields[3], "theta_n_deg")?;
    let expect_m = 360.0 * (m - 1) as f64 / config.tx_count as f64;
    let expect_n = 360.0 * (n - 1) as f64 / config.rx_count as f64;
    if (theta_m - expect_m).abs() > 1e-6 || (theta_n - expect_n).abs() > 1e-6 {
        return Err(format!("angles ({theta_m}, {theta_n}) do not match ring positions of m={m}, n={n}"));
    }
    let kind = match fields[4] {
        "M" => EntryKind::Measured,
        "C" => EntryKind::Converted,
        other => return Err(format!("flag `{other}` is neither M nor C")),
    };
    let re = number(fields[5], "re")?;
    let im = number(fields[6], "im")?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("field value is not finite".into());
    }
    Ok((m, n, kind, Complex64::new(re, im)))
}
