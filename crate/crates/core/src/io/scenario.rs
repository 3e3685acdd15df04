use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{fmt_f64, parse_complex, parse_f64, read_to_string};
use crate::error::{Error, Result};
use crate::forward::{ForwardModel, ObjectSet, Scatterer};
use crate::geometry::{MeasurementConfig, Point, EPS_0, MU_0};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 1] = ["fresnel-2diel"];

/// Everything `simulate` needs: geometry, objects, conversion constant and
/// forward model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: MeasurementConfig,
    pub objects: ObjectSet,
    pub constant: Complex64,
    pub model: ForwardModel,
}

impl Scenario {
    /// Flat `key = value` text; objects carry relative permittivity.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "frequency_hz = {}", fmt_f64(c.frequency_hz));
        let _ = writeln!(out, "eps_b = {}", fmt_f64(c.eps_b));
        let _ = writeln!(out, "mu_b = {}", fmt_f64(c.mu_b));
        let _ = writeln!(out, "tx_radius = {}", fmt_f64(c.tx_radius));
        let _ = writeln!(out, "rx_radius = {}", fmt_f64(c.rx_radius));
        let _ = writeln!(out, "tx_count = {}", c.tx_count);
        let _ = writeln!(out, "rx_count = {}", c.rx_count);
        let _ = writeln!(out, "alpha_deg = {}", fmt_f64(c.bistatic_angle_deg));
        let _ = writeln!(out, "constant = {}, {}", fmt_f64(self.constant.re), fmt_f64(self.constant.im));
        let model = match self.model {
            ForwardModel::Point => "point".to_string(),
            ForwardModel::Disk { quad_points } => format!("disk:{quad_points}"),
        };
        let _ = writeln!(out, "model = {model}");
        out.push_str("# object = x_m, y_m, radius_m, relative_permittivity\n");
        for s in self.objects.scatterers() {
            let _ = writeln!(
                out,
                "object = {}, {}, {}, {}",
                fmt_f64(s.center.x),
                fmt_f64(s.center.y),
                fmt_f64(s.radius),
                fmt_f64(s.permittivity / c.eps_b)
            );
        }
        out
    }
}

/// Built-in scenario by name.
pub fn preset(name: &str) -> Result<Scenario> {
    match name {
        "fresnel-2diel" => {
            let config = MeasurementConfig::fresnel();
            Ok(Scenario {
                objects: ObjectSet::fresnel_two_disks(config.eps_b),
                config,
                constant: Complex64::new(0.0, 0.0),
                model: ForwardModel::Point,
            })
        }
        other => Err(Error::InvalidConfig(format!(
            "unknown preset `{other}`; available: {}",
            PRESETS.join(", ")
        ))),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&read_to_string(path)?)
}

/// Parse a scenario file.
///
/// `eps_b` and `mu_b` default to vacuum, `constant` to 0 and `model` to
/// `point`; the geometry keys are required.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let bad = |line: usize, msg: String| Error::InvalidConfig(format!("line {line}: {msg}"));
    let mut frequency_hz = None;
    let mut eps_b = None;
    let mut mu_b = None;
    let mut tx_radius = None;
    let mut rx_radius = None;
    let mut tx_count = None;
    let mut rx_count = None;
    let mut alpha_deg = None;
    let mut constant = None;
    let mut model = None;
    let mut raw_objects: Vec<[f64; 4]> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(line_no, "expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let real = || parse_f64(value).ok_or_else(|| bad(line_no, format!("`{key}` needs a number")));
        let count = || -> Result<usize> {
            value.parse().map_err(|_| bad(line_no, format!("`{key}` needs a non-negative integer")))
        };
        let slot_f = |slot: &mut Option<f64>| -> Result<()> {
            if slot.replace(real()?).is_some() {
                return Err(bad(line_no, format!("`{key}` repeated")));
            }
            Ok(())
        };
        match key {
            "frequency_hz" => slot_f(&mut frequency_hz)?,
            "eps_b" => slot_f(&mut eps_b)?,
            "mu_b" => slot_f(&mut mu_b)?,
            "tx_radius" => slot_f(&mut tx_radius)?,
            "rx_radius" => slot_f(&mut rx_radius)?,
            "alpha_deg" => slot_f(&mut alpha_deg)?,
            "tx_count" => {
                if tx_count.replace(count()?).is_some() {
                    return Err(bad(line_no, "`tx_count` repeated".into()));
                }
            }
            "rx_count" => {
                if rx_count.replace(count()?).is_some() {
                    return Err(bad(line_no, "`rx_count` repeated".into()));
                }
            }
            "constant" => {
                let c = parse_complex(value)
                    .ok_or_else(|| bad(line_no, "`constant` needs `RE` or `RE, IM`".into()))?;
                if constant.replace(c).is_some() {
                    return Err(bad(line_no, "`constant` repeated".into()));
                }
            }
            "model" => {
                let parsed = match value {
                    "point" => ForwardModel::Point,
                    "disk" => ForwardModel::Disk { quad_points: ForwardModel::DEFAULT_QUAD_POINTS },
                    other => match other.strip_prefix("disk:").and_then(|q| q.parse().ok()) {
                        Some(quad_points) => ForwardModel::Disk { quad_points },
                        None => return Err(bad(line_no, format!("unknown model `{other}`"))),
                    },
                };
                if model.replace(parsed).is_some() {
                    return Err(bad(line_no, "`model` repeated".into()));
                }
            }
            "object" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| parse_f64(p).ok_or_else(|| bad(line_no, format!("bad object field `{}`", p.trim()))))
                    .collect::<Result<_>>()?;
                let fields: [f64; 4] = parts
                    .try_into()
                    .map_err(|_| bad(line_no, "object needs `x, y, radius, relative_permittivity`".into()))?;
                raw_objects.push(fields);
            }
            other => return Err(bad(line_no, format!("unknown key `{other}`"))),
        }
    }

    let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::InvalidConfig(format!("missing `{key}`")));
    let config = MeasurementConfig {
        frequency_hz: need(frequency_hz, "frequency_hz")?,
        eps_b: eps_b.unwrap_or(EPS_0),
        mu_b: mu_b.unwrap_or(MU_0),
        tx_radius: need(tx_radius, "tx_radius")?,
        rx_radius: need(rx_radius, "rx_radius")?,
        tx_count: tx_count.ok_or_else(|| Error::InvalidConfig("missing `tx_count`".into()))?,
        rx_count: rx_count.ok_or_else(|| Error::InvalidConfig("missing `rx_count`".into()))?,
        bistatic_angle_deg: need(alpha_deg, "alpha_deg")?,
    };
    config.validate()?;
    let objects = ObjectSet::new(
        raw_objects
            .into_iter()
            .map(|[x, y, radius, eps_r]| {
                Scatterer::with_relative_permittivity(Point::new(x, y), radius, eps_r, config.eps_b)
            })
            .collect(),
    )?;
    Ok(Scenario {
        config,
        objects,
        constant: constant.unwrap_or_default(),
        model: model.unwrap_or(ForwardModel::Point),
    })
}
