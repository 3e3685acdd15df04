use std::fmt::Write as _;
use std::path::Path;

use super::{fmt_f64, parse_f64, read_to_string};
use crate::error::{Error, Result};
use crate::indicator::IndicatorMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    /// `x,y,value` per cell, `y` outer and `x` inner, ascending.
    Csv,
    /// Binary 16-bit greyscale; 1.0 maps to 65535 and the top row is the largest `y`.
    Pgm,
}

impl MapFormat {
    /// Pick the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("pgm") => MapFormat::Pgm,
            _ => MapFormat::Csv,
        }
    }
}

fn map_csv(map: &IndicatorMap) -> String {
    let mut out = String::with_capacity(map.values.len() * 72);
    out.push_str("x,y,value\n");
    for iy in 0..map.grid.ny {
        for ix in 0..map.grid.nx {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(map.grid.x(ix)),
                fmt_f64(map.grid.y(iy)),
                fmt_f64(map.value(ix, iy))
            );
        }
    }
    out
}

fn map_pgm(map: &IndicatorMap) -> Vec<u8> {
    let (nx, ny) = (map.grid.nx, map.grid.ny);
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    out.reserve(2 * nx * ny);
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let level = (map.value(ix, iy).clamp(0.0, 1.0) * 65535.0).round() as u16;
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn export_map(map: &IndicatorMap, path: &Path, format: MapFormat) -> Result<()> {
    if let Some(i) = map.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::ContractViolation(format!("map value {i} is not finite")));
    }
    let bytes = match format {
        MapFormat::Csv => map_csv(map).into_bytes(),
        MapFormat::Pgm => map_pgm(map),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read back `(x, y, value)` triples from a map CSV.
pub fn read_map_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "x,y,value")) => {}
        _ => return Err(Error::MalformedHeader("map CSV must start with `x,y,value`".into())),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<f64> = l.split(',').filter_map(parse_f64).collect();
            match fields.as_slice() {
                [x, y, v] if l.split(',').count() == 3 => Ok((*x, *y, *v)),
                _ => Err(Error::MalformedRow { line: i + 1, reason: "expected `x,y,value`".into() }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicator::{ImagingGrid, ImagingMode};
    use num_complex::Complex64;

    fn sample_map() -> IndicatorMap {
        let grid = ImagingGrid::square(0.1, 5).with_resolution(5, 4);
        let values: Vec<f64> = (0..20).map(|i| (i as f64 / 19.0).sqrt()).collect();
        IndicatorMap {
            grid,
            values,
            mode: ImagingMode::Multi,
            constant: Complex64::new(0.0, 0.0),
            bistatic_angle_deg: 60.0,
            normalized: true,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.csv");
        let map = sample_map();
        export_map(&map, &path, MapFormat::Csv).unwrap();
        let rows = read_map_csv(&path).unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 21);
        for (i, (x, y, v)) in rows.into_iter().enumerate() {
            let (ix, iy) = (i % 5, i / 5);
            assert_eq!((x, y, v), (map.grid.x(ix), map.grid.y(iy), map.values[i]));
        }
    }

    #[test]
    fn pgm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.pgm");
        let map = sample_map();
        export_map(&map, &path, MapFormat::from_path(&path)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n5 4\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let pixels: Vec<u16> =
            bytes[header.len()..].chunks(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect();
        assert_eq!(pixels.len(), 20);
        // Top-right pixel is the last stored cell (largest x and y) with value 1.
        assert_eq!(pixels[4], 65535);
        assert_eq!(pixels[15], 0);
    }

    #[test]
    fn non_finite_values_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut map = sample_map();
        map.values[3] = f64::NAN;
        assert!(export_map(&map, &dir.path().join("m.csv"), MapFormat::Csv).is_err());
    }
}
