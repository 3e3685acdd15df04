//! Born-approximation synthesis of bistatic scattered-field data for small
//! dielectric disks, and the masked measurement matrix built from it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{MeasurementConfig, Point};
use crate::specfun::green2d;

/// A small circular dielectric inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub center: Point,
    /// Radius in metres.
    pub radius: f64,
    /// Absolute permittivity in F/m.
    pub permittivity: f64,
}

impl Scatterer {
    pub fn new(center: Point, radius: f64, permittivity: f64) -> Self {
        Self { center, radius, permittivity }
    }

    pub fn with_relative_permittivity(center: Point, radius: f64, eps_r: f64, eps_b: f64) -> Self {
        Self::new(center, radius, eps_r * eps_b)
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

/// Well-separated collection of scatterers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjectSet {
    scatterers: Vec<Scatterer>,
}

impl ObjectSet {
    pub fn new(scatterers: Vec<Scatterer>) -> Result<Self> {
        for (i, s) in scatterers.iter().enumerate() {
            if !(s.radius.is_finite() && s.radius > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "scatterer {} has non-positive radius {}",
                    i + 1,
                    s.radius
                )));
            }
            if !(s.center.x.is_finite() && s.center.y.is_finite() && s.permittivity.is_finite()) {
                return Err(Error::InvalidConfig(format!("scatterer {} is not finite", i + 1)));
            }
            for (j, t) in scatterers.iter().enumerate().skip(i + 1) {
                if s.center.distance(t.center) <= s.radius + t.radius {
                    return Err(Error::InvalidConfig(format!(
                        "scatterers {} and {} overlap",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { scatterers })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The two 15 mm disks at (-0.045, 0) and (0.045, 0.010) with `ε = 3ε_b`.
    pub fn fresnel_two_disks(eps_b: f64) -> Self {
        let disk = |x, y| Scatterer::with_relative_permittivity(Point::new(x, y), 0.015, 3.0, eps_b);
        Self { scatterers: vec![disk(-0.045, 0.0), disk(0.045, 0.010)] }
    }

    pub fn scatterers(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }
}

/// Contrast `O = (ε_s - ε_b) / (ε_b μ_b)` of one scatterer.
pub fn contrast(obj: &Scatterer, config: &MeasurementConfig) -> Result<f64> {
    if !(obj.permittivity > config.eps_b) {
        return Err(Error::ContractViolation(format!(
            "scatterer permittivity {} must exceed background {}",
            obj.permittivity, config.eps_b
        )));
    }
    Ok((obj.permittivity - config.eps_b) / (config.eps_b * config.mu_b))
}

/// How scattered data is synthesised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardModel {
    /// Each disk collapsed to its centre, weighted by its area.
    Point,
    /// Polar midpoint quadrature over each disk with `quad_points` rings.
    Disk { quad_points: usize },
}

impl ForwardModel {
    pub const DEFAULT_QUAD_POINTS: usize = 32;
}

/// Where the data in a matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataOrigin {
    Synthetic(ForwardModel),
    Imported,
}

/// Integration nodes for one scatterer: `(point, weight)`, weights sum to the area.
fn disk_nodes(s: &Scatterer, rings: usize) -> Vec<(Point, f64)> {
    let h = s.radius / rings as f64;
    let mut nodes = Vec::new();
    for j in 0..rings {
        let rho = (j as f64 + 0.5) * h;
        let count = (std::f64::consts::TAU * (j as f64 + 0.5)).ceil() as usize;
        let dphi = std::f64::consts::TAU / count as f64;
        for i in 0..count {
            let phi = (i as f64 + 0.5) * dphi;
            nodes.push((s.center + Point::from_polar(rho, phi), rho * h * dphi));
        }
    }
    nodes
}

/// Weighted source points `(point, k² O w)` representing the object set.
fn source_points(
    config: &MeasurementConfig,
    objects: &ObjectSet,
    model: ForwardModel,
) -> Result<Vec<(Point, f64)>> {
    let k2 = config.wavenumber().powi(2);
    let mut out = Vec::new();
    for s in objects.scatterers() {
        let o = contrast(s, config)?;
        if config.wavenumber() * s.radius > 1.0 {
            log::warn!("k·radius = {:.2} > 1; scatterer is not small", config.wavenumber() * s.radius);
        }
        match model {
            ForwardModel::Point => out.push((s.center, k2 * o * s.area())),
            ForwardModel::Disk { quad_points } => {
                if quad_points < 16 {
                    return Err(Error::InvalidConfig(format!(
                        "disk quadrature needs at least 16 rings, got {quad_points}"
                    )));
                }
                out.extend(disk_nodes(s, quad_points).into_iter().map(|(p, w)| (p, k2 * o * w)));
            }
        }
    }
    Ok(out)
}

fn check_antenna_clear(objects: &ObjectSet, antenna: Point, model: ForwardModel) -> Result<()> {
    for s in objects.scatterers() {
        let d = antenna.distance(s.center);
        let clash = match model {
            ForwardModel::Point => d == 0.0,
            ForwardModel::Disk { .. } => d <= s.radius,
        };
        if clash {
            return Err(Error::Singularity(format!(
                "antenna at ({}, {}) lies on a scatterer",
                antenna.x, antenna.y
            )));
        }
    }
    Ok(())
}

fn field_between(
    k: f64,
    sources: &[(Point, f64)],
    tx: Point,
    rx: Point,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for &(r, weight) in sources {
        sum += weight * green2d(k, tx, r)? * green2d(k, rx, r)?;
    }
    Ok(sum)
}

/// Point-model field `k² Σ_s O_s |D_s| G(p_m, r_s) G(q_n, r_s)`.
pub fn point_scattered_field(
    config: &MeasurementConfig,
    objects: &ObjectSet,
    n: usize,
    m: usize,
) -> Result<Complex64> {
    let tx = config.transmitter_position(m)?;
    let rx = config.receiver_position(n)?;
    let sources = source_points(config, objects, ForwardModel::Point)?;
    field_between(config.wavenumber(), &sources, tx, rx)
}

/// Born integral `k² Σ_s O_s ∫_{D_s} G(q_n, r') G(r', p_m) dr'` by polar
/// midpoint quadrature with `quad_points` rings per disk.
pub fn disk_scattered_field(
    config: &MeasurementConfig,
    objects: &ObjectSet,
    n: usize,
    m: usize,
    quad_points: usize,
) -> Result<Complex64> {
    let tx = config.transmitter_position(m)?;
    let rx = config.receiver_position(n)?;
    let model = ForwardModel::Disk { quad_points };
    check_antenna_clear(objects, tx, model)?;
    check_antenna_clear(objects, rx, model)?;
    let sources = source_points(config, objects, model)?;
    field_between(config.wavenumber(), &sources, tx, rx)
}

/// Unmasked `N × M` field (column-major, column `m` holds all receivers).
pub fn field_matrix(
    config: &MeasurementConfig,
    objects: &ObjectSet,
    model: ForwardModel,
) -> Result<Vec<Complex64>> {
    config.validate()?;
    let k = config.wavenumber();
    let sources = source_points(config, objects, model)?;
    let txs = config.transmitters();
    let rxs = config.receivers();
    for &a in txs.iter().chain(rxs.iter()) {
        check_antenna_clear(objects, a, model)?;
    }

    // Green's functions from every source point to every antenna.
    let to_antennas = |antennas: &[Point]| -> Result<Vec<Vec<Complex64>>> {
        antennas
            .par_iter()
            .map(|&a| sources.iter().map(|&(r, _)| green2d(k, a, r)).collect())
            .collect()
    };
    let g_tx = to_antennas(&txs)?;
    let g_rx = to_antennas(&rxs)?;

    let columns: Vec<Vec<Complex64>> = g_tx
        .par_iter()
        .map(|gt| {
            g_rx.iter()
                .map(|gr| {
                    sources
                        .iter()
                        .zip(gt.iter().zip(gr))
                        .map(|(&(_, w), (&a, &b))| w * a * b)
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(columns.into_iter().flatten().collect())
}

/// Whether a matrix entry holds a measurement or the conversion constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Measured,
    Converted,
}

/// `N × M` data matrix with converted entries pinned to the constant `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMeasurementMatrix {
    config: MeasurementConfig,
    constant: Complex64,
    origin: DataOrigin,
    entries: Vec<Complex64>,
    mask: Vec<EntryKind>,
}

impl MaskedMeasurementMatrix {
    /// Assemble a matrix from column-major `entries` and `mask`.
    ///
    /// Converted entries must equal `constant` exactly.
    pub fn from_parts(
        config: MeasurementConfig,
        constant: Complex64,
        origin: DataOrigin,
        entries: Vec<Complex64>,
        mask: Vec<EntryKind>,
    ) -> Result<Self> {
        config.validate()?;
        let len = config.rx_count * config.tx_count;
        if entries.len() != len {
            return Err(Error::LengthMismatch { left: entries.len(), right: len });
        }
        if mask.len() != len {
            return Err(Error::LengthMismatch { left: mask.len(), right: len });
        }
        if !(constant.re.is_finite() && constant.im.is_finite()) {
            return Err(Error::InvalidConfig("conversion constant must be finite".into()));
        }
        for (i, (value, kind)) in entries.iter().zip(&mask).enumerate() {
            let (m, n) = (i / config.rx_count + 1, i % config.rx_count + 1);
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::ContractViolation(format!("entry (n={n}, m={m}) is not finite")));
            }
            if *kind == EntryKind::Converted && *value != constant {
                return Err(Error::ContractViolation(format!(
                    "converted entry (n={n}, m={m}) differs from the constant"
                )));
            }
        }
        Ok(Self { config, constant, origin, entries, mask })
    }

    pub fn config(&self) -> &MeasurementConfig {
        &self.config
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    pub fn origin(&self) -> DataOrigin {
        self.origin
    }

    /// Column-major entries; entry `(n, m)` sits at `(m-1)·N + (n-1)`.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn mask(&self) -> &[EntryKind] {
        &self.mask
    }

    fn offset(&self, n: usize, m: usize) -> Result<usize> {
        let (rx, tx) = (self.config.rx_count, self.config.tx_count);
        if n == 0 || n > rx {
            return Err(Error::IndexOutOfRange { kind: "receiver", index: n, len: rx });
        }
        if m == 0 || m > tx {
            return Err(Error::IndexOutOfRange { kind: "transmitter", index: m, len: tx });
        }
        Ok((m - 1) * rx + (n - 1))
    }

    pub fn get(&self, n: usize, m: usize) -> Result<Complex64> {
        Ok(self.entries[self.offset(n, m)?])
    }

    pub fn kind(&self, n: usize, m: usize) -> Result<EntryKind> {
        Ok(self.mask[self.offset(n, m)?])
    }

    /// `S(C, m)`: all `N` entries of transmitter `m`.
    pub fn column(&self, m: usize) -> Result<&[Complex64]> {
        let start = self.offset(1, m)?;
        Ok(&self.entries[start..start + self.config.rx_count])
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.config.rx_count)
    }

    pub fn mask_column(&self, m: usize) -> Result<&[EntryKind]> {
        let start = self.offset(1, m)?;
        Ok(&self.mask[start..start + self.config.rx_count])
    }

    /// Same data with every converted entry replaced by `constant`.
    pub fn with_constant(&self, constant: Complex64) -> Self {
        let entries = self
            .entries
            .iter()
            .zip(&self.mask)
            .map(|(&v, kind)| match kind {
                EntryKind::Measured => v,
                EntryKind::Converted => constant,
            })
            .collect();
        Self { entries, constant, ..self.clone() }
    }

    /// Elementwise modulus, column-major like [`Self::entries`].
    pub fn modulus(&self) -> Vec<f64> {
        self.entries.iter().map(|v| v.norm()).collect()
    }
}

/// Elementwise modulus of the matrix (the `|S(C, 1)| … |S(C, M)|` image).
pub fn matrix_modulus(matrix: &MaskedMeasurementMatrix) -> Vec<f64> {
    matrix.modulus()
}

/// Synthesize the masked matrix: scattered field on measured entries, `constant`
/// on converted ones.
pub fn synthesize(
    config: &MeasurementConfig,
    objects: &ObjectSet,
    constant: Complex64,
    model: ForwardModel,
) -> Result<MaskedMeasurementMatrix> {
    let field = field_matrix(config, objects, model)?;
    let mut mask = Vec::with_capacity(field.len());
    for m in 1..=config.tx_count {
        for n in 1..=config.rx_count {
            mask.push(if config.is_measured(m, n)? {
                EntryKind::Measured
            } else {
                EntryKind::Converted
            });
        }
    }
    let entries = field
        .into_iter()
        .zip(&mask)
        .map(|(v, kind)| if *kind == EntryKind::Measured { v } else { constant })
        .collect();
    MaskedMeasurementMatrix::from_parts(
        *config,
        constant,
        DataOrigin::Synthetic(model),
        entries,
        mask,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{EPS_0, MU_0};

    fn preset() -> (MeasurementConfig, ObjectSet) {
        let cfg = MeasurementConfig::fresnel();
        (cfg, ObjectSet::fresnel_two_disks(cfg.eps_b))
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn contrast_values() {
        let cfg = MeasurementConfig::fresnel();
        let s = |eps| Scatterer::new(Point::ORIGIN, 0.01, eps);
        let o = contrast(&s(3.0 * EPS_0), &cfg).unwrap();
        assert!((o - 2.0 / MU_0).abs() / o < 1e-12);
        assert!((o - 1.5915e6).abs() < 1e2);
        let tiny = contrast(&s(EPS_0 * (1.0 + 1e-6)), &cfg).unwrap();
        assert!(tiny > 0.0 && (tiny - 1e-6 / MU_0).abs() / tiny < 1e-6);
        assert!(matches!(contrast(&s(EPS_0), &cfg), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn object_set_rejects_overlap() {
        let a = Scatterer::new(Point::new(0.0, 0.0), 0.02, 3.0 * EPS_0);
        let b = Scatterer::new(Point::new(0.03, 0.0), 0.02, 3.0 * EPS_0);
        assert!(ObjectSet::new(vec![a, b]).is_err());
        let c = Scatterer::new(Point::new(0.05, 0.0), 0.02, 3.0 * EPS_0);
        assert!(ObjectSet::new(vec![a, c]).is_ok());
    }

    #[test]
    fn empty_set_gives_zero_field() {
        let cfg = MeasurementConfig::fresnel();
        let empty = ObjectSet::empty();
        assert_eq!(point_scattered_field(&cfg, &empty, 5, 3).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(disk_scattered_field(&cfg, &empty, 5, 3, 16).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn point_field_swaps_roles_on_matched_rings() {
        let cfg = MeasurementConfig { rx_radius: 0.72, rx_count: 36, ..MeasurementConfig::fresnel() };
        let objects = ObjectSet::new(vec![Scatterer::new(Point::new(0.02, -0.03), 0.01, 3.0 * EPS_0)])
            .unwrap();
        let a = point_scattered_field(&cfg, &objects, 7, 20).unwrap();
        let b = point_scattered_field(&cfg, &objects, 20, 7).unwrap();
        assert!(rel(a, b) < 1e-14);
    }

    #[test]
    fn disk_matches_point_in_forward_direction() {
        let (cfg, objects) = preset();
        // Receiver 37 sits at 180°, opposite transmitter 1.
        let point = point_scattered_field(&cfg, &objects, 37, 1).unwrap();
        let disk = disk_scattered_field(&cfg, &objects, 37, 1, 32).unwrap();
        assert!(point.norm() > 0.0);
        assert!((disk.norm() - point.norm()).abs() / point.norm() < 0.03);
        assert!(rel(disk, point) < 0.03);
    }

    #[test]
    fn disk_converges_to_point_for_tiny_radius() {
        let cfg = MeasurementConfig::fresnel();
        let objects =
            ObjectSet::new(vec![Scatterer::new(Point::new(0.03, 0.01), 1e-5, 3.0 * EPS_0)]).unwrap();
        for (n, m) in [(37, 1), (20, 1), (5, 9)] {
            let point = point_scattered_field(&cfg, &objects, n, m).unwrap();
            let disk = disk_scattered_field(&cfg, &objects, n, m, 16).unwrap();
            assert!(rel(disk, point) < 1e-6);
        }
    }

    #[test]
    fn disk_quadrature_self_convergence() {
        let (cfg, objects) = preset();
        let coarse = disk_scattered_field(&cfg, &objects, 37, 1, 16).unwrap();
        let fine = disk_scattered_field(&cfg, &objects, 37, 1, 32).unwrap();
        assert!(rel(coarse, fine) < 1e-3);
        // Across the whole measured column at the default resolution.
        for n in cfg.index_sets(1).unwrap().measured {
            let a = disk_scattered_field(&cfg, &objects, n, 1, 32).unwrap();
            let b = disk_scattered_field(&cfg, &objects, n, 1, 64).unwrap();
            assert!(rel(a, b) < 1e-3, "n = {n}");
        }
    }

    #[test]
    fn disk_quadrature_rejects_few_rings() {
        let (cfg, objects) = preset();
        assert!(disk_scattered_field(&cfg, &objects, 37, 1, 8).is_err());
    }

    #[test]
    fn synthesize_masks() {
        let (cfg, objects) = preset();
        let matrix = synthesize(&cfg, &objects, Complex64::new(0.0, 0.0), ForwardModel::Point).unwrap();
        for m in 1..=cfg.tx_count {
            let sets = cfg.index_sets(m).unwrap();
            let col = matrix.column(m).unwrap();
            let kinds = matrix.mask_column(m).unwrap();
            assert_eq!(sets.converted.len(), 23);
            for &n in &sets.converted {
                assert_eq!(col[n - 1], Complex64::new(0.0, 0.0));
                assert_eq!(kinds[n - 1], EntryKind::Converted);
            }
            for &n in &sets.measured {
                assert!(col[n - 1].norm() > 0.0);
                assert_eq!(kinds[n - 1], EntryKind::Measured);
            }
        }
        let modulus = matrix_modulus(&matrix);
        for (value, kind) in modulus.iter().zip(matrix.mask()) {
            assert_eq!(*value == 0.0, *kind == EntryKind::Converted);
        }
    }

    #[test]
    fn with_constant_replaces_only_converted() {
        let (cfg, objects) = preset();
        let zero = synthesize(&cfg, &objects, Complex64::new(0.0, 0.0), ForwardModel::Point).unwrap();
        let c = Complex64::new(0.5, -0.25);
        let shifted = zero.with_constant(c);
        let direct = synthesize(&cfg, &objects, c, ForwardModel::Point).unwrap();
        assert_eq!(shifted, direct);
    }

    #[test]
    fn from_parts_rejects_inconsistent_constant() {
        let cfg = MeasurementConfig { tx_count: 1, rx_count: 2, ..MeasurementConfig::fresnel() };
        let entries = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        let mask = vec![EntryKind::Measured, EntryKind::Converted];
        let err = MaskedMeasurementMatrix::from_parts(
            cfg,
            Complex64::new(0.0, 0.0),
            DataOrigin::Imported,
            entries,
            mask,
        );
        assert!(matches!(err, Err(Error::ContractViolation(_))));
    }

    #[test]
    fn modulus_is_phase_invariant() {
        let (cfg, objects) = preset();
        let matrix = synthesize(&cfg, &objects, Complex64::new(0.0, 0.0), ForwardModel::Point).unwrap();
        let phase = Complex64::from_polar(1.0, 0.7);
        let rotated: Vec<f64> = matrix.entries().iter().map(|v| (v * phase).norm()).collect();
        for (a, b) in rotated.iter().zip(matrix.modulus()) {
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
