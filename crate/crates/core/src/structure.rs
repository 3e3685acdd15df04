//! Truncated Bessel-series forms of the single- and multi-source indicators.
//!
//! With receivers far from the imaging region, the data inner products reduce
//! to sums of plane waves over arcs of the antenna rings. Replacing those sums
//! by integrals gives Jacobi–Anger series in `J_p` weighted by `sinc` factors
//! that encode the missing aperture. The functions here evaluate those series
//! and compare them against the direct inner products on a grid.
//!
//! Sign conventions follow the geometry: the measured arc for transmitter `m`
//! is centred at `ϑ_m + π`, so its series carries `(-1)^p` relative to an arc
//! centred at `ϑ_m`. See [`disturb_e1`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{contrast, DataOrigin, ForwardModel, MaskedMeasurementMatrix, ObjectSet};
use crate::geometry::{MeasurementConfig, Point};
use crate::indicator::{dsm_inner, msm_inner, ImagingGrid, ImagingMode};
use crate::specfun::{bessel_j_orders, green2d, sinc_u};

/// Orders kept beyond `ceil(x)` by default.
pub const DEFAULT_MARGIN: usize = 40;
/// Fewest orders beyond `ceil(x)` accepted.
pub const MIN_MARGIN: usize = 20;

/// Highest Bessel order kept in every series, with an estimate of the
/// neglected tail at the largest argument it was sized for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTruncation {
    pub max_order: usize,
    pub tail_bound: f64,
}

/// Bound on `Σ_{p>P} |J_p(x)|` from `|J_p(x)| ≤ (x/2)^p / p!`.
fn tail_estimate(max_order: usize, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    let p = max_order + 1;
    let log_term = p as f64 * (x / 2.0).ln() - (1..=p).map(|j| (j as f64).ln()).sum::<f64>();
    let ratio = x / 2.0 / (p as f64 + 1.0);
    log_term.exp() / (1.0 - ratio).max(0.5)
}

impl SeriesTruncation {
    /// `ceil(x_max) + 40` orders.
    pub fn for_argument(x_max: f64) -> Self {
        Self::with_order(x_max.abs().ceil() as usize + DEFAULT_MARGIN, x_max)
    }

    /// A fixed order; `x_max` only feeds the tail estimate.
    pub fn with_order(max_order: usize, x_max: f64) -> Self {
        Self { max_order, tail_bound: tail_estimate(max_order, x_max) }
    }

    /// Fails unless `max_order ≥ ceil(x) + 20` and `max_order ≥ 1`.
    pub fn check(&self, x: f64) -> Result<()> {
        let needed = x.abs().ceil() as usize + MIN_MARGIN;
        if self.max_order < needed.max(1) {
            return Err(Error::Truncation(format!(
                "series order {} too low for argument {x:.3}; need at least {needed}",
                self.max_order
            )));
        }
        Ok(())
    }
}

fn bessel_row(trunc: &SeriesTruncation, x: f64) -> Result<Vec<f64>> {
    trunc.check(x)?;
    bessel_j_orders(trunc.max_order, x)
}

/// `i^p` for integer `p`.
fn i_pow(p: usize) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `2 Σ_{p≥1} i^p J_p cos(p·angle) sinc(p·half_width)`.
fn arc_series(js: &[f64], angle: f64, half_width: f64) -> Complex64 {
    js.iter()
        .enumerate()
        .skip(1)
        .map(|(p, &j)| {
            let pf = p as f64;
            i_pow(p) * (2.0 * j * (pf * angle).cos() * sinc_u(pf * half_width))
        })
        .sum()
}

/// `J_0² + 2 Σ_{p≥1} sign^p J_p² sinc(p·half_width)`.
fn squared_series(js: &[f64], half_width: f64, alternating: bool) -> f64 {
    let tail: f64 = js
        .iter()
        .enumerate()
        .skip(1)
        .map(|(p, &j)| {
            let sign = if alternating && p % 2 == 1 { -1.0 } else { 1.0 };
            2.0 * sign * j * j * sinc_u(p as f64 * half_width)
        })
        .sum();
    js[0] * js[0] + tail
}

/// Plane-wave sum over uniformly spaced angles.
pub fn jacobi_anger_direct(angles: &[f64], x: f64, phi: f64) -> Complex64 {
    angles.iter().map(|&t| Complex64::from_polar(1.0, x * (t - phi).cos())).sum()
}

/// Series form of `Σ_n e^{ix cos(θ_n - φ)}` over uniformly spaced `angles`.
///
/// The sum is read as a midpoint rule on the arc of length `N·Δθ` centred at
/// `(θ_1 + θ_N)/2`, which gives
/// `N (J_0(x) + 2 Σ_p i^p J_p(x) cos(p(c - φ)) sinc(p N Δθ / 2))`
/// and reduces to `N J_0(x)` on a full ring.
pub fn jacobi_anger_discrete(
    angles: &[f64],
    x: f64,
    phi: f64,
    trunc: &SeriesTruncation,
) -> Result<Complex64> {
    let n = angles.len();
    if n == 0 {
        return Err(Error::InvalidConfig("angle set is empty".into()));
    }
    let step = if n > 1 { (angles[n - 1] - angles[0]) / (n - 1) as f64 } else { 0.0 };
    for pair in angles.windows(2) {
        if ((pair[1] - pair[0]) - step).abs() > 1e-9 * step.abs().max(1.0) {
            return Err(Error::InvalidConfig("angles must be uniformly spaced".into()));
        }
    }
    let js = bessel_row(trunc, x)?;
    let centre = 0.5 * (angles[0] + angles[n - 1]);
    let half_width = 0.5 * n as f64 * step.abs();
    Ok(n as f64 * (js[0] + arc_series(&js, centre - phi, half_width)))
}

/// Aperture disturbance `E_1(r, r', m)` of the measured arc.
///
/// `2 Σ_p (-i)^p J_p(k|r - r'|) cos(p(ϑ_m - φ)) sinc(p(π - α))`, with `φ` the
/// polar angle of `r - r'`. The arc `[ϑ_m + α, ϑ_m + 2π - α]` is centred on
/// `ϑ_m + π`, hence `(-i)^p = i^p (-1)^p`.
pub fn disturb_e1(
    r: Point,
    r_prime: Point,
    m: usize,
    config: &MeasurementConfig,
    trunc: &SeriesTruncation,
) -> Result<Complex64> {
    let d = r - r_prime;
    let x = config.wavenumber() * d.norm();
    if x == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let js = bessel_row(trunc, x)?;
    Ok(e1_from_row(&js, config.tx_angle(m)?, d.angle(), config.bistatic_angle()))
}

fn e1_from_row(js: &[f64], tx_angle: f64, phi: f64, alpha: f64) -> Complex64 {
    arc_series(js, tx_angle + PI - phi, PI - alpha)
}

/// Conversion disturbance `E_2(r, m)` of the unmeasured arc:
/// `2 Σ_q i^q J_q(k|r|) cos(q(ϑ_m - ψ)) sinc(qα)`.
pub fn disturb_e2(
    r: Point,
    m: usize,
    config: &MeasurementConfig,
    trunc: &SeriesTruncation,
) -> Result<Complex64> {
    let x = config.wavenumber() * r.norm();
    if x == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let js = bessel_row(trunc, x)?;
    Ok(arc_series(&js, config.tx_angle(m)? - r.angle(), config.bistatic_angle()))
}

fn far_field_check(config: &MeasurementConfig) -> Result<()> {
    let k = config.wavenumber();
    if 4.0 * k * config.rx_radius.min(config.tx_radius) < 20.0 {
        return Err(Error::InvalidConfig(
            "rings too close for the far-field series (4kR < 20)".into(),
        ));
    }
    Ok(())
}

fn contrasts(config: &MeasurementConfig, objects: &ObjectSet) -> Result<Vec<(Point, f64)>> {
    objects
        .scatterers()
        .iter()
        .map(|s| Ok((s.center, contrast(s, config)? * s.area())))
        .collect()
}

fn counts(config: &MeasurementConfig) -> Result<(f64, f64)> {
    let sets = config.index_sets(1)?;
    Ok((sets.measured.len() as f64, sets.converted.len() as f64))
}

/// `(Φ, Ψ)` for the single-source indicator with point scatterers.
///
/// `Φ = k² #I / (2 sqrt(kQπ)) Σ_s O_s |D_s| G(p_m, r_s) (J_0 + E_1)` and
/// `Ψ = -C (1 - i) e^{-ikQ} #J (J_0(k|r|) + E_2)`, scaled so that
/// `(Φ + Ψ) / (4 sqrt(kQπ))` approximates `<S(C, m), Q(r)>`.
pub fn phi_psi(
    r: Point,
    m: usize,
    constant: Complex64,
    config: &MeasurementConfig,
    objects: &ObjectSet,
    trunc: &SeriesTruncation,
) -> Result<(Complex64, Complex64)> {
    let k = config.wavenumber();
    let (n_meas, n_conv) = counts(config)?;
    let tx = config.transmitter_position(m)?;
    let tx_angle = config.tx_angle(m)?;
    let alpha = config.bistatic_angle();

    let mut phi_sum = Complex64::new(0.0, 0.0);
    for (centre, weight) in contrasts(config, objects)? {
        let d = r - centre;
        let js = bessel_row(trunc, k * d.norm())?;
        let kernel = js[0] + e1_from_row(&js, tx_angle, d.angle(), alpha);
        phi_sum += weight * green2d(k, tx, centre)? * kernel;
    }
    let phi = k * k * n_meas / (2.0 * (k * config.rx_radius * PI).sqrt()) * phi_sum;

    let psi = if constant == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        let js = bessel_row(trunc, k * r.norm())?;
        let kernel = js[0] + arc_series(&js, tx_angle - r.angle(), alpha);
        let phase = Complex64::from_polar(1.0, -k * config.rx_radius);
        -constant * Complex64::new(1.0, -1.0) * phase * n_conv * kernel
    };
    Ok((phi, psi))
}

/// `(Λ, Γ)` for the multi-source indicator with point scatterers.
///
/// `Λ = #I / (8π sqrt(PQ)) Σ_s O_s |D_s| (J_0² + 2 Σ_p J_p² sinc(p(π - α)))`
/// is real; `Γ = -i e^{-ik(P+Q)} (C #J / k) (J_0² + 2 Σ_q (-1)^q J_q² sinc(qα))`.
/// `(Λ + Γ) M / (8π sqrt(PQ))` approximates `<M(C), P(r)>`.
pub fn lambda_gamma(
    r: Point,
    constant: Complex64,
    config: &MeasurementConfig,
    objects: &ObjectSet,
    trunc: &SeriesTruncation,
) -> Result<(Complex64, Complex64)> {
    let k = config.wavenumber();
    let (n_meas, n_conv) = counts(config)?;
    let alpha = config.bistatic_angle();
    let ring = (config.tx_radius * config.rx_radius).sqrt();

    let mut lambda = 0.0;
    for (centre, weight) in contrasts(config, objects)? {
        let js = bessel_row(trunc, k * r.distance(centre))?;
        lambda += weight * squared_series(&js, PI - alpha, false);
    }
    lambda *= n_meas / (8.0 * PI * ring);

    let gamma = if constant == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        let js = bessel_row(trunc, k * r.norm())?;
        let phase = Complex64::new(0.0, -1.0)
            * Complex64::from_polar(1.0, -k * (config.tx_radius + config.rx_radius));
        constant * n_conv / k * squared_series(&js, alpha, true) * phase
    };
    Ok((Complex64::new(lambda, 0.0), gamma))
}

/// Agreement between normalised direct and series modulus maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureStats {
    /// Pearson correlation of the normalised moduli.
    pub correlation: f64,
    /// Largest `| |d|/max|d| - |s|/max|s| |` over the compared cells.
    pub max_deviation: f64,
    /// Cells with `|direct| > 1e-14 · max|direct|`.
    pub cells_compared: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureEvaluation {
    pub grid: ImagingGrid,
    pub mode: ImagingMode,
    /// Row-major like [`crate::IndicatorMap::values`].
    pub direct: Vec<Complex64>,
    pub series: Vec<Complex64>,
    pub truncation: SeriesTruncation,
    pub stats: StructureStats,
}

impl StructureEvaluation {
    /// Series moduli divided by their maximum.
    pub fn normalized_series(&self) -> Vec<f64> {
        normalized(&self.series)
    }

    pub fn normalized_direct(&self) -> Vec<f64> {
        normalized(&self.direct)
    }
}

fn normalized(values: &[Complex64]) -> Vec<f64> {
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    values.iter().map(|v| if max > 0.0 { v.norm() / max } else { 0.0 }).collect()
}

fn compare(direct: &[Complex64], series: &[Complex64]) -> Result<StructureStats> {
    let d_max = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let s_max = series.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if d_max == 0.0 || s_max == 0.0 {
        return Err(Error::DegenerateData("structure comparison on an all-zero map".into()));
    }
    let pairs: Vec<(f64, f64)> = direct
        .iter()
        .zip(series)
        .filter(|(d, _)| d.norm() > 1e-14 * d_max)
        .map(|(d, s)| (d.norm() / d_max, s.norm() / s_max))
        .collect();
    let n = pairs.len() as f64;
    let (ma, mb) = pairs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let (mut cov, mut va, mut vb, mut worst) = (0.0, 0.0, 0.0, 0.0_f64);
    for &(a, b) in &pairs {
        cov += (a - ma) * (b - mb);
        va += (a - ma) * (a - ma);
        vb += (b - mb) * (b - mb);
        worst = worst.max((a - b).abs());
    }
    let correlation = if va == 0.0 || vb == 0.0 {
        // Both flat counts as perfect agreement; one flat as none.
        if va == vb { 1.0 } else { 0.0 }
    } else {
        cov / (va * vb).sqrt()
    };
    Ok(StructureStats { correlation, max_deviation: worst, cells_compared: pairs.len() })
}

/// Largest Bessel argument the series need over `grid` for `objects`.
pub fn max_series_argument(config: &MeasurementConfig, objects: &ObjectSet, grid: &ImagingGrid) -> f64 {
    let corners = [
        Point::new(grid.x(0), grid.y(0)),
        Point::new(grid.x(grid.nx - 1), grid.y(0)),
        Point::new(grid.x(0), grid.y(grid.ny - 1)),
        Point::new(grid.x(grid.nx - 1), grid.y(grid.ny - 1)),
    ];
    let mut reach = grid.max_radius();
    for s in objects.scatterers() {
        for c in corners {
            reach = reach.max(c.distance(s.center));
        }
    }
    config.wavenumber() * reach
}

/// Direct inner products against their series forms over `grid`.
///
/// `objects` must be the set `matrix` was synthesised from with the point
/// model; the matrix alone does not record it.
pub fn structure_vs_direct(
    matrix: &MaskedMeasurementMatrix,
    objects: &ObjectSet,
    grid: &ImagingGrid,
    mode: ImagingMode,
    trunc: &SeriesTruncation,
) -> Result<StructureEvaluation> {
    grid.validate()?;
    if matrix.origin() != DataOrigin::Synthetic(ForwardModel::Point) {
        return Err(Error::InvalidConfig(
            "structure comparison needs point-model synthetic data".into(),
        ));
    }
    let config = matrix.config();
    far_field_check(config)?;
    let x_max = max_series_argument(config, objects, grid);
    trunc.check(x_max)?;
    if mode == ImagingMode::Multi && config.tx_count <= x_max.ceil() as usize {
        return Err(Error::InvalidConfig(format!(
            "{} transmitters cannot resolve the transmitter-ring series up to argument {x_max:.1}",
            config.tx_count
        )));
    }
    let constant = matrix.constant();
    let cells = grid.points();

    let (direct, series): (Vec<Complex64>, Vec<Complex64>) = cells
        .par_iter()
        .map(|&r| -> Result<(Complex64, Complex64)> {
            match mode {
                ImagingMode::Single { source } => {
                    let (phi, psi) = phi_psi(r, source, constant, config, objects, trunc)?;
                    Ok((dsm_inner(matrix, source, r)?, phi + psi))
                }
                ImagingMode::Multi => {
                    let (lambda, gamma) = lambda_gamma(r, constant, config, objects, trunc)?;
                    Ok((msm_inner(matrix, r)?, lambda + gamma))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let stats = compare(&direct, &series)?;
    Ok(StructureEvaluation { grid: *grid, mode, direct, series, truncation: *trunc, stats })
}

/// `(|f_1|, |f_2|)` at each sample `x` (metres):
/// `f_1 = J_0 + 2 Σ_p i^p J_p sinc(pπ/2)`,
/// `f_2 = J_0² + 2 Σ_p (-1)^p J_p² sinc(pπ/2)`, both at argument `k|x|`.
pub fn f1_f2_profile(
    x_samples: &[f64],
    k: f64,
    trunc: &SeriesTruncation,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut f1 = Vec::with_capacity(x_samples.len());
    let mut f2 = Vec::with_capacity(x_samples.len());
    for &x in x_samples {
        let js = bessel_row(trunc, k * x.abs())?;
        f1.push((js[0] + arc_series(&js, 0.0, PI / 2.0)).norm());
        f2.push(squared_series(&js, PI / 2.0, true).abs());
    }
    Ok((f1, f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{synthesize, Scatterer};
    use crate::geometry::EPS_0;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn uniform(start_deg: f64, step_deg: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (start_deg + step_deg * i as f64).to_radians()).collect()
    }

    #[test]
    fn truncation_invariant() {
        let t = SeriesTruncation::for_argument(16.2);
        assert_eq!(t.max_order, 57);
        assert!(t.check(16.2).is_ok());
        assert!(t.tail_bound < 1e-20);
        assert!(matches!(SeriesTruncation::with_order(30, 0.0).check(12.0), Err(Error::Truncation(_))));
    }

    #[test]
    fn jacobi_anger_trivial_argument() {
        let t = SeriesTruncation::with_order(40, 0.0);
        let angles = uniform(60.0, 5.0, 49);
        let v = jacobi_anger_discrete(&angles, 0.0, 0.3, &t).unwrap();
        assert!((v - c(49.0, 0.0)).norm() < 1e-12);
        assert!(jacobi_anger_discrete(&[], 1.0, 0.0, &t).is_err());
    }

    #[test]
    fn jacobi_anger_full_ring() {
        let t = SeriesTruncation::for_argument(5.0);
        let angles = uniform(0.0, 5.0, 72);
        let series = jacobi_anger_discrete(&angles, 5.0, 0.4, &t).unwrap();
        let j0 = crate::specfun::bessel_j(0, 5.0).unwrap();
        assert!(rel(series, c(72.0 * j0, 0.0)) < 1e-12);
        assert!(rel(jacobi_anger_direct(&angles, 5.0, 0.4), c(72.0 * j0, 0.0)) < 1e-6);
    }

    #[test]
    fn jacobi_anger_measured_arc() {
        let t = SeriesTruncation::with_order(60, 8.0);
        let angles = uniform(60.0, 5.0, 49);
        let series = jacobi_anger_discrete(&angles, 8.0, 0.0, &t).unwrap();
        let direct = jacobi_anger_direct(&angles, 8.0, 0.0);
        assert!(rel(series, direct) < 0.02);
    }

    #[test]
    fn jacobi_anger_arc_error_is_second_order() {
        let x = 12.0;
        let t = SeriesTruncation::for_argument(x);
        let error = |step: f64| {
            let n = (240.0 / step).round() as usize + 1;
            let angles = uniform(60.0, step, n);
            (0..16)
                .map(|i| {
                    let phi = i as f64 * PI / 8.0;
                    let s = jacobi_anger_discrete(&angles, x, phi, &t).unwrap();
                    (s - jacobi_anger_direct(&angles, x, phi)).norm() / n as f64
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (error(5.0), error(2.5), error(1.25));
        assert!(e1 < 0.02);
        for ratio in [e1 / e2, e2 / e3] {
            assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn e1_vanishes_at_coincidence() {
        let t = SeriesTruncation::with_order(30, 0.0);
        for alpha in [1.0, 60.0, 150.0, 180.0] {
            let cfg = MeasurementConfig::fresnel().with_bistatic_angle_deg(alpha);
            let p = Point::new(0.013, -0.07);
            for m in [1, 17] {
                assert_eq!(disturb_e1(p, p, m, &cfg, &t).unwrap(), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn e1_full_ring_limit_is_the_backward_plane_wave() {
        let cfg = MeasurementConfig::fresnel().with_bistatic_angle_deg(180.0 - 1e-12_f64.to_degrees());
        let (r, rp) = (Point::new(0.04, 0.03), Point::new(-0.01, 0.0));
        let d = r - rp;
        let x = cfg.wavenumber() * d.norm();
        let t = SeriesTruncation::for_argument(x);
        for m in [1, 5, 30] {
            let e1 = disturb_e1(r, rp, m, &cfg, &t).unwrap();
            let theta = cfg.tx_angle(m).unwrap();
            // The lone receiver sits opposite the transmitter.
            let wave = Complex64::from_polar(1.0, -x * (theta - d.angle()).cos());
            let j0 = crate::specfun::bessel_j(0, x).unwrap();
            assert!((e1 - (wave - j0)).norm() < 1e-8);
        }
    }

    #[test]
    fn e1_matches_arc_sum_with_midpoint_arc() {
        // The series is the continuum limit of the measured-arc plane-wave sum.
        let cfg = MeasurementConfig { rx_count: 720, ..MeasurementConfig::fresnel() };
        let (r, rp) = (Point::new(0.02, -0.01), Point::new(-0.045, 0.0));
        let t = SeriesTruncation::for_argument(10.0);
        let m = 7;
        let sets = cfg.index_sets(m).unwrap();
        let k = cfg.wavenumber();
        let d = r - rp;
        let direct: Complex64 = sets
            .measured
            .iter()
            .map(|&n| {
                let th = cfg.rx_angle(n).unwrap();
                Complex64::from_polar(1.0, k * (th.cos() * d.x + th.sin() * d.y))
            })
            .sum::<Complex64>()
            / sets.measured.len() as f64;
        let js = bessel_j_orders(t.max_order, k * d.norm()).unwrap();
        let series = js[0] + disturb_e1(r, rp, m, &cfg, &t).unwrap();
        assert!((direct - series).norm() < 0.01);
    }

    #[test]
    fn e2_properties() {
        let cfg = MeasurementConfig::fresnel().with_bistatic_angle_deg(90.0);
        let t = SeriesTruncation::for_argument(5.0);
        assert_eq!(disturb_e2(Point::ORIGIN, 3, &cfg, &t).unwrap(), c(0.0, 0.0));
        let r = Point::from_polar(5.0 / cfg.wavenumber(), 0.7);
        let e2 = disturb_e2(r, 3, &cfg, &t).unwrap();
        assert!(e2.re.is_finite() && e2.im.is_finite());
        // Only odd orders survive at α = π/2, and they carry odd powers of i.
        assert!(e2.re.abs() < 1e-15);
        let longer = SeriesTruncation::with_order(t.max_order * 2, 5.0);
        assert!((disturb_e2(r, 3, &cfg, &longer).unwrap() - e2).norm() <= t.tail_bound.max(1e-15));
    }

    #[test]
    fn psi_and_gamma_vanish_without_constant() {
        let cfg = MeasurementConfig::fresnel();
        let objects = ObjectSet::fresnel_two_disks(cfg.eps_b);
        let t = SeriesTruncation::for_argument(20.0);
        let r = Point::new(0.01, 0.02);
        assert_eq!(phi_psi(r, 1, c(0.0, 0.0), &cfg, &objects, &t).unwrap().1, c(0.0, 0.0));
        assert_eq!(lambda_gamma(r, c(0.0, 0.0), &cfg, &objects, &t).unwrap().1, c(0.0, 0.0));
    }

    #[test]
    fn psi_modulus_at_origin() {
        let cfg = MeasurementConfig::fresnel();
        let t = SeriesTruncation::for_argument(1.0);
        let (phi, psi) = phi_psi(Point::ORIGIN, 1, c(1.0, 0.0), &cfg, &ObjectSet::empty(), &t).unwrap();
        assert_eq!(phi, c(0.0, 0.0));
        assert!((psi.norm() - 2f64.sqrt() * 23.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_at_scatterer_and_reality() {
        let cfg = MeasurementConfig::fresnel();
        let s = Scatterer::new(Point::new(0.02, 0.01), 0.005, 3.0 * EPS_0);
        let objects = ObjectSet::new(vec![s]).unwrap();
        let t = SeriesTruncation::for_argument(20.0);
        let (lambda, _) = lambda_gamma(s.center, c(0.0, 0.0), &cfg, &objects, &t).unwrap();
        let weight = contrast(&s, &cfg).unwrap() * s.area();
        let expected = 49.0 / (8.0 * PI * (0.72f64 * 0.76).sqrt()) * weight;
        assert!((lambda.re - expected).abs() / expected < 1e-14);
        assert_eq!(lambda.im, 0.0);
    }

    #[test]
    fn gamma_drops_even_orders_at_right_angle() {
        let cfg = MeasurementConfig::fresnel().with_bistatic_angle_deg(90.0);
        let t = SeriesTruncation::for_argument(6.0);
        let r = Point::new(0.05, 0.02);
        let (_, gamma) = lambda_gamma(r, c(1.0, 0.0), &cfg, &ObjectSet::empty(), &t).unwrap();
        let js = bessel_j_orders(t.max_order, cfg.wavenumber() * r.norm()).unwrap();
        let odd_only: f64 = js[0] * js[0]
            - 2.0 * js.iter().enumerate().skip(1).step_by(2).map(|(p, j)| j * j * sinc_u(p as f64 * PI / 2.0)).sum::<f64>();
        let n_conv = cfg.index_sets(1).unwrap().converted.len() as f64;
        assert!((gamma.norm() - (n_conv / cfg.wavenumber() * odd_only).abs()).abs() < 1e-14);
    }

    #[test]
    fn truncation_stability() {
        let cfg = MeasurementConfig::fresnel();
        let objects = ObjectSet::fresnel_two_disks(cfg.eps_b);
        let r = Point::new(0.07, -0.06);
        let base = SeriesTruncation::for_argument(20.0);
        let more = SeriesTruncation::with_order(base.max_order + 20, 20.0);
        let constant = c(0.3, 0.1);
        let (a, b) = phi_psi(r, 2, constant, &cfg, &objects, &base).unwrap();
        let (a2, b2) = phi_psi(r, 2, constant, &cfg, &objects, &more).unwrap();
        assert!(rel(a2, a) < 1e-10 && rel(b2, b) < 1e-10);
        let (l, g) = lambda_gamma(r, constant, &cfg, &objects, &base).unwrap();
        let (l2, g2) = lambda_gamma(r, constant, &cfg, &objects, &more).unwrap();
        assert!(rel(l2, l) < 1e-10 && rel(g2, g) < 1e-10);
    }

    #[test]
    fn f1_f2_basics() {
        let k = MeasurementConfig::fresnel().wavenumber();
        let t = SeriesTruncation::for_argument(k * 0.1);
        let (f1, f2) = f1_f2_profile(&[0.0], k, &t).unwrap();
        assert!((f1[0] - 1.0).abs() < 1e-12 && (f2[0] - 1.0).abs() < 1e-12);
        let xs: Vec<f64> = (0..=140).map(|i| 0.03 + i as f64 * 0.0005).collect();
        let band: Vec<f64> = xs.iter().flat_map(|&x| [x, -x]).collect();
        let (f1, f2) = f1_f2_profile(&band, k, &t).unwrap();
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        assert!(max(&f2) < max(&f1));
    }

    #[test]
    fn structure_refuses_disk_data() {
        let cfg = MeasurementConfig::fresnel();
        let objects = ObjectSet::fresnel_two_disks(cfg.eps_b);
        let matrix =
            synthesize(&cfg, &objects, c(0.0, 0.0), ForwardModel::Disk { quad_points: 16 }).unwrap();
        let t = SeriesTruncation::with_order(60, 0.0);
        let grid = ImagingGrid::square(0.1, 5);
        assert!(structure_vs_direct(&matrix, &objects, &grid, ImagingMode::Multi, &t).is_err());
    }

    #[test]
    fn structure_single_source_agrees() {
        let cfg = MeasurementConfig::fresnel();
        let objects = ObjectSet::fresnel_two_disks(cfg.eps_b);
        let matrix = synthesize(&cfg, &objects, c(0.0, 0.0), ForwardModel::Point).unwrap();
        let t = SeriesTruncation::with_order(60, 20.0);
        let grid = ImagingGrid::standard().with_resolution(41, 41);
        let eval = structure_vs_direct(&matrix, &objects, &grid, ImagingMode::Single { source: 1 }, &t)
            .unwrap();
        assert!(eval.stats.correlation >= 0.99, "{:?}", eval.stats);
        assert!(eval.stats.max_deviation <= 0.10, "{:?}", eval.stats);
    }

    #[test]
    fn structure_rejects_short_truncation() {
        let cfg = MeasurementConfig::fresnel();
        let objects = ObjectSet::fresnel_two_disks(cfg.eps_b);
        let matrix = synthesize(&cfg, &objects, c(0.0, 0.0), ForwardModel::Point).unwrap();
        let t = SeriesTruncation::with_order(10, 0.0);
        let grid = ImagingGrid::square(0.1, 5);
        let out = structure_vs_direct(&matrix, &objects, &grid, ImagingMode::Single { source: 1 }, &t);
        assert!(matches!(out, Err(Error::Truncation(_))));
    }
}
