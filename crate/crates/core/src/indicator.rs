//! Single- and multi-source direct sampling indicators and grid sweeps.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::MaskedMeasurementMatrix;
use crate::geometry::{MeasurementConfig, Point};
use crate::specfun::green2d;

/// Rectangular grid over the imaging region, sampled at cell centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagingGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ImagingGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let grid = Self { x_min, x_max, y_min, y_max, nx, ny };
        grid.validate()?;
        Ok(grid)
    }

    /// `101 × 101` cells on `[-0.1, 0.1]²` m; the origin is a cell centre.
    pub fn standard() -> Self {
        Self::square(0.1, 101)
    }

    /// `n × n` cells on `[-half_width, half_width]²`.
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width, nx: n, ny: n }
    }

    pub fn with_resolution(self, nx: usize, ny: usize) -> Self {
        Self { nx, ny, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidConfig("grid bounds must be finite and strictly ordered".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 2 × 2 cells, got {} × {}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + (ix as f64 + 0.5) * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + (iy as f64 + 0.5) * self.dy()
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point {
        Point::new(self.x(ix), self.y(iy))
    }

    /// Cell centres in storage order (`iy` outer, `ix` inner).
    pub fn points(&self) -> Vec<Point> {
        (0..self.ny)
            .flat_map(|iy| (0..self.nx).map(move |ix| self.point(ix, iy)))
            .collect()
    }

    /// Index `(ix, iy)` of the cell centre closest to `p`, clamped to the grid.
    pub fn nearest_cell(&self, p: Point) -> (usize, usize) {
        let snap = |v: f64, lo: f64, step: f64, n: usize| {
            let i = ((v - lo) / step - 0.5).round();
            i.clamp(0.0, (n - 1) as f64) as usize
        };
        (snap(p.x, self.x_min, self.dx(), self.nx), snap(p.y, self.y_min, self.dy(), self.ny))
    }

    /// Largest distance from a cell centre to the origin.
    pub fn max_radius(&self) -> f64 {
        let far = |lo: f64, hi: f64, step: f64| (lo + 0.5 * step).abs().max((hi - 0.5 * step).abs());
        far(self.x_min, self.x_max, self.dx()).hypot(far(self.y_min, self.y_max, self.dy()))
    }
}

/// Which indicator a map holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImagingMode {
    /// `F_dsm(r, m, C)` for one transmitter.
    Single { source: usize },
    /// `F_msm(r, C)` over all transmitters.
    Multi,
}

/// A grid cell holding a (local) maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub ix: usize,
    pub iy: usize,
    pub point: Point,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMap {
    pub grid: ImagingGrid,
    /// Row-major values, `values[iy * nx + ix]`.
    pub values: Vec<f64>,
    pub mode: ImagingMode,
    pub constant: Complex64,
    pub bistatic_angle_deg: f64,
    pub normalized: bool,
}

impl IndicatorMap {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    fn peak_at(&self, index: usize) -> Peak {
        let (ix, iy) = (index % self.grid.nx, index / self.grid.nx);
        Peak { ix, iy, point: self.grid.point(ix, iy), value: self.values[index] }
    }

    /// Global maximum; ties resolve to the first cell in storage order.
    pub fn argmax(&self) -> Peak {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        self.peak_at(best)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Cells not exceeded by any of their 8 neighbours, strongest first, with
    /// weaker peaks closer than `min_separation` metres to a stronger one dropped.
    pub fn local_maxima(&self, min_separation: f64) -> Vec<Peak> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut candidates = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let v = self.value(ix, iy);
                let mut is_max = true;
                for jy in iy.saturating_sub(1)..=(iy + 1).min(ny - 1) {
                    for jx in ix.saturating_sub(1)..=(ix + 1).min(nx - 1) {
                        if (jx, jy) != (ix, iy) && self.value(jx, jy) > v {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    candidates.push(self.peak_at(iy * nx + ix));
                }
            }
        }
        candidates.sort_by(|a, b| b.value.total_cmp(&a.value));
        let mut kept: Vec<Peak> = Vec::new();
        for c in candidates {
            if kept.iter().all(|k| k.point.distance(c.point) >= min_separation) {
                kept.push(c);
            }
        }
        kept
    }
}

fn ring_vector(k: f64, antennas: &[Point], r: Point) -> Result<Vec<Complex64>> {
    antennas.iter().map(|&a| green2d(k, a, r)).collect()
}

/// `Q(r)`: Green's function from every receiver to `r`.
pub fn test_vector_rx(config: &MeasurementConfig, r: Point) -> Result<Vec<Complex64>> {
    ring_vector(config.wavenumber(), &config.receivers(), r)
}

/// `P(r)`: Green's function from every transmitter to `r`.
pub fn test_vector_tx(config: &MeasurementConfig, r: Point) -> Result<Vec<Complex64>> {
    ring_vector(config.wavenumber(), &config.transmitters(), r)
}

/// `Σ a_j conj(b_j)`.
pub fn inner_l2(a: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y.conj()).sum())
}

pub fn norm_l2(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized_modulus(inner: Complex64, norm_a: f64, norm_b: f64, what: &str) -> Result<f64> {
    if norm_a == 0.0 {
        return Err(Error::DegenerateData(format!("{what} has zero norm")));
    }
    if norm_b == 0.0 {
        return Err(Error::DegenerateData("test vector has zero norm".into()));
    }
    Ok(inner.norm() / (norm_a * norm_b))
}

/// `F(r, m)` on a full data column `S(m)` with no conversion.
pub fn classical_indicator(config: &MeasurementConfig, column: &[Complex64], r: Point) -> Result<f64> {
    let q = test_vector_rx(config, r)?;
    normalized_modulus(inner_l2(column, &q)?, norm_l2(column), norm_l2(&q), "data column")
}

/// Un-normalised `<S(C, m), Q(r)>`.
pub fn dsm_inner(matrix: &MaskedMeasurementMatrix, m: usize, r: Point) -> Result<Complex64> {
    inner_l2(matrix.column(m)?, &test_vector_rx(matrix.config(), r)?)
}

/// Single-source indicator `F_dsm(r, m, C)`.
pub fn f_dsm(matrix: &MaskedMeasurementMatrix, m: usize, r: Point) -> Result<f64> {
    classical_indicator(matrix.config(), matrix.column(m)?, r)
}

/// `M(C)` at `r`: component `m` is `<S(C, m), Q(r)>`.
pub fn msm_vector(matrix: &MaskedMeasurementMatrix, r: Point) -> Result<Vec<Complex64>> {
    let q = test_vector_rx(matrix.config(), r)?;
    matrix.columns().map(|col| inner_l2(col, &q)).collect()
}

/// Un-normalised `<M(C), P(r)>`.
pub fn msm_inner(matrix: &MaskedMeasurementMatrix, r: Point) -> Result<Complex64> {
    inner_l2(&msm_vector(matrix, r)?, &test_vector_tx(matrix.config(), r)?)
}

/// Multi-source indicator `F_msm(r, C)`.
pub fn f_msm(matrix: &MaskedMeasurementMatrix, r: Point) -> Result<f64> {
    let mv = msm_vector(matrix, r)?;
    let p = test_vector_tx(matrix.config(), r)?;
    normalized_modulus(inner_l2(&mv, &p)?, norm_l2(&mv), norm_l2(&p), "multi-source vector M(C)")
}

/// Evaluate the chosen indicator at every cell centre of `grid`.
///
/// With `normalize`, values are divided by their grid maximum.
pub fn image(
    matrix: &MaskedMeasurementMatrix,
    grid: &ImagingGrid,
    mode: ImagingMode,
    normalize: bool,
) -> Result<IndicatorMap> {
    grid.validate()?;
    let config = matrix.config();
    let k = config.wavenumber();
    let receivers = config.receivers();
    let transmitters = config.transmitters();

    let values: Vec<f64> = match mode {
        ImagingMode::Single { source } => {
            let column = matrix.column(source)?;
            let column_norm = norm_l2(column);
            if column_norm == 0.0 {
                return Err(Error::DegenerateData(format!("data column {source} has zero norm")));
            }
            grid.points()
                .par_iter()
                .map(|&r| {
                    let q = ring_vector(k, &receivers, r)?;
                    normalized_modulus(inner_l2(column, &q)?, column_norm, norm_l2(&q), "data column")
                })
                .collect::<Result<_>>()?
        }
        ImagingMode::Multi => grid
            .points()
            .par_iter()
            .map(|&r| {
                let q = ring_vector(k, &receivers, r)?;
                let mv: Vec<Complex64> =
                    matrix.columns().map(|col| inner_l2(col, &q)).collect::<Result<_>>()?;
                let p = ring_vector(k, &transmitters, r)?;
                normalized_modulus(inner_l2(&mv, &p)?, norm_l2(&mv), norm_l2(&p), "multi-source vector M(C)")
            })
            .collect::<Result<_>>()?,
    };

    let mut map = IndicatorMap {
        grid: *grid,
        values,
        mode,
        constant: matrix.constant(),
        bistatic_angle_deg: config.bistatic_angle_deg,
        normalized: false,
    };
    if normalize {
        let max = map.max();
        if !(max > 0.0) {
            return Err(Error::DegenerateData("indicator map is identically zero".into()));
        }
        map.values.iter_mut().for_each(|v| *v /= max);
        map.normalized = true;
    }
    Ok(map)
}
