//! Antenna rings and bistatic masking.
//!
//! Transmitters sit on a ring of radius `P` at `ϑ_m = 2π(m-1)/M`, receivers on
//! a ring of radius `Q` at `θ_n = 2π(n-1)/N`. For transmitter `m`, a receiver
//! is *measured* when its angular distance from `ϑ_m` is at least the
//! bistatic angle `α`; the remaining receivers are *converted*.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Tolerance applied to every angle comparison, in radians.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

/// Free-space permittivity, F/m.
pub const EPS_0: f64 = 8.854e-12;
/// Free-space permeability, H/m.
pub const MU_0: f64 = 4.0 * PI * 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Polar angle in `(-π, π]`; zero for the origin.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Smallest absolute angle between two directions, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Measurement setup shared by every stage of the pipeline.
///
/// The bistatic angle is stored in degrees, which is how every file carries
/// it; [`MeasurementConfig::bistatic_angle`] gives radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementConfig {
    pub frequency_hz: f64,
    pub eps_b: f64,
    pub mu_b: f64,
    /// Transmitter ring radius `P`, metres.
    pub tx_radius: f64,
    /// Receiver ring radius `Q`, metres.
    pub rx_radius: f64,
    /// Number of transmitters `M`.
    pub tx_count: usize,
    /// Number of receivers `N`.
    pub rx_count: usize,
    pub bistatic_angle_deg: f64,
}

impl MeasurementConfig {
    /// The 4 GHz two-ring arrangement: 36 transmitters on 0.72 m, 72 receivers
    /// on 0.76 m, bistatic angle 60°.
    pub fn fresnel() -> Self {
        Self {
            frequency_hz: 4e9,
            eps_b: EPS_0,
            mu_b: MU_0,
            tx_radius: 0.72,
            rx_radius: 0.76,
            tx_count: 36,
            rx_count: 72,
            bistatic_angle_deg: 60.0,
        }
    }

    pub fn with_bistatic_angle_deg(mut self, degrees: f64) -> Self {
        self.bistatic_angle_deg = degrees;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.frequency_hz) {
            return Err(Error::InvalidConfig(format!(
                "frequency_hz must be positive, got {}",
                self.frequency_hz
            )));
        }
        if !positive(self.eps_b) || !positive(self.mu_b) {
            return Err(Error::InvalidConfig(
                "background eps_b and mu_b must be positive".into(),
            ));
        }
        if !positive(self.tx_radius) || !positive(self.rx_radius) {
            return Err(Error::InvalidConfig(format!(
                "ring radii must be positive, got P={} Q={}",
                self.tx_radius, self.rx_radius
            )));
        }
        if self.tx_count < 1 {
            return Err(Error::InvalidConfig("need at least one transmitter".into()));
        }
        if self.rx_count < 2 {
            return Err(Error::InvalidConfig("need at least two receivers".into()));
        }
        let alpha = self.bistatic_angle_deg;
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 180.0) {
            return Err(Error::InvalidConfig(format!(
                "bistatic angle must lie in (0, 180] degrees, got {alpha}"
            )));
        }
        Ok(())
    }

    /// Background wavenumber `k = 2πf sqrt(ε_b μ_b)`.
    pub fn wavenumber(&self) -> f64 {
        TAU * self.frequency_hz * (self.eps_b * self.mu_b).sqrt()
    }

    pub fn wavelength(&self) -> f64 {
        TAU / self.wavenumber()
    }

    /// Bistatic angle in radians.
    pub fn bistatic_angle(&self) -> f64 {
        self.bistatic_angle_deg.to_radians()
    }

    /// `α = π`: a single receiver per transmitter. Only meaningful for studying
    /// the degenerate limit.
    pub fn is_degenerate(&self) -> bool {
        self.bistatic_angle() >= PI - ANGLE_TOLERANCE
    }

    pub fn tx_step(&self) -> f64 {
        TAU / self.tx_count as f64
    }

    pub fn rx_step(&self) -> f64 {
        TAU / self.rx_count as f64
    }

    fn check_tx(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.tx_count {
            return Err(Error::IndexOutOfRange { kind: "transmitter", index: m, len: self.tx_count });
        }
        Ok(())
    }

    fn check_rx(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.rx_count {
            return Err(Error::IndexOutOfRange { kind: "receiver", index: n, len: self.rx_count });
        }
        Ok(())
    }

    /// `ϑ_m` in radians.
    pub fn tx_angle(&self, m: usize) -> Result<f64> {
        self.check_tx(m)?;
        Ok(self.tx_step() * (m - 1) as f64)
    }

    /// `θ_n` in radians.
    pub fn rx_angle(&self, n: usize) -> Result<f64> {
        self.check_rx(n)?;
        Ok(self.rx_step() * (n - 1) as f64)
    }

    pub fn transmitter_position(&self, m: usize) -> Result<Point> {
        Ok(Point::from_polar(self.tx_radius, self.tx_angle(m)?))
    }

    pub fn receiver_position(&self, n: usize) -> Result<Point> {
        Ok(Point::from_polar(self.rx_radius, self.rx_angle(n)?))
    }

    pub fn transmitters(&self) -> Vec<Point> {
        (1..=self.tx_count)
            .map(|m| Point::from_polar(self.tx_radius, self.tx_step() * (m - 1) as f64))
            .collect()
    }

    pub fn receivers(&self) -> Vec<Point> {
        (1..=self.rx_count)
            .map(|n| Point::from_polar(self.rx_radius, self.rx_step() * (n - 1) as f64))
            .collect()
    }

    /// Whether receiver `n` records data while transmitter `m` is active.
    pub fn is_measured(&self, m: usize, n: usize) -> Result<bool> {
        let d = angular_distance(self.rx_angle(n)?, self.tx_angle(m)?);
        Ok(d >= self.bistatic_angle() - ANGLE_TOLERANCE)
    }

    pub fn index_sets(&self, m: usize) -> Result<IndexSets> {
        self.check_tx(m)?;
        let mut measured = Vec::new();
        let mut converted = Vec::new();
        for n in 1..=self.rx_count {
            if self.is_measured(m, n)? {
                measured.push(n);
            } else {
                converted.push(n);
            }
        }
        Ok(IndexSets { source: m, measured, converted })
    }
}

/// Partition of the receivers for one transmitter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub source: usize,
    /// Receivers that record data, ascending.
    pub measured: Vec<usize>,
    /// Receivers whose data is replaced by the conversion constant, ascending.
    pub converted: Vec<usize>,
}
