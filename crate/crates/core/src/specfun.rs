//! Scalar kernels: integer-order Bessel functions of the first kind, the
//! zero-order Hankel function of the first kind, the 2D Helmholtz Green's
//! function and its far-field form, and the unnormalized sinc.
//!
//! `J_p(x)` is evaluated by Miller's backward recurrence normalised with
//! `J_0 + 2 Σ J_{2k} = 1`, which is stable for every order the series forms
//! need. `Y_0` comes from the Neumann series over the same even-order values
//! below [`HANKEL_ASYMPTOTIC_FROM`] and from Hankel's asymptotic expansion
//! above it.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest |x| accepted by the Bessel routines.
pub const MAX_ARGUMENT: f64 = 1e4;

/// Switch point between the Neumann series and the asymptotic expansion.
pub const HANKEL_ASYMPTOTIC_FROM: f64 = 25.0;

const RESCALE_ABOVE: f64 = 1e200;
const RESCALE_BY: f64 = 1e-200;

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument {x} is not finite")));
    }
    if x.abs() >= MAX_ARGUMENT {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside |x| < {MAX_ARGUMENT}"
        )));
    }
    Ok(())
}

/// Backward-recurrence start index for orders up to `max_order` at `x >= 0`.
fn miller_start(max_order: usize, x: f64) -> usize {
    let top = max_order.max(x.ceil() as usize);
    let start = top + 24 + (40.0 * top as f64).sqrt() as usize;
    start + (start & 1)
}

/// `J_0(x) ..= J_{max_order}(x)` for `x > 0` by Miller's algorithm.
fn miller(max_order: usize, x: f64) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let start = miller_start(max_order, x);
    let mut out = vec![0.0; max_order + 1];
    let two_over_x = 2.0 / x;

    let mut upper = 0.0; // J_{k+1}
    let mut current = 1.0; // J_k, arbitrary seed at k = start
    let mut even_sum = 0.0;

    for k in (1..=start).rev() {
        let lower = k as f64 * two_over_x * current - upper;
        upper = current;
        current = lower;
        // `current` now holds J_{k-1}.
        let order = k - 1;
        if order <= max_order {
            out[order] = current;
        }
        if order > 0 && order % 2 == 0 {
            even_sum += current;
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            upper *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            for v in out.iter_mut().skip(order) {
                *v *= RESCALE_BY;
            }
        }
    }

    let norm = current + 2.0 * even_sum;
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// `J_0(x), J_1(x), ..., J_{max_order}(x)` in one backward sweep.
pub fn bessel_j_orders(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    if x == 0.0 {
        let mut out = vec![0.0; max_order + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    let mut out = miller(max_order, x.abs());
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    Ok(out)
}

/// Bessel function of the first kind `J_order(x)`.
///
/// Negative orders are excluded by the type; `J_order(-x) = (-1)^order J_order(x)`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    let values = bessel_j_orders(order as usize, x)?;
    Ok(values[order as usize])
}

fn y0_neumann(x: f64) -> (f64, f64) {
    let max_order = 2 * ((x.ceil() as usize) / 2 + 24);
    let j = miller(max_order, x);
    let mut tail = 0.0;
    for k in (1..=max_order / 2).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        tail += sign * j[2 * k] / k as f64;
    }
    let y0 = (2.0 / PI) * (((x / 2.0).ln() + EULER_GAMMA) * j[0] - 2.0 * tail);
    (j[0], y0)
}

fn hankel1_0_asymptotic(x: f64) -> Complex64 {
    // sum_k a_k (i/x)^k with a_k = prod_{j<=k} -(2j-1)^2 / (8j)
    let step = Complex64::new(0.0, 1.0 / x);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * step * (-(odd * odd) / (8.0 * k as f64));
        if next.norm() >= term.norm() {
            break;
        }
        term = next;
        sum += term;
        if term.norm() < 1e-17 || k > 80 {
            break;
        }
        k += 1;
    }
    let amplitude = (2.0 / (PI * x)).sqrt();
    sum * Complex64::from_polar(amplitude, x - FRAC_PI_4)
}

/// Zero-order Hankel function of the first kind, `H_0^{(1)}(x) = J_0(x) + i Y_0(x)`.
pub fn hankel1_0(x: f64) -> Result<Complex64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "H_0^(1) needs a finite positive argument, got {x}"
        )));
    }
    if x >= HANKEL_ASYMPTOTIC_FROM {
        return Ok(hankel1_0_asymptotic(x));
    }
    let (j0, y0) = y0_neumann(x);
    Ok(Complex64::new(j0, y0))
}

/// Free-space Green's function `G(r, r') = -(i/4) H_0^{(1)}(k |r - r'|)`.
pub fn green2d(k: f64, r: Point, r_src: Point) -> Result<Complex64> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let distance = r.distance(r_src);
    if distance == 0.0 {
        return Err(Error::Singularity(format!(
            "Green's function evaluated at coincident points ({}, {})",
            r.x, r.y
        )));
    }
    Ok(Complex64::new(0.0, -0.25) * hankel1_0(k * distance)?)
}

/// Far-field form of the Green's function between a point `r` near the
/// origin and the ring point `ring_radius * (cos angle, sin angle)`:
///
/// `-(1+i) e^{ikR} / (4 sqrt(kRπ)) · e^{-ik θ·r}`.
pub fn green2d_farfield(k: f64, ring_radius: f64, angle: f64, r: Point) -> Result<Complex64> {
    if !ring_radius.is_finite() || ring_radius <= 0.0 {
        return Err(Error::Domain(format!(
            "ring radius must be positive, got {ring_radius}"
        )));
    }
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let kr = k * ring_radius;
    if 4.0 * kr < 20.0 {
        return Err(Error::Domain(format!(
            "far-field form needs 4kR >= 20, got {:.3}",
            4.0 * kr
        )));
    }
    if 4.0 * kr < 200.0 {
        log::warn!("far-field form used with 4kR = {:.1}; expect percent-level error", 4.0 * kr);
    }
    let direction = Point::new(angle.cos(), angle.sin());
    let amplitude = Complex64::new(-1.0, -1.0) * Complex64::from_polar(1.0, kr)
        / (4.0 * (kr * PI).sqrt());
    Ok(amplitude * Complex64::from_polar(1.0, -k * direction.dot(r)))
}

/// Unnormalized sinc, `sin(x)/x`, continued by 1 at the origin.
pub fn sinc_u(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}
