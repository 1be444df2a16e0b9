use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::curve::{CurveParam, CORNER};
use crate::error::{invalid, Result};
use crate::quadrature::AdaptiveQuadrature;

/// Residuals `r_k`, `k = 0..K−1`, of the truncated moment system.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSystem {
    pub omega: f64,
    pub residuals: Vec<f64>,
}

impl MomentSystem {
    pub fn order(&self) -> usize {
        self.residuals.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// `z^n` through the polar form; accurate for large `n` since `|z| ≤ 1`
/// near the corner.
fn power(z: Complex64, n: i32) -> Complex64 {
    Complex64::from_polar(z.norm().powi(n), n as f64 * z.arg())
}

fn quadrature() -> AdaptiveQuadrature {
    AdaptiveQuadrature::new(20, 1e-13, 1e-300)
}

/// Right-hand side `(−1)^k (ω+1) / (4(2k+1))`.
pub fn moment_target(omega: f64, k: usize) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * (omega + 1.0) / (4.0 * (2 * k + 1) as f64)
}

/// `Re ∫₀^τ (a(t) + i t)^{4k+1} dt`.
pub fn moment_integral(curve: &CurveParam, k: usize) -> Result<f64> {
    let n = (4 * k + 1) as i32;
    quadrature().integrate(0.0, CORNER, |t| power(Complex64::new(curve.a(t), t), n).re)
}

pub fn moment_residual(curve: &CurveParam, k: usize) -> Result<f64> {
    Ok(moment_integral(curve, k)? - moment_target(curve.omega, k))
}

pub fn moment_system(curve: &CurveParam, order: usize) -> Result<MomentSystem> {
    let residuals = (0..order)
        .map(|k| moment_residual(curve, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSystem {
        omega: curve.omega,
        residuals,
    })
}

/// `r_k` after one integration by parts against `dt = dz / (i + a')`:
///
/// ```text
/// (4k+2) (r_k + target) = (−1)^k / (m² + 1) − a(0)^{4k+2} a'(0) / (1 + a'(0)²)
///                         + Re ∫₀^τ z^{4k+2} a'' / (i + a')² dt.
/// ```
///
/// The `t = 0` term vanishes when `a'(0) = 0`.
pub fn moment_residual_by_parts(curve: &CurveParam, k: usize) -> Result<f64> {
    let n = (4 * k + 2) as i32;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let corner = sign / (curve.m * curve.m + 1.0);
    let j0 = curve.jet(0.0);
    let origin = j0[0].powi(n) * j0[1] / (1.0 + j0[1] * j0[1]);
    let i = Complex64::new(0.0, 1.0);
    let body: f64 = quadrature().integrate(0.0, CORNER, |t| {
        let j = curve.jet(t);
        let slope = i + j[1];
        (power(Complex64::new(j[0], t), n) * j[2] / (slope * slope)).re
    })?;
    Ok((corner - origin + body) / n as f64 - moment_target(curve.omega, k))
}

/// Boundary values of `H₊` on the four sides, counter-clockwise from the
/// right side.
fn outer_value(side: usize, omega: f64, z: Complex64) -> Complex64 {
    let r2 = Complex64::new(SQRT_2, 0.0);
    let ir2 = Complex64::new(0.0, SQRT_2);
    omega
        * match side {
            0 => r2 - z,
            1 => z - ir2,
            2 => -z - r2,
            _ => z + ir2,
        }
}

/// `∮_{∂A} H₋(z) z^n dz` over the closed curve made of the four rotated
/// copies of `Γ`, with `H₋ = H₊ − z̄` taken from the side each copy faces.
///
/// Holomorphic extension of `H₋` into `A` requires this to vanish for all
/// `n`. For `n = 4k` it equals `−16 i r_k / (4k+1)`.
pub fn contour_moment(curve: &CurveParam, n: u32) -> Result<Complex64> {
    let q = quadrature();
    let mut total = Complex64::new(0.0, 0.0);
    let mut rot = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for side in 0..4 {
        let f = |t: f64| {
            let j = curve.jet(t);
            let z = rot * Complex64::new(j[0], t);
            let dz = rot * Complex64::new(j[1], 1.0);
            (outer_value(side, curve.omega, z) - z.conj()) * z.powu(n) * dz
        };
        // The even extension has a corner at t = 0 unless a'(0) = 0.
        total += q.integrate(-CORNER, 0.0, f)?;
        total += q.integrate(0.0, CORNER, f)?;
        rot *= i;
    }
    Ok(total)
}

/// Closed outline of the central region, counter-clockwise, `4·samples`
/// points.
pub fn outline(curve: &CurveParam, samples: usize) -> Result<Vec<[f64; 2]>> {
    if samples < 2 {
        return Err(invalid("outline needs at least 2 samples per side"));
    }
    let mut out = Vec::with_capacity(4 * samples);
    let mut rot = Complex64::new(1.0, 0.0);
    for _ in 0..4 {
        for s in 0..samples {
            let t = -CORNER + 2.0 * CORNER * s as f64 / samples as f64;
            let z = rot * Complex64::new(curve.a(t), t);
            out.push([z.re, z.im]);
        }
        rot *= Complex64::new(0.0, 1.0);
    }
    Ok(out)
}
