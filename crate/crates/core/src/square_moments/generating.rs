use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::curve::CurveParam;
use crate::error::{invalid, Result};
use crate::quadrature::AdaptiveQuadrature;

/// One evaluation of the rescaled generating-function residual
///
/// ```text
/// G(z) = ∫₀¹ [cos(zs) sinh(z u(s)) + sin(z u(s)) cosh(zs)] ds − (ω+1)/z · sinh z · sin z.
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratingValue {
    pub z: f64,
    /// `G(z) e^{−z}`, always finite.
    pub scaled: f64,
    /// `ln |G(z)|`.
    pub log_abs: f64,
    /// `G(z)`; infinite once `e^z` leaves the floating range.
    pub value: f64,
}

/// `sinh(y) cosh(x) e^{−z}` without forming `cosh(x)` or `e^z`.
fn sinh_cosh_scaled(y: f64, x: f64, z: f64) -> f64 {
    if y.abs() < 1.0 {
        0.5 * y.sinh() * ((x - z).exp() + (-x - z).exp())
    } else {
        0.25 * ((x + y - z).exp() - (x - y - z).exp() + (-x + y - z).exp() - (-x - y - z).exp())
    }
}

/// `G(z)` split as `∫ (integrand(u) − integrand(u0)) + closed form for u0`,
/// where `u0(s) = 1 + m(s − 1)` is the corner line. The difference is
/// written with product formulas in `w = u − u0`, so it carries no
/// cancellation against the `e^z` growth of either side.
pub fn generating_residual(curve: &CurveParam, zs: &[f64]) -> Result<Vec<GeneratingValue>> {
    // The scaled integrand is O(1), so 1e-15 absolute is round-off level
    // even when the perturbation integral itself is tiny.
    let q = AdaptiveQuadrature::new(20, 1e-12, 1e-15);
    let m = curve.m;
    let omega = curve.omega;
    zs.iter()
        .map(|&z| {
            if !(z > 0.0 && z.is_finite()) {
                return Err(invalid(alloc::format!(
                    "z = {z} must be positive and finite"
                )));
            }
            let perturbation: f64 = q.integrate(0.0, 1.0, |s| {
                let u0 = 1.0 + m * (s - 1.0);
                let w = curve.w(s);
                let v = u0 + 0.5 * w;
                // 2 cos(zs) cosh(zv) sinh(zw/2) + 2 cosh(zs) cos(zv) sin(zw/2)
                let first = 2.0 * (z * s).cos() * sinh_cosh_scaled(0.5 * z * w, z * v, z);
                let cosh_s = 0.5 * ((z * s - z).exp() + (-z * s - z).exp());
                let second = 2.0 * cosh_s * (z * v).cos() * (0.5 * z * w).sin();
                first + second
            })?;
            let sinh_z = 0.5 * (1.0 - (-2.0 * z).exp());
            let cosh_tail = 0.5 * ((-m * z).exp() + ((m - 2.0) * z).exp());
            let cos_tail = ((1.0 - m) * z).cos() * (-z).exp();
            let denom = m * m + 1.0;
            let closed = (2.0 / denom - (omega + 1.0)) * sinh_z * z.sin() / z
                + m * (cos_tail - cosh_tail) / (z * denom);
            let scaled = perturbation + closed;
            let log_abs = scaled.abs().ln() + z;
            let value = if z < 700.0 {
                scaled * z.exp()
            } else {
                scaled.signum() * f64::INFINITY
            };
            Ok(GeneratingValue {
                z,
                scaled,
                log_abs,
                value,
            })
        })
        .collect()
}

/// Least-squares line through `(z, ln |G(z)|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the line.
    pub r_squared: f64,
}

pub fn log_growth_fit(values: &[GeneratingValue]) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .filter(|v| v.log_abs.is_finite())
        .map(|v| (v.z, v.log_abs))
        .collect();
    if pts.len() < 2 {
        return Err(invalid("need two finite residuals to fit a growth rate"));
    }
    let n = pts.len() as f64;
    let mz = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mz).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mz) * (p.1 - ml)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - ml).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("growth fit needs distinct z values"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(GrowthFit {
        slope,
        intercept: ml - slope * mz,
        r_squared,
    })
}
