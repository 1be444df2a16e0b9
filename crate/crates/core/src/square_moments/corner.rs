#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::curve::{CurveParam, CORNER};

/// Estimated higher derivatives of `a` at the corner and at mid interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerReport {
    pub second_at_corner: f64,
    pub third_at_corner: f64,
    pub second_at_mid: f64,
    /// `|a''(τ)| / |a''(τ/2)|`.
    pub ratio: f64,
}

/// Two Richardson levels over `D(h), D(h/2), D(h/4)` for an error
/// expansion in powers `h^p, h^{p+step}, …`.
fn richardson(d: impl Fn(f64) -> f64, h: f64, p: i32, step: i32) -> f64 {
    let (d0, d1, d2) = (d(h), d(h / 2.0), d(h / 4.0));
    let f1 = 2f64.powi(p);
    let e1 = (f1 * d1 - d0) / (f1 - 1.0);
    let e2 = (f1 * d2 - d1) / (f1 - 1.0);
    let f2 = 2f64.powi(p + step);
    (f2 * e2 - e1) / (f2 - 1.0)
}

/// One-sided differences at `t = τ` (the curve ends there) and centred ones
/// at `τ/2`, sharpened by Richardson extrapolation. Uses only values of `a`.
pub fn corner_flatness(curve: &CurveParam) -> CornerReport {
    let a = |t: f64| curve.a(t);
    let h = 0.02;
    let second_at_corner = richardson(
        |h| (a(CORNER) - 2.0 * a(CORNER - h) + a(CORNER - 2.0 * h)) / (h * h),
        h,
        1,
        1,
    );
    let third_at_corner = richardson(
        |h| {
            (a(CORNER) - 3.0 * a(CORNER - h) + 3.0 * a(CORNER - 2.0 * h) - a(CORNER - 3.0 * h))
                / (h * h * h)
        },
        h,
        1,
        1,
    );
    let mid = 0.5 * CORNER;
    let second_at_mid = richardson(
        |h| (a(mid + h) - 2.0 * a(mid) + a(mid - h)) / (h * h),
        h,
        2,
        2,
    );
    let ratio = if second_at_mid == 0.0 {
        if second_at_corner == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        second_at_corner.abs() / second_at_mid.abs()
    };
    CornerReport {
        second_at_corner,
        third_at_corner,
        second_at_mid,
        ratio,
    }
}
