use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::slope_m;
use crate::error::{invalid, Result};

/// `1/√2`: the corner of the square sits at `τ(1 + i)`.
pub const CORNER: f64 = FRAC_1_SQRT_2;

/// The quarter `Γ` of the inclusion boundary facing the right side of the
/// square, `z(t) = a(t) + i t` for `t ∈ [−τ, τ]`, with `a` even and
///
/// ```text
/// a(t) = τ + m (t − τ) + (t − τ)^p Σ c_j T_j(2√2 t − 1),   t ∈ [0, τ].
/// ```
///
/// `p = 2` leaves `a''(τ)` free; `p = 3` forces it to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveParam {
    pub omega: f64,
    pub m: f64,
    pub coeffs: Vec<f64>,
    pub corner_order: u32,
}

impl CurveParam {
    pub fn new(omega: f64, m: f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::with_corner_order(omega, m, coeffs, 2)
    }

    pub fn with_corner_order(
        omega: f64,
        m: f64,
        coeffs: Vec<f64>,
        corner_order: u32,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(invalid(alloc::format!("ω = {omega} must lie in [0, 1]")));
        }
        if !m.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("curve parameters must be finite"));
        }
        if !(2..=3).contains(&corner_order) {
            return Err(invalid("corner order must be 2 or 3"));
        }
        Ok(CurveParam {
            omega,
            m,
            coeffs,
            corner_order,
        })
    }

    /// The straight segment entering the corner with slope `slope_m(ω)`.
    pub fn corner_line(omega: f64) -> Result<Self> {
        Self::new(omega, slope_m(omega)?, Vec::new())
    }

    /// `a, a', a'', a'''` at `t ∈ [−τ, τ]`.
    pub fn jet(&self, t: f64) -> [f64; 4] {
        let s = if t < 0.0 { -1.0 } else { 1.0 };
        let j = half_jet(self.m, &self.coeffs, self.corner_order, t.abs());
        [j[0], s * j[1], j[2], s * j[3]]
    }

    pub fn a(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }

    /// Rescaled curve `u(s) = √2 a(s/√2)` on `[0, 1]`.
    pub fn u(&self, s: f64) -> f64 {
        SQRT_2 * self.a(s * CORNER)
    }

    /// Departure from the corner line in the rescaled variable, `w = u − u0`.
    pub fn w(&self, s: f64) -> f64 {
        let t = s * CORNER;
        let d = t - CORNER;
        SQRT_2
            * d.powi(self.corner_order as i32)
            * chebyshev(&self.coeffs, 2.0 * SQRT_2 * t - 1.0)[0]
    }

    /// `∂a/∂m` followed by `∂a/∂c_j`, at `t ∈ [0, τ]`.
    pub fn parameter_gradient(&self, t: f64, out: &mut Vec<f64>) {
        out.clear();
        let d = t - CORNER;
        out.push(d);
        let dp = d.powi(self.corner_order as i32);
        let x = 2.0 * SQRT_2 * t - 1.0;
        let (mut t0, mut t1) = (1.0, x);
        for j in 0..self.coeffs.len() {
            let tj = match j {
                0 => t0,
                1 => t1,
                _ => {
                    let t2 = 2.0 * x * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                    t2
                }
            };
            out.push(dp * tj);
        }
    }

    /// `min a` and `max a` over `n` equispaced samples of `[0, τ]`.
    pub fn range(&self, n: usize) -> (f64, f64) {
        let n = n.max(2);
        (0..n)
            .map(|i| self.a(CORNER * i as f64 / (n - 1) as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `t < a ≤ τ` on the sampled half interval before the corner, so the
    /// four copies of `Γ` stay inside their quarters of the square and
    /// bound a simple region.
    pub fn is_admissible(&self) -> bool {
        let n = 257;
        let (_, hi) = self.range(n);
        let inside = (0..n - 1).all(|i| {
            let t = CORNER * i as f64 / (n - 1) as f64;
            self.a(t) > t
        });
        inside && hi <= CORNER * (1.0 + 1e-12)
    }

    /// Area of the central region bounded by the four rotated copies of `Γ`
    /// divided by the area of the square, `8 ∫₀^τ a dt − 2` over 2.
    pub fn area_fraction(&self) -> f64 {
        let gl = crate::quadrature::GaussLegendre::new(48);
        let int: f64 = gl.integrate(0.0, CORNER, |t| self.a(t));
        4.0 * int - 1.0
    }
}

/// Sum of `c_j T_j(x)` and its first three derivatives in `x`.
pub(crate) fn chebyshev(coeffs: &[f64], x: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    // (T, T', T'', T''') for j−1 and j.
    let mut prev = [1.0, 0.0, 0.0, 0.0];
    let mut cur = [x, 1.0, 0.0, 0.0];
    for (j, &c) in coeffs.iter().enumerate() {
        let tj = match j {
            0 => prev,
            1 => cur,
            _ => {
                let next = [
                    2.0 * x * cur[0] - prev[0],
                    2.0 * cur[0] + 2.0 * x * cur[1] - prev[1],
                    4.0 * cur[1] + 2.0 * x * cur[2] - prev[2],
                    6.0 * cur[2] + 2.0 * x * cur[3] - prev[3],
                ];
                prev = cur;
                cur = next;
                next
            }
        };
        for k in 0..4 {
            out[k] += c * tj[k];
        }
    }
    out
}

fn half_jet(m: f64, coeffs: &[f64], p: u32, t: f64) -> [f64; 4] {
    let d = t - CORNER;
    let xs = 2.0 * SQRT_2;
    let s = chebyshev(coeffs, xs * t - 1.0);
    // Derivatives of S(x(t)) in t.
    let st = [s[0], s[1] * xs, s[2] * xs * xs, s[3] * xs * xs * xs];
    // Derivatives of d^p.
    let mut dp = [0.0; 4];
    let mut falling = 1.0;
    for (i, v) in dp.iter_mut().enumerate() {
        let e = p as i32 - i as i32;
        *v = if e >= 0 { falling * d.powi(e) } else { 0.0 };
        falling *= (p as i32 - i as i32) as f64;
    }
    const BINOM: [[f64; 4]; 4] = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ];
    let mut out = [0.0; 4];
    for n in 0..4 {
        for i in 0..=n {
            out[n] += BINOM[n][i] * dp[i] * st[n - i];
        }
    }
    out[0] += CORNER + m * d;
    out[1] += m;
    out
}
