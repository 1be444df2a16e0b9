#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::energy::CommonTangent;
use crate::error::{invalid, Result};

/// Value and first two radial derivatives of the radial potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Radial solution of `Δh = J (χ − ω)` on the unit ball with `h(1) = h'(1) = 0`
/// where `J = θ1 − θ2` and `χ` is the indicator of phase 1.
///
/// Phase 1 fills `r < ω^{1/d}` when `phase1_inside`; otherwise phase 2
/// fills the core `r < (1−ω)^{1/d}` and the profile is `−h_{1−ω}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    d: usize,
    omega: f64,
    jump: f64,
    phase1_inside: bool,
}

impl RadialProfile {
    pub fn new(d: usize, omega: f64, jump: f64, phase1_inside: bool) -> Result<Self> {
        if d < 2 {
            return Err(invalid("radial profile needs d >= 2"));
        }
        if !(omega > 0.0 && omega < 1.0) {
            return Err(invalid(alloc::format!("ω = {omega} must lie in (0, 1)")));
        }
        if !jump.is_finite() {
            return Err(invalid("phase jump must be finite"));
        }
        Ok(RadialProfile {
            d,
            omega,
            jump,
            phase1_inside,
        })
    }

    pub fn from_tangent(
        d: usize,
        omega: f64,
        tangent: &CommonTangent,
        phase1_inside: bool,
    ) -> Result<Self> {
        Self::new(d, omega, tangent.require()?.jump(), phase1_inside)
    }

    /// Radius of the core ball.
    pub fn core_radius(&self) -> f64 {
        let w = if self.phase1_inside {
            self.omega
        } else {
            1.0 - self.omega
        };
        w.powf(1.0 / self.d as f64)
    }

    pub fn phase1_inside(&self) -> bool {
        self.phase1_inside
    }

    /// `true` iff radius `r` lies in phase 1.
    pub fn is_phase1(&self, r: f64) -> bool {
        (r < self.core_radius()) == self.phase1_inside
    }

    pub fn jet(&self, r: f64) -> Result<RadialJet> {
        if !(r >= 0.0 && r <= 1.0) {
            return Err(invalid(alloc::format!("radius {r} outside [0, 1]")));
        }
        Ok(self.eval(r))
    }

    /// Jet of the outer branch continued past `r = 1`; used to fill ghost
    /// cells so that second differences stay smooth across `∂Ω`.
    pub fn continued_jet(&self, r: f64) -> Result<RadialJet> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid(alloc::format!(
                "radius {r} must be finite and non-negative"
            )));
        }
        Ok(self.eval(r))
    }

    fn eval(&self, r: f64) -> RadialJet {
        if self.phase1_inside {
            inner_core(self.d, self.omega, self.jump, r)
        } else {
            let j = inner_core(self.d, 1.0 - self.omega, self.jump, r);
            RadialJet {
                value: -j.value,
                slope: -j.slope,
                curvature: -j.curvature,
            }
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.jet(r).map(|j| j.value)
    }

    /// Gradient and Hessian of `x ↦ h(|x|)` at `x` (with `|x| ≤ 1`).
    pub fn derivatives(&self, x: &[f64]) -> Result<(f64, [f64; 4], [[f64; 4]; 4])> {
        let r = crate::matrix::norm(x);
        let j = self.jet(r)?;
        let mut grad = [0.0; 4];
        let mut hess = [[0.0; 4]; 4];
        let d = x.len();
        // h'(r)/r tends to h''(0) at the centre.
        let ratio = if r > 1e-12 { j.slope / r } else { j.curvature };
        for a in 0..d {
            grad[a] = ratio * x[a];
            for b in 0..d {
                let radial = if r > 1e-12 {
                    x[a] * x[b] / (r * r)
                } else {
                    0.0
                };
                let delta = if a == b { 1.0 } else { 0.0 };
                hess[a][b] = j.curvature * radial + ratio * (delta - radial);
            }
        }
        Ok((j.value, grad, hess))
    }
}

/// Profile with phase 1 in the core of radius `ω^{1/d}`.
fn inner_core(d: usize, omega: f64, jump: f64, r: f64) -> RadialJet {
    let df = d as f64;
    let r0 = omega.powf(1.0 / df);
    if d == 2 {
        if r <= r0 {
            RadialJet {
                value: 0.25 * jump * ((1.0 - omega) * r * r + omega * omega.ln()),
                slope: 0.5 * jump * (1.0 - omega) * r,
                curvature: 0.5 * jump * (1.0 - omega),
            }
        } else {
            let k = -0.25 * jump * omega;
            RadialJet {
                value: k * (r * r - 1.0 - 2.0 * r.ln()),
                slope: k * (2.0 * r - 2.0 / r),
                curvature: k * (2.0 + 2.0 / (r * r)),
            }
        }
    } else {
        let dm2 = df - 2.0;
        if r <= r0 {
            let k = jump / (2.0 * df);
            RadialJet {
                value: k * ((1.0 - omega) * r * r - df * (omega.powf(2.0 / df) - omega) / dm2),
                slope: 2.0 * k * (1.0 - omega) * r,
                curvature: 2.0 * k * (1.0 - omega),
            }
        } else {
            let k = -jump * omega / (2.0 * df);
            let rp = r.powf(-dm2);
            RadialJet {
                value: k * (r * r + 2.0 * rp / dm2 - df / dm2),
                slope: k * (2.0 * r - 2.0 * rp / r),
                curvature: k * (2.0 + 2.0 * (df - 1.0) * rp / (r * r)),
            }
        }
    }
}

/// `h(r)` for the concentric-ball solution.
pub fn radial_h(
    r: f64,
    omega: f64,
    tangent: &CommonTangent,
    d: usize,
    phase1_inside: bool,
) -> Result<f64> {
    RadialProfile::from_tangent(d, omega, tangent, phase1_inside)?.value(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values_and_laplacian() {
        for d in 2..=4 {
            for inside in [true, false] {
                let p = RadialProfile::new(d, 0.37, -0.6, inside).unwrap();
                let j = p.jet(1.0).unwrap();
                assert!(j.value.abs() < 1e-15 && j.slope.abs() < 1e-15);
                let r0 = p.core_radius();
                let a = p.jet(r0 * (1.0 - 1e-13)).unwrap();
                let b = p.jet(r0 * (1.0 + 1e-13)).unwrap();
                assert!((a.value - b.value).abs() < 1e-12);
                assert!((a.slope - b.slope).abs() < 1e-12);
                for r in [0.2, 0.5, 0.8, 0.95] {
                    let j = p.jet(r).unwrap();
                    let lap = j.curvature + (d as f64 - 1.0) * j.slope / r;
                    let chi = if p.is_phase1(r) { 1.0 } else { 0.0 };
                    assert!((lap - (-0.6) * (chi - 0.37)).abs() < 1e-12, "d={d} r={r}");
                }
            }
        }
        assert!(RadialProfile::new(3, 1.0, -0.6, true).is_err());
        assert!(RadialProfile::new(3, 0.5, -0.6, true)
            .unwrap()
            .jet(1.01)
            .is_err());
    }
}
