//! The complex moment system for a square-symmetric inclusion in a square.
//!
//! The square has half side `τ = 1/√2`, so its corners lie on the unit
//! circle. A central region `A` of area fraction `ω` is bounded by four
//! rotated copies of a curve `Γ: z(t) = a(t) + i t`, `t ∈ [−τ, τ]`, that
//! joins the two corners of the right side. A holomorphic `H₋` in `A` with
//! the boundary values forced by the affine data exists iff
//!
//! ```text
//! Re ∫₀^τ (a(t) + i t)^{4k+1} dt = (−1)^k (ω+1) / (4(2k+1)),   k ≥ 0.
//! ```
//!
//! The module evaluates these equations, fits truncated versions by least
//! squares and measures how far the best fits stay from solving them: the
//! residual floor, the corner slope and the growth of the generating
//! function residual. None of this is a proof of non-existence; it is
//! numerical evidence.
//!
//! Boundary nucleation (phase 1 in the four lenses along the sides, the
//! central region in phase 2) leads to the same system with `ω` replaced by
//! `1 − ω`: flipping the phase indicator maps `Δh = J(χ − ω)` to
//! `Δ(−h) = J(χ' − (1 − ω))` and keeps `h = ∂h/∂n = 0` on the boundary.
//! [`Morphology::effective_omega`] applies that swap.

mod corner;
mod curve;
mod generating;
mod moments;
mod solve;

pub use corner::{corner_flatness, CornerReport};
pub use curve::{CurveParam, CORNER};
pub use generating::{generating_residual, log_growth_fit, GeneratingValue, GrowthFit};
pub use moments::{
    contour_moment, moment_integral, moment_residual, moment_residual_by_parts, moment_system,
    moment_target, outline, MomentSystem,
};
pub use solve::{
    solve_truncated, solve_truncated_with, SolveOptions, StartOutcome, TruncatedFit, Weighting,
};

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::error::{invalid, Result};

/// Corner slope `m = √((1−ω)/(1+ω))` for which the corner line solves the
/// moment equations up to exponentially small terms at large `k`.
pub fn slope_m(omega: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(invalid(alloc::format!("ω = {omega} must lie in [0, 1]")));
    }
    Ok(((1.0 - omega) / (1.0 + omega)).sqrt())
}

/// Where phase 1 nucleates in the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Morphology {
    /// Phase 1 fills the central region.
    Center,
    /// Phase 1 fills the four regions between `∂A` and the sides.
    Boundary,
}

impl Morphology {
    /// Area fraction of the central region for phase-1 fraction `omega`.
    pub fn effective_omega(self, omega: f64) -> f64 {
        match self {
            Morphology::Center => omega,
            Morphology::Boundary => 1.0 - omega,
        }
    }
}
