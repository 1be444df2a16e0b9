use alloc::collections::VecDeque;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::stationarity::stationarity_residuals;
use super::trace::{clapeyron_energy, BoundaryTrace};
use crate::energy::{eval_qw0, CommonTangent, MaterialParams};
use crate::error::{Error, Result};
use crate::fields::{total_energy, GridDomain, VectorField};
use crate::matrix::SquareMatrix;

/// The sufficient conditions for global minimality checked on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hypothesis {
    /// (i) `u` is Lipschitz.
    Lipschitz,
    /// (ii) Euler–Lagrange and Noether equations.
    Stationarity,
    /// (iii) `∇u` stays off the open binodal.
    LocalStability,
    /// (iv) `u = H0 x` on `∂Ω`.
    BoundaryAffine,
    /// (v) `u` is C¹ in a collar of `∂Ω`.
    CollarSmoothness,
    /// Boundary and volume energies agree.
    Clapeyron,
    /// `E[u] ≤ |Ω| QW0(H0)`.
    EnvelopeGap,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::Lipschitz => "lipschitz",
            Hypothesis::Stationarity => "stationarity",
            Hypothesis::LocalStability => "local_stability",
            Hypothesis::BoundaryAffine => "boundary_affine",
            Hypothesis::CollarSmoothness => "collar_smoothness",
            Hypothesis::Clapeyron => "clapeyron",
            Hypothesis::EnvelopeGap => "envelope_gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Certified,
    NotCertified(Vec<Hypothesis>),
    /// The domain is not star-shaped about the origin.
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    /// Relative tolerance for residuals, gaps and the stability measure.
    pub tolerance: f64,
    /// Bound on `max |∇u|`.
    pub lipschitz_max: f64,
    /// Collar oscillation threshold as a fraction of `|H0| + (θ2 − θ1)`.
    pub collar_threshold: f64,
    /// Collar width in cells.
    pub collar_cells: usize,
    /// Neighbouring divergences differing by more than this fraction of
    /// `θ2 − θ1` mark an interface cell, excluded from the stability measure.
    pub interface_jump: f64,
    /// Margin `δ` of the stability test as a fraction of `θ2 − θ1`.
    pub margin_fraction: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            tolerance: 0.02,
            lipschitz_max: 1e3,
            collar_threshold: 0.05,
            collar_cells: 3,
            interface_jump: 0.25,
            margin_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub lipschitz_estimate: f64,
    pub el_residual: f64,
    pub noether_residual: f64,
    /// `|{x : ∇·u ∈ (θ1 + δ, θ2 − δ)}|` away from interface cells.
    pub local_stability_violation: f64,
    /// `sup |u − H0 x|` over `∂Ω`.
    pub boundary_affine_defect: f64,
    /// Largest jump of `∇u` between neighbouring collar cells.
    pub collar_oscillation: f64,
    /// `min n·x` over the boundary cells.
    pub star_shape_min: f64,
    pub volume_energy: f64,
    pub boundary_energy: f64,
    pub clapeyron_gap: f64,
    /// `E[u] − |Ω| QW0(H0)`.
    pub qw_gap: f64,
    pub measure: f64,
    pub failed: Vec<Hypothesis>,
    pub verdict: Verdict,
}

impl CertificateReport {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn relative_clapeyron_gap(&self) -> f64 {
        self.clapeyron_gap / self.volume_energy.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn theorem3_certificate(
    u: &VectorField,
    h0: &SquareMatrix,
    params: &MaterialParams,
    tangent: &CommonTangent,
) -> Result<CertificateReport> {
    theorem3_certificate_with(u, h0, params, tangent, &CertificateOptions::default())
}

/// Depth of every cell of `Ω` counted in face steps from outside; boundary
/// cells have depth 1.
fn depths(grid: &GridDomain) -> Vec<u32> {
    let mut depth = alloc::vec![0u32; grid.len()];
    let mut queue = VecDeque::new();
    for b in grid.boundary_cells() {
        depth[b.index] = 1;
        queue.push_back(b.index);
    }
    while let Some(i) = queue.pop_front() {
        for a in 0..grid.dim() {
            for dir in [-1, 1] {
                if let Some(j) = grid.neighbor(i, a, dir) {
                    if grid.contains(j) && depth[j] == 0 {
                        depth[j] = depth[i] + 1;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    depth
}

pub fn theorem3_certificate_with(
    u: &VectorField,
    h0: &SquareMatrix,
    params: &MaterialParams,
    tangent: &CommonTangent,
    options: &CertificateOptions,
) -> Result<CertificateReport> {
    let grid = u.grid();
    let d = grid.dim();
    if h0.dim() != d || params.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if h0.dim() != d { h0.dim() } else { params.d() },
        });
    }
    let cells = grid.inside();
    let measure = grid.measure();
    let tol = options.tolerance;
    let width = tangent.binodal().map_or(0.0, |b| b.width());
    let grad_scale = h0.norm() + width;

    let lipschitz_estimate = cells
        .iter()
        .map(|&i| u.gradient(i).norm())
        .fold(0.0, f64::max);

    let stat = stationarity_residuals(u, params)?;

    let mut violation = 0usize;
    if let Some(b) = tangent.binodal() {
        let delta = options.margin_fraction * width;
        let jump = options.interface_jump * width;
        for &i in cells {
            let t = u.gradient(i).trace();
            if !(t > b.theta1 + delta && t < b.theta2 - delta) {
                continue;
            }
            let interface = (0..d).any(|a| {
                [-1, 1].iter().any(|&dir| {
                    grid.neighbor(i, a, dir).is_some_and(|j| {
                        grid.contains(j) && (u.gradient(j).trace() - t).abs() > jump
                    })
                })
            });
            if !interface {
                violation += 1;
            }
        }
    }
    let local_stability_violation = violation as f64 * grid.cell_volume();

    let trace = BoundaryTrace::extract(u, params)?;
    let boundary_affine_defect = trace
        .samples
        .iter()
        .map(|s| {
            let hx = h0.mul_vec(&s.x[..d]);
            (0..d).map(|a| (s.y[a] - hx[a]).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);

    let depth = depths(grid);
    let collar = options.collar_cells as u32;
    let mut collar_oscillation: f64 = 0.0;
    for &i in cells {
        if depth[i] == 0 || depth[i] > collar {
            continue;
        }
        for a in 0..d {
            if let Some(j) = grid.neighbor(i, a, 1) {
                if grid.contains(j) && depth[j] > 0 && depth[j] <= collar {
                    collar_oscillation =
                        collar_oscillation.max((*u.gradient(j) - *u.gradient(i)).norm());
                }
            }
        }
    }

    let star_shape_min = grid
        .boundary_cells()
        .iter()
        .map(|b| {
            let x = grid.center(b.index);
            (0..d).map(|a| b.normal[a] * x[a]).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);

    let volume_energy = total_energy(u, params)?;
    let boundary_energy = clapeyron_energy(&trace, d);
    let clapeyron_gap = (volume_energy - boundary_energy).abs();
    let envelope = measure * eval_qw0(h0, params, tangent)?;
    let qw_gap = volume_energy - envelope;

    let energy_scale = volume_energy
        .abs()
        .max(envelope.abs())
        .max(f64::MIN_POSITIVE);
    let length = grid.radius();
    let mut failed = Vec::new();
    if !(lipschitz_estimate <= options.lipschitz_max) {
        failed.push(Hypothesis::Lipschitz);
    }
    if !(stat.el_residual <= tol && stat.noether_residual <= tol) {
        failed.push(Hypothesis::Stationarity);
    }
    if !(local_stability_violation <= tol * measure) {
        failed.push(Hypothesis::LocalStability);
    }
    if !(boundary_affine_defect <= tol * grad_scale.max(f64::MIN_POSITIVE) * length) {
        failed.push(Hypothesis::BoundaryAffine);
    }
    if !(collar_oscillation <= options.collar_threshold * grad_scale) {
        failed.push(Hypothesis::CollarSmoothness);
    }
    if !(clapeyron_gap <= tol * energy_scale) {
        failed.push(Hypothesis::Clapeyron);
    }
    if !(qw_gap <= tol * energy_scale) {
        failed.push(Hypothesis::EnvelopeGap);
    }
    // Staircase steps put n·x slightly below zero only at the grid scale.
    let star_tolerance = -grid.spacing() * 1e-9;
    let verdict = if star_shape_min < star_tolerance {
        Verdict::Inapplicable
    } else if failed.is_empty() {
        Verdict::Certified
    } else {
        Verdict::NotCertified(failed.clone())
    };
    Ok(CertificateReport {
        lipschitz_estimate,
        el_residual: stat.el_residual,
        noether_residual: stat.noether_residual,
        local_stability_violation,
        boundary_affine_defect,
        collar_oscillation,
        star_shape_min,
        volume_energy,
        boundary_energy,
        clapeyron_gap,
        qw_gap,
        measure,
        failed,
        verdict,
    })
}
