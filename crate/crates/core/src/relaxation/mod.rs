//! Laminate minimizing sequences and the lower bound for periodic trial
//! fields.

mod trial;

pub use trial::{SmoothedLaminate, TrialField, TrigMode, TrigonometricField};

use crate::energy::{eval_qw0, eval_w0, CommonTangent, MaterialParams};
use crate::error::{invalid, precondition, Result};
use crate::matrix::{normalized, SquareMatrix, MAX_DIM};
use crate::quadrature::CompensatedSum;

/// Simple laminate: gradient `H0 + M1` on a slab of volume fraction `ω`,
/// `H0 + M2` on the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaminateMicrostructure {
    pub normal: [f64; MAX_DIM],
    pub omega: f64,
    pub m1: SquareMatrix,
    pub m2: SquareMatrix,
    pub theta1: f64,
    pub theta2: f64,
}

impl LaminateMicrostructure {
    /// The unmodulated field `φ = 0` for a host gradient of trace `theta`.
    pub fn trivial(d: usize, theta: f64) -> Self {
        let mut normal = [0.0; MAX_DIM];
        normal[0] = 1.0;
        LaminateMicrostructure {
            normal,
            omega: 1.0,
            m1: SquareMatrix::zeros(d),
            m2: SquareMatrix::zeros(d),
            theta1: theta,
            theta2: theta,
        }
    }

    pub fn dim(&self) -> usize {
        self.m1.dim()
    }

    /// `|ω M1 + (1−ω) M2|`, zero for a periodic correction.
    pub fn mean_defect(&self) -> f64 {
        (self.m1 * self.omega + self.m2 * (1.0 - self.omega)).norm()
    }

    /// `|M1 − M2 − (θ1 − θ2) n⊗n|`.
    pub fn compatibility_defect(&self) -> f64 {
        let d = self.dim();
        let n = &self.normal[..d];
        (self.m1 - self.m2 - SquareMatrix::outer(n, n) * (self.theta1 - self.theta2)).norm()
    }
}

/// Phase-1 volume fraction `ω = (Tr H0 − θ2)/(θ1 − θ2)`.
///
/// The closed binodal `[θ1, θ2]` is accepted; the end points give the
/// degenerate single-phase laminates `ω = 1` and `ω = 0`.
pub fn lever_rule(trace_h0: f64, tangent: &CommonTangent) -> Result<f64> {
    let t = tangent.require()?;
    if !(trace_h0 >= t.theta1 && trace_h0 <= t.theta2) {
        return Err(precondition(alloc::format!(
            "Tr H0 = {trace_h0} outside the binodal [{}, {}]: no laminate needed",
            t.theta1,
            t.theta2
        )));
    }
    Ok(((trace_h0 - t.theta2) / (t.theta1 - t.theta2)).clamp(0.0, 1.0))
}

pub fn build_laminate(
    h0: &SquareMatrix,
    tangent: &CommonTangent,
    normal: &[f64],
) -> Result<LaminateMicrostructure> {
    let d = h0.dim();
    if normal.len() != d {
        return Err(invalid("normal has wrong dimension"));
    }
    if (crate::matrix::norm(normal) - 1.0).abs() > 1e-12 {
        return Err(precondition("normal must be a unit vector"));
    }
    let n = normalized(normal).unwrap();
    let t = tangent.require()?;
    let omega = lever_rule(h0.trace(), tangent)?;
    let jump = t.theta1 - t.theta2;
    let nn = SquareMatrix::outer(&n[..d], &n[..d]);
    Ok(LaminateMicrostructure {
        normal: n,
        omega,
        m1: nn * ((1.0 - omega) * jump),
        m2: nn * (-omega * jump),
        theta1: t.theta1,
        theta2: t.theta2,
    })
}

/// Cell average of `W0(H0 + ∇φ)` for the laminate, integrated over
/// `n_cells` equal bins across one period with exact slab overlaps.
pub fn periodic_energy(
    laminate: &LaminateMicrostructure,
    h0: &SquareMatrix,
    params: &MaterialParams,
    n_cells: usize,
) -> Result<f64> {
    if n_cells == 0 {
        return Err(invalid("n_cells must be positive"));
    }
    let w1 = eval_w0(&(*h0 + laminate.m1), params)?;
    let w2 = eval_w0(&(*h0 + laminate.m2), params)?;
    let omega = laminate.omega;
    let mut acc = CompensatedSum::new();
    let n = n_cells as f64;
    for k in 0..n_cells {
        let (lo, hi) = (k as f64 / n, (k + 1) as f64 / n);
        let in1 = (hi.min(omega) - lo.min(omega)).max(0.0);
        let in2 = (hi - lo) - in1;
        if in1 > 0.0 {
            acc.add(in1 * w1);
        }
        if in2 > 0.0 {
            acc.add(in2 * w2);
        }
    }
    Ok(acc.value())
}

/// Outcome of the lower-bound check for one trial field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundReport {
    /// Cell average of `W0(H0 + ∇φ)` at the finest resolution used.
    pub average: f64,
    /// `QW0(H0)`.
    pub bound: f64,
    /// Points per side of the final midpoint grid.
    pub resolution: usize,
    /// Change of the average under the last doubling.
    pub last_change: f64,
    /// The last change was below the convergence tolerance.
    pub converged: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundOptions {
    /// Doubling stops once the average moves by less than this.
    pub tolerance: f64,
    /// Budget on grid points of the finest midpoint rule.
    pub max_points: usize,
    /// Stop early once the margin `average − bound` exceeds this multiple of
    /// the last change, so further refinement cannot flip the outcome.
    pub settle_factor: Option<f64>,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        LowerBoundOptions {
            tolerance: 1e-9,
            max_points: 1 << 22,
            settle_factor: Some(8.0),
        }
    }
}

/// Cell average of `W0(H0 + ∇φ)` by the tensor midpoint rule, doubling the
/// resolution from `n_grid` until it changes by less than `1e-9`, compared
/// against `QW0(H0)`.
pub fn lower_bound_check(
    h0: &SquareMatrix,
    params: &MaterialParams,
    trial: &TrialField,
    n_grid: usize,
) -> Result<LowerBoundReport> {
    lower_bound_check_with(h0, params, trial, n_grid, &LowerBoundOptions::default())
}

pub fn lower_bound_check_with(
    h0: &SquareMatrix,
    params: &MaterialParams,
    trial: &TrialField,
    n_grid: usize,
    options: &LowerBoundOptions,
) -> Result<LowerBoundReport> {
    let d = params.d();
    if h0.dim() != d || trial.dim() != d {
        return Err(crate::Error::DimensionMismatch {
            expected: d,
            found: if h0.dim() != d { h0.dim() } else { trial.dim() },
        });
    }
    let tangent = crate::energy::common_tangent(params)?;
    let bound = eval_qw0(h0, params, &tangent)?;
    let tol = options.tolerance;
    let mut n = n_grid.max(trial.min_resolution());
    let mut average = midpoint_average(h0, params, trial, n)?;
    let mut last_change = f64::INFINITY;
    loop {
        let next_n = 2 * n;
        if next_n.pow(d as u32) > options.max_points {
            break;
        }
        let next = midpoint_average(h0, params, trial, next_n)?;
        last_change = (next - average).abs();
        average = next;
        n = next_n;
        if last_change < tol {
            break;
        }
        if let Some(k) = options.settle_factor {
            if average - bound - tol > k * last_change {
                break;
            }
        }
    }
    Ok(LowerBoundReport {
        average,
        bound,
        resolution: n,
        last_change,
        converged: last_change < tol,
        holds: average >= bound - tol,
    })
}

fn midpoint_average(
    h0: &SquareMatrix,
    params: &MaterialParams,
    trial: &TrialField,
    n: usize,
) -> Result<f64> {
    let d = params.d();
    let total = n.pow(d as u32);
    let mut acc = CompensatedSum::new();
    let mut x = [0.0; MAX_DIM];
    for idx in 0..total {
        let mut rem = idx;
        for xi in x.iter_mut().take(d) {
            *xi = ((rem % n) as f64 + 0.5) / n as f64;
            rem /= n;
        }
        let g = trial.gradient(&x[..d]);
        acc.add(eval_w0(&(*h0 + g), params)?);
    }
    Ok(acc.value() / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::common_tangent;

    fn reference() -> (MaterialParams, CommonTangent) {
        let p = MaterialParams::bi_quadratic(3, 1.0, 1.0, 1.0, 0.1).unwrap();
        let t = common_tangent(&p).unwrap();
        (p, t)
    }

    #[test]
    fn lever_rule_examples() {
        let (_, t) = reference();
        assert!((lever_rule(0.55, &t).unwrap() - 0.5).abs() < 1e-15);
        assert!((lever_rule(0.79, &t).unwrap() - 0.1).abs() < 1e-14);
        assert_eq!(lever_rule(0.25, &t).unwrap(), 1.0);
        assert!(lever_rule(0.9, &t).is_err());
    }

    #[test]
    fn laminate_attains_envelope() {
        let (p, t) = reference();
        let h0 = SquareMatrix::scaled_identity(3, 1.1 / 6.0);
        let lam = build_laminate(&h0, &t, &[1.0, 0.0, 0.0]).unwrap();
        assert!(lam.mean_defect() < 1e-15);
        assert!(lam.compatibility_defect() < 1e-15);
        assert!(((h0 + lam.m1).trace() - 0.25).abs() < 1e-14);
        assert!((lam.m1 + lam.m2).norm() < 1e-15);
        let e = periodic_energy(&lam, &h0, &p, 7).unwrap();
        assert!((e - eval_qw0(&h0, &p, &t).unwrap()).abs() < 1e-12);

        let edge = SquareMatrix::scaled_identity(3, 0.25 / 3.0);
        let lam = build_laminate(&edge, &t, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(lam.omega, 1.0);
        assert!(lam.m1.norm() == 0.0);
    }

    #[test]
    fn trivial_field_gives_w0() {
        let (p, _) = reference();
        let h0 = SquareMatrix::scaled_identity(3, 0.5);
        let lam = LaminateMicrostructure::trivial(3, h0.trace());
        let e = periodic_energy(&lam, &h0, &p, 3).unwrap();
        assert!((e - eval_w0(&h0, &p).unwrap()).abs() < 1e-15);
    }
}
