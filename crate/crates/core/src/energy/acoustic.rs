use alloc::vec::Vec;

use super::{CommonTangent, MaterialParams};
use crate::error::{invalid, Result};
use crate::matrix::SquareMatrix;
use crate::tolerance::tolerances;

/// Which dilatational potential enters the acoustic tensor.
#[derive(Debug, Clone, Copy)]
pub enum Envelope<'a> {
    /// The potential `f` itself.
    Raw,
    /// `F = Φ** − ((d−1)/d) μ θ²`, the dilatational part of `QW0`.
    Relaxed(&'a CommonTangent),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticTensor {
    pub matrix: SquareMatrix,
    /// `θ` sits on a derivative discontinuity; `F''` was taken one-sided
    /// (from the admissible side for the relaxed envelope).
    pub one_sided: bool,
}

/// `A(n) = (F''(θ) + ((d−2)/d) μ) n⊗n + μ I`.
pub fn acoustic_tensor(
    theta: f64,
    n: &[f64],
    params: &MaterialParams,
    envelope: Envelope<'_>,
) -> Result<AcousticTensor> {
    let d = params.d();
    if n.len() != d {
        return Err(invalid("normal has wrong dimension"));
    }
    if (crate::matrix::norm(n) - 1.0).abs() > 1e-12 {
        return Err(invalid("normal must be a unit vector"));
    }
    let df = d as f64;
    let mu = params.mu();
    let raw = params.f(theta)?;
    let (fpp, one_sided) = match envelope {
        Envelope::Raw => (raw.curvature, raw.kink),
        Envelope::Relaxed(tangent) => match tangent.binodal() {
            Some(t) => {
                let tol = tolerances().algebraic * (1.0 + theta.abs());
                let at_edge = (theta - t.theta1).abs() <= tol || (theta - t.theta2).abs() <= tol;
                if t.contains(theta) && !at_edge {
                    (-2.0 * params.shift(), false)
                } else {
                    (raw.curvature, at_edge || raw.kink)
                }
            }
            None => (raw.curvature, raw.kink),
        },
    };
    let coef = fpp + (df - 2.0) / df * mu;
    let matrix = SquareMatrix::outer(n, n) * coef + SquareMatrix::scaled_identity(d, mu);
    Ok(AcousticTensor { matrix, one_sided })
}

/// Envelope rebuilt from the degeneracy `F'' = −2(d−1)μ/d` on the binodal.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredEnvelope {
    pub thetas: Vec<f64>,
    /// Dilatational potential `F`, equal to `f` off the binodal.
    pub potential: Vec<f64>,
    /// `F + ((d−1)/d) μ θ²`.
    pub envelope: Vec<f64>,
    /// `|F'(θ2⁻) − f'(θ2)|` after integrating from `θ1`.
    pub slope_mismatch: f64,
    /// `Φ` is convex: nothing was modified.
    pub no_binodal: bool,
}

/// Integrate `F'' = −2(d−1)μ/d` across `(θ1, θ2)` starting from
/// `F(θ1) = f(θ1)`, `F'(θ1) = f'(θ1)`.
pub fn recover_envelope_from_degeneracy(
    params: &MaterialParams,
    tangent: &CommonTangent,
    theta_grid: &[f64],
) -> Result<RecoveredEnvelope> {
    let c = params.shift();
    let mut potential = Vec::with_capacity(theta_grid.len());
    let mut envelope = Vec::with_capacity(theta_grid.len());
    let (slope_mismatch, no_binodal) = match tangent.binodal() {
        Some(t) => {
            let j1 = params.f(t.theta1)?;
            let j2 = params.f(t.theta2)?;
            let w = t.width();
            (((j1.slope - 2.0 * c * w) - j2.slope).abs(), false)
        }
        None => (0.0, true),
    };
    for &theta in theta_grid {
        let big_f = match tangent.binodal() {
            Some(t) if t.contains(theta) => {
                let j1 = params.f(t.theta1)?;
                let s = theta - t.theta1;
                j1.value + j1.slope * s - c * s * s
            }
            _ => params.f(theta)?.value,
        };
        potential.push(big_f);
        envelope.push(big_f + c * theta * theta);
    }
    Ok(RecoveredEnvelope {
        thetas: theta_grid.to_vec(),
        potential,
        envelope,
        slope_mismatch,
        no_binodal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{common_tangent, eval_phi_cvx};

    #[test]
    fn relaxed_tensor_degenerates_inside() {
        let p = MaterialParams::bi_quadratic(3, 1.0, 1.0, 1.0, 0.1).unwrap();
        let t = common_tangent(&p).unwrap();
        let n = [0.48, 0.6, 0.64];
        let a = acoustic_tensor(0.5, &n, &p, Envelope::Relaxed(&t)).unwrap();
        assert!(a.matrix.det().abs() < 1e-14);
        let b = acoustic_tensor(1.2, &n, &p, Envelope::Relaxed(&t)).unwrap();
        // μ^{d−1} (2κ0 + 2(d−1)μ/d)
        assert!((b.matrix.det() - (2.0 + 4.0 / 3.0)).abs() < 1e-12);
        let e = acoustic_tensor(0.25, &n, &p, Envelope::Relaxed(&t)).unwrap();
        assert!(e.one_sided);
    }

    #[test]
    fn recovery_matches_envelope() {
        let p = MaterialParams::bi_quadratic(2, 1.0, 1.0, 1.0, 0.1).unwrap();
        let t = common_tangent(&p).unwrap();
        let grid: Vec<f64> = (0..200).map(|i| -0.5 + 0.01 * i as f64).collect();
        let r = recover_envelope_from_degeneracy(&p, &t, &grid).unwrap();
        for (x, v) in grid.iter().zip(&r.envelope) {
            assert!((v - eval_phi_cvx(*x, &t, &p).unwrap()).abs() < 1e-12);
        }
        assert!(r.slope_mismatch < 1e-12);
    }
}
