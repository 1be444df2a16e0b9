//! Material model: the double-well potential, its shifted form `Φ`, the
//! common tangent, the relaxed energy `QW0`, jump pairs, the Weierstrass
//! rank-one test and the acoustic tensor.

mod acoustic;
mod potential;
mod rank_one;
mod tangent;

pub use acoustic::{
    acoustic_tensor, recover_envelope_from_degeneracy, AcousticTensor, Envelope, RecoveredEnvelope,
};
pub use potential::{BiQuadratic, Jet, Potential, Tabulated};
pub use rank_one::{
    jump_conditions, jump_pair, weierstrass_test, weierstrass_worst, JumpResiduals,
    WeierstrassProbe,
};
pub use tangent::{
    analytic_common_tangent, common_tangent, numeric_common_tangent, CommonTangent,
    ConvexTangentData,
};

use crate::error::{invalid, Error, Result};
use crate::matrix::{SquareMatrix, MAX_DIM};

/// Dimension, shear modulus and dilatational potential.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    d: usize,
    mu: f64,
    potential: Potential,
}

impl MaterialParams {
    pub fn new(d: usize, mu: f64, potential: Potential) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(invalid(alloc::format!(
                "dimension must be in 2..={MAX_DIM}, got {d}"
            )));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("shear modulus must be positive"));
        }
        Ok(MaterialParams { d, mu, potential })
    }

    pub fn bi_quadratic(d: usize, mu: f64, kappa0: f64, theta_p: f64, f0: f64) -> Result<Self> {
        let b = BiQuadratic::new(kappa0, theta_p, f0)?;
        Self::new(d, mu, Potential::BiQuadratic(b))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn bi_quadratic_potential(&self) -> Option<&BiQuadratic> {
        match &self.potential {
            Potential::BiQuadratic(b) => Some(b),
            Potential::Tabulated(_) => None,
        }
    }

    /// `(d − 1) μ / d`, the coefficient of the quadratic shift `Φ = f + cθ²`.
    pub fn shift(&self) -> f64 {
        (self.d as f64 - 1.0) * self.mu / self.d as f64
    }

    pub fn f(&self, theta: f64) -> Result<Jet> {
        self.potential.jet(theta)
    }

    pub fn phi(&self, theta: f64) -> Result<Jet> {
        let c = self.shift();
        self.potential.jet(theta).map(|j| Jet {
            value: j.value + c * theta * theta,
            slope: j.slope + 2.0 * c * theta,
            curvature: j.curvature + 2.0 * c,
            kink: j.kink,
        })
    }

    fn check_dim(&self, h: &SquareMatrix) -> Result<()> {
        if h.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: h.dim(),
            });
        }
        Ok(())
    }
}

pub fn eval_f(theta: f64, params: &MaterialParams) -> Result<f64> {
    params.f(theta).map(|j| j.value)
}

pub fn eval_phi(theta: f64, params: &MaterialParams) -> Result<f64> {
    params.phi(theta).map(|j| j.value)
}

/// Convex envelope `Φ**`: the tangent line on the open binodal, `Φ` elsewhere.
pub fn eval_phi_cvx(theta: f64, tangent: &CommonTangent, params: &MaterialParams) -> Result<f64> {
    match tangent {
        CommonTangent::Binodal(t) if t.contains(theta) => Ok(t.line(theta)),
        _ => eval_phi(theta, params),
    }
}

/// Slope of `Φ**`.
pub fn phi_cvx_slope(theta: f64, tangent: &CommonTangent, params: &MaterialParams) -> Result<f64> {
    match tangent {
        CommonTangent::Binodal(t) if t.contains(theta) => Ok(t.p0),
        _ => params.phi(theta).map(|j| j.slope),
    }
}

/// `W0(H) = f(Tr ε) + μ |dev ε|²`.
pub fn eval_w0(h: &SquareMatrix, params: &MaterialParams) -> Result<f64> {
    params.check_dim(h)?;
    let eps = h.sym();
    Ok(params.f(eps.trace())?.value + params.mu * eps.deviator().norm_sq())
}

/// Sum of the 2×2 principal minors, `((Tr H)² − Tr H²)/2`.
pub fn eval_j2(h: &SquareMatrix) -> f64 {
    let d = h.dim();
    let tr = h.trace();
    let mut tr_sq = 0.0;
    for i in 0..d {
        for j in 0..d {
            tr_sq += h.get(i, j) * h.get(j, i);
        }
    }
    0.5 * (tr * tr - tr_sq)
}

/// `QW0(H) = Φ**(Tr H) + (μ/4)|H − Hᵗ|² − 2μ J2(H)`.
pub fn eval_qw0(h: &SquareMatrix, params: &MaterialParams, tangent: &CommonTangent) -> Result<f64> {
    params.check_dim(h)?;
    let skew = *h - h.transpose();
    Ok(
        eval_phi_cvx(h.trace(), tangent, params)? + 0.25 * params.mu * skew.norm_sq()
            - 2.0 * params.mu * eval_j2(h),
    )
}

/// `|dev ε|² − [((d−1)/d)(Tr H)² + ¼|H − Hᵗ|² − 2 J2(H)]`, identically zero.
pub fn translation_identity_residual(h: &SquareMatrix) -> f64 {
    let d = h.dim() as f64;
    let tr = h.trace();
    let skew = *h - h.transpose();
    let lhs = h.sym().deviator().norm_sq();
    let rhs = (d - 1.0) / d * tr * tr + 0.25 * skew.norm_sq() - 2.0 * eval_j2(h);
    (lhs - rhs).abs()
}

/// `θ1 < Tr H < θ2`: the gradient is locally unstable.
pub fn in_binodal(h: &SquareMatrix, tangent: &CommonTangent) -> bool {
    tangent.contains(h.trace())
}

/// Piola stress `P = ∂W0/∂H = f'(Tr ε) I + 2μ dev ε`.
///
/// At the parabola crossover of the bi-quadratic potential the branch of
/// lower energy is used, ties going to the low-θ branch.
pub fn w0_gradient(h: &SquareMatrix, params: &MaterialParams) -> Result<SquareMatrix> {
    params.check_dim(h)?;
    let eps = h.sym();
    let fp = params.f(eps.trace())?.slope;
    Ok(SquareMatrix::scaled_identity(params.d, fp) + eps.deviator() * (2.0 * params.mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(d: usize) -> MaterialParams {
        MaterialParams::bi_quadratic(d, 1.0, 1.0, 1.0, 0.1).unwrap()
    }

    #[test]
    fn pointwise_values() {
        let p = reference(3);
        assert_eq!(eval_f(0.0, &p).unwrap(), 0.0);
        assert!((eval_f(0.5, &p).unwrap() - 0.25).abs() < 1e-15);
        assert!((eval_phi(1.0, &p).unwrap() - (0.1 + 2.0 / 3.0)).abs() < 1e-15);
        assert!((eval_phi(0.5, &reference(2)).unwrap() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn envelope_inside_binodal() {
        let p = reference(3);
        let t = common_tangent(&p).unwrap();
        let b = t.binodal().unwrap();
        let mid = 0.5 * (b.theta1 + b.theta2);
        let v = eval_phi_cvx(mid, &t, &p).unwrap();
        assert!((v - 0.5 * (b.line(b.theta1) + b.line(b.theta2))).abs() < 1e-15);
        assert!(eval_phi_cvx(0.55, &t, &p).unwrap() < eval_phi(0.55, &p).unwrap());
        assert!(
            (eval_phi_cvx(b.theta1, &t, &p).unwrap() - eval_phi(b.theta1, &p).unwrap()).abs()
                < 1e-15
        );
    }

    #[test]
    fn w0_examples() {
        let p = reference(3);
        let h = SquareMatrix::scaled_identity(3, 1.0 / 3.0);
        assert!((eval_w0(&h, &p).unwrap() - 0.1).abs() < 1e-14);
        assert_eq!(eval_w0(&SquareMatrix::zeros(3), &p).unwrap(), 0.0);
        assert!(matches!(
            eval_w0(&SquareMatrix::zeros(2), &p),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(eval_j2(&SquareMatrix::identity(3)), 3.0);
    }

    #[test]
    fn qw0_gap_inside() {
        let p = reference(3);
        let t = common_tangent(&p).unwrap();
        let h = SquareMatrix::scaled_identity(3, 1.1 / 6.0);
        assert!(eval_qw0(&h, &p, &t).unwrap() < eval_w0(&h, &p).unwrap());
    }
}
