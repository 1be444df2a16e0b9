//! Stationarity, the Clapeyron identity and sufficient conditions for
//! global minimality of grid fields.
//!
//! Stresses are taken in displacement form: `H = ∇u`, `P = ∂W0/∂H` and the
//! Eshelby tensor `P* = W0 I − Hᵗ P`.

mod stationarity;
mod theorem3;
mod trace;

pub use stationarity::{
    stationarity_residuals, stationarity_residuals_with, StationarityOptions, StationarityResiduals,
};
pub use theorem3::{
    theorem3_certificate, theorem3_certificate_with, CertificateOptions, CertificateReport,
    Hypothesis, Verdict,
};
pub use trace::{clapeyron_energy, BoundaryTrace, TraceSample};

use crate::energy::{eval_j2, eval_w0, w0_gradient, MaterialParams};
use crate::error::Result;
use crate::fields::VectorField;
use crate::matrix::SquareMatrix;
use crate::quadrature::CompensatedSum;

/// `P = f'(Tr ε) I + 2μ dev ε`; at the kink of the bi-quadratic the
/// low-θ branch is used.
pub fn piola(h: &SquareMatrix, params: &MaterialParams) -> Result<SquareMatrix> {
    w0_gradient(h, params)
}

/// `P* = W0(H) I − Hᵗ P(H)`.
pub fn eshelby(h: &SquareMatrix, params: &MaterialParams) -> Result<SquareMatrix> {
    let w = eval_w0(h, params)?;
    let p = piola(h, params)?;
    Ok(SquareMatrix::scaled_identity(h.dim(), w) - h.transpose().matmul(&p))
}

/// `∫_Ω −2μ J2(∇u)` by the midpoint rule. For gradients taken as centred
/// differences of grid values it depends only on values near `∂Ω`.
pub fn null_lagrangian_energy(u: &VectorField, params: &MaterialParams) -> f64 {
    let grid = u.grid();
    let mut acc = CompensatedSum::new();
    for &i in grid.inside() {
        acc.add(eval_j2(u.gradient(i)));
    }
    -2.0 * params.mu() * acc.value() * grid.cell_volume()
}
