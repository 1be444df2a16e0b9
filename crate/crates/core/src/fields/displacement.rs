use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::grid::GridDomain;
use super::potential::ScalarField;
use crate::energy::{eval_w0, MaterialParams};
use crate::error::{invalid, Error, Result};
use crate::matrix::{SquareMatrix, MAX_DIM};
use crate::quadrature::CompensatedSum;

/// Displacement `u` with its gradient, one entry per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<GridDomain>,
    values: Vec<[f64; MAX_DIM]>,
    gradients: Vec<SquareMatrix>,
}

impl VectorField {
    pub fn new(
        grid: Arc<GridDomain>,
        values: Vec<[f64; MAX_DIM]>,
        gradients: Vec<SquareMatrix>,
    ) -> Result<Self> {
        let d = grid.dim();
        if values.len() != grid.len() || gradients.len() != grid.len() {
            return Err(invalid("field length does not match the grid"));
        }
        if let Some(g) = gradients.iter().find(|g| g.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: g.dim(),
            });
        }
        let finite = values.iter().all(|v| v[..d].iter().all(|x| x.is_finite()))
            && gradients.iter().all(|g| g.is_finite());
        if !finite {
            return Err(invalid("field values must be finite"));
        }
        Ok(VectorField {
            grid,
            values,
            gradients,
        })
    }

    /// Samples `f(x) = (u(x), ∇u(x))` at every cell centre.
    pub fn from_fn<F>(grid: Arc<GridDomain>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> ([f64; MAX_DIM], SquareMatrix),
    {
        let d = grid.dim();
        let (values, gradients) = (0..grid.len()).map(|i| f(&grid.center(i)[..d])).unzip();
        Self::new(grid, values, gradients)
    }

    /// Gradient from centred differences of the values, one-sided at the
    /// edge of the padded box.
    pub fn from_values(grid: Arc<GridDomain>, values: Vec<[f64; MAX_DIM]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("field length does not match the grid"));
        }
        let d = grid.dim();
        let s = grid.spacing();
        let gradients = (0..grid.len())
            .map(|i| {
                let mut g = SquareMatrix::zeros(d);
                for b in 0..d {
                    let (hi, hi_w) = grid.neighbor(i, b, 1).map_or((i, 0.0), |j| (j, 1.0));
                    let (lo, lo_w) = grid.neighbor(i, b, -1).map_or((i, 0.0), |j| (j, 1.0));
                    let step = (hi_w + lo_w) * s;
                    for a in 0..d {
                        g.set(a, b, (values[hi][a] - values[lo][a]) / step);
                    }
                }
                g
            })
            .collect();
        Self::new(grid, values, gradients)
    }

    /// `u = H0 x`.
    pub fn affine(grid: Arc<GridDomain>, h0: &SquareMatrix) -> Result<Self> {
        let h0 = *h0;
        Self::from_fn(grid, |x| (h0.mul_vec(x), h0))
    }

    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; MAX_DIM]] {
        &self.values
    }

    pub fn gradients(&self) -> &[SquareMatrix] {
        &self.gradients
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i][..self.grid.dim()]
    }

    pub fn gradient(&self, i: usize) -> &SquareMatrix {
        &self.gradients[i]
    }

    /// Adds `amplitude · ψ(|x − center| / radius)` where `ψ` is the standard
    /// C^∞ bump with `ψ(0) = 1`.
    pub fn with_bump(&self, center: &[f64], radius: f64, amplitude: &[f64]) -> Result<Self> {
        let d = self.grid.dim();
        if center.len() != d || amplitude.len() != d || !(radius > 0.0) {
            return Err(invalid("bump needs a d-dimensional centre and amplitude"));
        }
        let mut out = self.clone();
        for i in 0..self.grid.len() {
            let x = self.grid.center(i);
            let mut dx = [0.0; MAX_DIM];
            for a in 0..d {
                dx[a] = (x[a] - center[a]) / radius;
            }
            let t2: f64 = dx[..d].iter().map(|v| v * v).sum();
            if t2 >= 1.0 {
                continue;
            }
            let q = 1.0 - t2;
            let psi = (1.0 - 1.0 / q).exp();
            // ∇ψ = ψ · (−2 x̃ / q²) / radius
            let scale = -2.0 * psi / (q * q * radius);
            for a in 0..d {
                out.values[i][a] += amplitude[a] * psi;
                for b in 0..d {
                    let g = out.gradients[i].get(a, b) + amplitude[a] * scale * dx[b];
                    out.gradients[i].set(a, b, g);
                }
            }
        }
        Ok(out)
    }

    /// Grid mean of `∇·u` over `Ω`.
    pub fn mean_divergence(&self) -> f64 {
        let cells = self.grid.inside();
        let mut acc = CompensatedSum::new();
        for &i in cells {
            acc.add(self.gradients[i].trace());
        }
        acc.value() / cells.len() as f64
    }
}

/// `u = H0 x + ∇h` from centred differences of `h`; the gradient is
/// `H0 + D²h` with compact second differences. Cells outside `Ω` carry the
/// affine field.
pub fn displacement_field(h: &ScalarField, h0: &SquareMatrix) -> Result<VectorField> {
    let grid = h.grid().clone();
    let d = grid.dim();
    if h0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h0.dim(),
        });
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut gradients = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.center(i);
        let mut u = h0.mul_vec(&x[..d]);
        if grid.contains(i) {
            let g = h.gradient(i);
            for a in 0..d {
                u[a] += g[a];
            }
            gradients.push(*h0 + h.hessian(i));
        } else {
            gradients.push(*h0);
        }
        values.push(u);
    }
    VectorField::new(grid, values, gradients)
}

/// Midpoint rule for `∫_Ω W0(∇u)` over the cells of `Ω`.
pub fn total_energy(u: &VectorField, params: &MaterialParams) -> Result<f64> {
    let grid = u.grid();
    if grid.dim() != params.d() {
        return Err(Error::DimensionMismatch {
            expected: params.d(),
            found: grid.dim(),
        });
    }
    let mut acc = CompensatedSum::new();
    for &i in grid.inside() {
        acc.add(eval_w0(&u.gradients[i], params)?);
    }
    Ok(acc.value() * grid.cell_volume())
}
