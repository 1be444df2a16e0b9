use alloc::vec::Vec;

use super::{eshelby, piola};
use crate::energy::MaterialParams;
use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::matrix::{SquareMatrix, MAX_DIM};
use crate::quadrature::CompensatedSum;

/// One quadrature point on `∂Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub x: [f64; MAX_DIM],
    pub n: [f64; MAX_DIM],
    /// Displacement `u(x)`.
    pub y: [f64; MAX_DIM],
    /// Gradient `∇u(x)`.
    pub gradient: SquareMatrix,
    /// `P n`.
    pub p_n: [f64; MAX_DIM],
    /// `P* n`.
    pub pstar_n: [f64; MAX_DIM],
    pub ds: f64,
}

/// Traces of `u`, `P n` and `P* n` on the staircase boundary of the grid
/// domain, one sample per boundary face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub d: usize,
    pub samples: Vec<TraceSample>,
}

/// Weights of the quadratic through cell centres at depths 0.5, 1.5, 2.5
/// evaluated at depth 0.
const QUADRATIC: [f64; 3] = [1.875, -1.25, 0.375];
const LINEAR: [f64; 2] = [1.5, -0.5];

impl BoundaryTrace {
    /// Extrapolates `u` and `∇u` to every face centre from the three cells
    /// behind it along the inward normal, dropping to lower order where the
    /// column leaves `Ω`.
    pub fn extract(u: &VectorField, params: &MaterialParams) -> Result<Self> {
        let grid = u.grid();
        let d = grid.dim();
        if d != params.d() {
            return Err(Error::DimensionMismatch {
                expected: params.d(),
                found: d,
            });
        }
        let mut samples = Vec::with_capacity(grid.boundary_faces().len());
        for face in grid.boundary_faces() {
            let inward = -(face.sign as i32);
            let c1 = face.cell;
            let c2 = grid
                .neighbor(c1, face.axis, inward)
                .filter(|&j| grid.contains(j));
            let c3 = c2
                .and_then(|j| grid.neighbor(j, face.axis, inward))
                .filter(|&j| grid.contains(j));
            let (cells, weights): (Vec<usize>, &[f64]) = match (c2, c3) {
                (Some(b), Some(c)) => (alloc::vec![c1, b, c], &QUADRATIC),
                (Some(b), None) => (alloc::vec![c1, b], &LINEAR),
                _ => (alloc::vec![c1], &[1.0]),
            };
            let mut y = [0.0; MAX_DIM];
            let mut g = SquareMatrix::zeros(d);
            for (&c, &w) in cells.iter().zip(weights) {
                for a in 0..d {
                    y[a] += w * u.value(c)[a];
                }
                g = g + *u.gradient(c) * w;
            }
            let n = face.normal();
            let p = piola(&g, params)?;
            let ps = eshelby(&g, params)?;
            samples.push(TraceSample {
                x: face.center,
                n,
                y,
                gradient: g,
                p_n: p.mul_vec(&n[..d]),
                pstar_n: ps.mul_vec(&n[..d]),
                ds: face.area,
            });
        }
        Ok(BoundaryTrace { d, samples })
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.ds).sum()
    }
}

/// `(1/d) Σ (P n · y + P* n · x) ds`.
pub fn clapeyron_energy(trace: &BoundaryTrace, d: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for s in &trace.samples {
        let mut v = 0.0;
        for a in 0..d {
            v += s.p_n[a] * s.y[a] + s.pstar_n[a] * s.x[a];
        }
        acc.add(v * s.ds);
    }
    acc.value() / d as f64
}
