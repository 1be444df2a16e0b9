use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::grid::{DomainShape, GridDomain};
use super::inclusion::{for_cells_in_ball, InclusionGeometry};
use super::radial::RadialProfile;
use crate::energy::CommonTangent;
use crate::error::{invalid, precondition, Error, Result};
use crate::matrix::{SquareMatrix, MAX_DIM};

/// One real value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<GridDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("field length does not match the grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field values must be finite"));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Arc<GridDomain>) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at(&self, i: usize, axis: usize, dir: i32) -> f64 {
        self.grid
            .neighbor(i, axis, dir)
            .map_or(0.0, |j| self.values[j])
    }

    fn at2(&self, i: usize, a: usize, da: i32, b: usize, db: i32) -> f64 {
        self.grid
            .neighbor(i, a, da)
            .and_then(|j| self.grid.neighbor(j, b, db))
            .map_or(0.0, |j| self.values[j])
    }

    /// Centred-difference gradient at cell `i`.
    pub fn gradient(&self, i: usize) -> [f64; MAX_DIM] {
        let s = self.grid.spacing();
        let mut g = [0.0; MAX_DIM];
        for (a, ga) in g.iter_mut().enumerate().take(self.grid.dim()) {
            *ga = (self.at(i, a, 1) - self.at(i, a, -1)) / (2.0 * s);
        }
        g
    }

    /// Compact second differences: three points on the diagonal, the four
    /// corners off it.
    pub fn hessian(&self, i: usize) -> SquareMatrix {
        let d = self.grid.dim();
        let s2 = self.grid.spacing().powi(2);
        let c = self.values[i];
        let mut h = SquareMatrix::zeros(d);
        for a in 0..d {
            h.set(a, a, (self.at(i, a, 1) - 2.0 * c + self.at(i, a, -1)) / s2);
            for b in a + 1..d {
                let v =
                    (self.at2(i, a, 1, b, 1) - self.at2(i, a, 1, b, -1) - self.at2(i, a, -1, b, 1)
                        + self.at2(i, a, -1, b, -1))
                        / (4.0 * s2);
                h.set(a, b, v);
                h.set(b, a, v);
            }
        }
        h
    }

    /// Standard `2d+1`-point Laplacian.
    pub fn laplacian(&self, i: usize) -> f64 {
        self.hessian(i).trace()
    }

    /// Largest `|D_a D_b h − D_b D_a h|` over `Ω` with centred differences
    /// applied in both orders.
    pub fn mixed_partial_defect(&self) -> f64 {
        let d = self.grid.dim();
        let s = self.grid.spacing();
        let mut worst: f64 = 0.0;
        let grad_along = |j: Option<usize>, axis: usize| -> f64 {
            j.map_or(0.0, |j| {
                (self.at(j, axis, 1) - self.at(j, axis, -1)) / (2.0 * s)
            })
        };
        for &i in self.grid.inside() {
            for a in 0..d {
                for b in a + 1..d {
                    let ab = (grad_along(self.grid.neighbor(i, a, 1), b)
                        - grad_along(self.grid.neighbor(i, a, -1), b))
                        / (2.0 * s);
                    let ba = (grad_along(self.grid.neighbor(i, b, 1), a)
                        - grad_along(self.grid.neighbor(i, b, -1), a))
                        / (2.0 * s);
                    worst = worst.max((ab - ba).abs());
                }
            }
        }
        worst
    }
}

/// Convergence data of the Poisson solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Potential `h` of `φ = ∇h` together with the phase arrangement it was
/// built for.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub h: ScalarField,
    /// Cell-centre membership in phase 1.
    pub phase1: Vec<bool>,
    pub omega: f64,
    /// `θ1 − θ2`.
    pub jump: f64,
    /// Present when `h` came from the Poisson solve.
    pub solver: Option<SolverStats>,
    /// `free_boundary_defect(h)`.
    pub neumann_defect: f64,
}

impl PotentialField {
    pub fn grid(&self) -> &Arc<GridDomain> {
        self.h.grid()
    }

    /// Right-hand side `J (χ − ω)` at cell `i`.
    pub fn source(&self, i: usize) -> f64 {
        let chi = if self.phase1[i] { 1.0 } else { 0.0 };
        self.jump * (chi - self.omega)
    }

    /// Largest `|Δ_h h − J (χ − ω)|` over cells of `Ω` whose stencil
    /// neighbourhood (`band` cells per axis) has a single phase and stays
    /// inside `Ω`.
    pub fn laplacian_residual(&self, band: usize) -> f64 {
        let grid = self.grid();
        let d = grid.dim();
        let mut worst: f64 = 0.0;
        'cells: for &i in grid.inside() {
            let p = self.phase1[i];
            for a in 0..d {
                for dir in [-1, 1] {
                    let mut j = i;
                    for _ in 0..band {
                        match grid.neighbor(j, a, dir) {
                            Some(k) if grid.contains(k) && self.phase1[k] == p => j = k,
                            _ => continue 'cells,
                        }
                    }
                }
            }
            worst = worst.max((self.h.laplacian(i) - self.source(i)).abs());
        }
        worst
    }

    /// `|A| / |Ω|` on the grid.
    pub fn measured_fraction(&self) -> f64 {
        let inside = self.grid().inside();
        inside.iter().filter(|&&i| self.phase1[i]).count() as f64 / inside.len() as f64
    }
}

/// Discrete `L²(∂Ω)` norm of `∇h` over the boundary cells. On the analytic
/// shapes each gradient is carried from the cell centre to `∂Ω` along the
/// cell normal by one Hessian step, so a field with `∇h = 0` on `∂Ω` gives a
/// second-order small value rather than one set by how far the staircase
/// sits inside the boundary.
pub fn free_boundary_defect(h: &ScalarField) -> f64 {
    let grid = h.grid();
    let d = grid.dim();
    let area = grid.spacing().powi(d as i32 - 1);
    let sum: f64 = grid
        .boundary_cells()
        .iter()
        .map(|b| {
            let mut g = h.gradient(b.index);
            let x = grid.center(b.index);
            if let Some(delta) = grid.analytic_boundary_distance(&x[..d]) {
                let step: Vec<f64> = b.normal[..d].iter().map(|n| delta * n).collect();
                let dg = h.hessian(b.index).mul_vec(&step);
                for a in 0..d {
                    g[a] += dg[a];
                }
            }
            g[..d].iter().map(|x| x * x).sum::<f64>() * area
        })
        .sum();
    sum.sqrt()
}

pub fn build_potential(
    domain: &Arc<GridDomain>,
    inclusion: &InclusionGeometry,
    tangent: &CommonTangent,
) -> Result<PotentialField> {
    let t = tangent.require()?;
    let jump = t.jump();
    let d = domain.dim();
    let phase1 = inclusion.phase1_cells(domain)?;
    let mut values = alloc::vec![0.0; domain.len()];
    let mut solver = None;
    let omega = match inclusion {
        InclusionGeometry::ConcentricBall {
            omega,
            phase1_inside,
            ..
        } => {
            let unit = matches!(
                (domain.shape(), d),
                (DomainShape::UnitDisk, 2) | (DomainShape::UnitBall3d, 3)
            );
            if !unit {
                return Err(precondition(
                    "concentric ball construction needs the unit disk or unit ball domain",
                ));
            }
            let profile = RadialProfile::new(d, *omega, jump, *phase1_inside)?;
            // Ghost cells carry the continued outer branch.
            for (i, v) in values.iter_mut().enumerate() {
                let r = crate::matrix::norm(&domain.center(i)[..d]);
                *v = profile.continued_jet(r)?.value;
            }
            *omega
        }
        InclusionGeometry::HashinPacking(p) => {
            let profile = RadialProfile::new(d, p.omega, jump, true)?;
            for b in &p.balls {
                let mut err = None;
                for_cells_in_ball(domain, b, |i, x| {
                    if !domain.contains(i) {
                        return;
                    }
                    let r = (b.distance(x) / b.radius).min(1.0);
                    match profile.value(r) {
                        Ok(v) => values[i] = b.radius * b.radius * v,
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
            p.omega
        }
        InclusionGeometry::ExplicitMask { omega, .. } => {
            let rhs: Vec<f64> = (0..domain.len())
                .map(|i| {
                    if domain.contains(i) {
                        let chi = if phase1[i] { 1.0 } else { 0.0 };
                        jump * (chi - omega)
                    } else {
                        0.0
                    }
                })
                .collect();
            let (h, stats) = solve_dirichlet_poisson(domain, &rhs, 1e-10, 50 * domain.n())?;
            values = h;
            solver = Some(stats);
            *omega
        }
    };
    let h = ScalarField {
        grid: domain.clone(),
        values,
    };
    let neumann_defect = free_boundary_defect(&h);
    Ok(PotentialField {
        h,
        phase1,
        omega,
        jump,
        solver,
        neumann_defect,
    })
}

/// `−Δ_h v` with `v = 0` outside `Ω`.
fn apply_negative_laplacian(grid: &GridDomain, v: &[f64], out: &mut [f64]) {
    let d = grid.dim();
    let inv = 1.0 / grid.spacing().powi(2);
    for &i in grid.inside() {
        let mut acc = 2.0 * d as f64 * v[i];
        for a in 0..d {
            for dir in [-1, 1] {
                if let Some(j) = grid.neighbor(i, a, dir) {
                    if grid.contains(j) {
                        acc -= v[j];
                    }
                }
            }
        }
        out[i] = acc * inv;
    }
}

fn dot_inside(grid: &GridDomain, a: &[f64], b: &[f64]) -> f64 {
    grid.inside().iter().map(|&i| a[i] * b[i]).sum()
}

/// Conjugate gradients for `Δ_h h = rhs` in `Ω`, `h = 0` outside.
pub fn solve_dirichlet_poisson(
    grid: &GridDomain,
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolverStats)> {
    let n = grid.len();
    if rhs.len() != n {
        return Err(invalid("right-hand side length does not match the grid"));
    }
    let mut x = alloc::vec![0.0; n];
    // Solve −Δ x = −rhs, which is symmetric positive definite.
    let mut r: Vec<f64> = (0..n)
        .map(|i| if grid.contains(i) { -rhs[i] } else { 0.0 })
        .collect();
    let b_norm = dot_inside(grid, &r, &r).sqrt();
    if b_norm == 0.0 {
        return Ok((
            x,
            SolverStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut p = r.clone();
    let mut ap = alloc::vec![0.0; n];
    let mut rr = b_norm * b_norm;
    for it in 1..=max_iter {
        apply_negative_laplacian(grid, &p, &mut ap);
        let alpha = rr / dot_inside(grid, &p, &ap);
        for &i in grid.inside() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot_inside(grid, &r, &r);
        let rel = rr_new.sqrt() / b_norm;
        if rel <= rel_tol {
            return Ok((
                x,
                SolverStats {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for &i in grid.inside() {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        solver: "conjugate gradients",
        iterations: max_iter,
        residual: rr.sqrt() / b_norm,
    })
}
