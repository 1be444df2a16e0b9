use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::piola;
use crate::energy::{eval_w0, MaterialParams};
use crate::error::{invalid, Result};
use crate::fields::{GridDomain, VectorField};
use crate::matrix::{SquareMatrix, MAX_DIM};

/// Weak-form residuals, each the largest over test functions `ψ e_i` of
/// `|Σ T : ∇(ψ e_i)| / Σ |T|' |∇ψ|` for `T = P` and `T = P*`. The scale
/// `|T|'` is `|P|` for the Piola stress and `√d |W0| + |Hᵗ P|` for `P*`,
/// whose two terms nearly cancel for some loadings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityResiduals {
    pub el_residual: f64,
    pub noether_residual: f64,
    pub tests: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityOptions {
    /// Half width of the bump support, as a fraction of the domain radius.
    pub support_fraction: f64,
    /// Cells kept between a support box and `∂Ω`.
    pub margin_cells: usize,
}

impl Default for StationarityOptions {
    fn default() -> Self {
        StationarityOptions {
            support_fraction: 0.2,
            margin_cells: 2,
        }
    }
}

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

pub fn stationarity_residuals(
    u: &VectorField,
    params: &MaterialParams,
) -> Result<StationarityResiduals> {
    stationarity_residuals_with(u, params, &StationarityOptions::default())
}

/// Tensor-product bumps centred on the lattice `ρ Z^d`, `ρ` the half
/// width, keeping those whose support stays inside `Ω`. The test
/// gradient is the centred difference of the sampled bump, so constant
/// stresses give exactly zero.
pub fn stationarity_residuals_with(
    u: &VectorField,
    params: &MaterialParams,
    options: &StationarityOptions,
) -> Result<StationarityResiduals> {
    let grid = u.grid();
    let d = grid.dim();
    let s = grid.spacing();
    let radius = grid.radius();
    let rho = (options.support_fraction * radius).max(4.0 * s);
    let half = (rho / s).ceil() as i64 + 1;
    if !(rho > 0.0) {
        return Err(invalid("bump support must be positive"));
    }

    let root_d = (d as f64).sqrt();
    let stress: Vec<(SquareMatrix, SquareMatrix, f64)> = (0..grid.len())
        .map(|i| {
            if grid.contains(i) {
                let g = u.gradient(i);
                let p = piola(g, params)?;
                let w = eval_w0(g, params)?;
                let hp = g.transpose().matmul(&p);
                let q = SquareMatrix::scaled_identity(d, w) - hp;
                Ok((p, q, root_d * w.abs() + hp.norm()))
            } else {
                Ok((SquareMatrix::zeros(d), SquareMatrix::zeros(d), 0.0))
            }
        })
        .collect::<Result<_>>()?;

    let margin = options.margin_cells as i64 + 1;
    let mut el: f64 = 0.0;
    let mut noether: f64 = 0.0;
    let mut tests = 0;
    // Centres on the lattice ρ Z^d, so refinement keeps the same tests.
    let reach = (radius / rho).ceil() as i64;
    let side = (2 * reach + 1) as usize;
    let first = grid.center(0);
    for k in 0..side.pow(d as u32) {
        let mut rem = k;
        let mut c = [0.0; MAX_DIM];
        let mut centre = [0usize; MAX_DIM];
        let mut on_grid = true;
        for a in 0..d {
            c[a] = ((rem % side) as i64 - reach) as f64 * rho;
            rem /= side;
            let idx = ((c[a] - first[a]) / s).round();
            if idx < 0.0 || idx >= grid.dims()[a] as f64 {
                on_grid = false;
            }
            centre[a] = idx as usize;
        }
        if !on_grid {
            continue;
        }
        let Some(cells) = support(grid, &centre[..d], half + margin) else {
            continue;
        };
        let psi = |x: &[f64]| -> f64 { (0..d).map(|a| bump((x[a] - c[a]) / rho)).product() };
        let mut num_p = [0.0; MAX_DIM];
        let mut num_q = [0.0; MAX_DIM];
        let mut den_p = 0.0;
        let mut den_q = 0.0;
        for &i in &cells {
            let mut grad = [0.0; MAX_DIM];
            let x = grid.center(i);
            for (b, gb) in grad.iter_mut().enumerate().take(d) {
                let mut xp = x;
                let mut xm = x;
                xp[b] += s;
                xm[b] -= s;
                *gb = (psi(&xp[..d]) - psi(&xm[..d])) / (2.0 * s);
            }
            let gnorm = crate::matrix::norm(&grad[..d]);
            if gnorm == 0.0 {
                continue;
            }
            let (p, q, q_scale) = &stress[i];
            let pg = p.mul_vec(&grad[..d]);
            let qg = q.mul_vec(&grad[..d]);
            for a in 0..d {
                num_p[a] += pg[a];
                num_q[a] += qg[a];
            }
            den_p += p.norm() * gnorm;
            den_q += q_scale * gnorm;
        }
        tests += 1;
        for a in 0..d {
            if den_p > 0.0 {
                el = el.max(num_p[a].abs() / den_p);
            }
            if den_q > 0.0 {
                noether = noether.max(num_q[a].abs() / den_q);
            }
        }
    }
    Ok(StationarityResiduals {
        el_residual: el,
        noether_residual: noether,
        tests,
    })
}

/// Cells of the box of half width `half` around `centre`, or `None` if the
/// box leaves `Ω`.
fn support(grid: &GridDomain, centre: &[usize], half: i64) -> Option<Vec<usize>> {
    let d = grid.dim();
    let dims = grid.dims();
    let side = (2 * half + 1) as usize;
    let mut out = Vec::with_capacity(side.pow(d as u32));
    let mut m = [0usize; MAX_DIM];
    for k in 0..side.pow(d as u32) {
        let mut rem = k;
        for a in 0..d {
            let v = centre[a] as i64 + (rem % side) as i64 - half;
            rem /= side;
            if v < 0 || v >= dims[a] as i64 {
                return None;
            }
            m[a] = v as usize;
        }
        let i = grid.index(&m[..d]);
        if !grid.contains(i) {
            return None;
        }
        out.push(i);
    }
    Some(out)
}
