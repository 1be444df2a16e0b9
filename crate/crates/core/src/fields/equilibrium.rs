use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::displacement::VectorField;
use crate::energy::{CommonTangent, MaterialParams};
use crate::error::{invalid, Result};
use crate::matrix::SquareMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    fn build(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = alloc::vec![0; bins];
        let width = hi - lo;
        for v in values {
            let k = if width > 0.0 {
                (((v - lo) / width) * bins as f64) as usize
            } else {
                0
            };
            counts[k.min(bins - 1)] += 1;
        }
        Histogram { lo, hi, counts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    /// Interface margin `δ` as a fraction of `θ2 − θ1`.
    pub margin_fraction: f64,
    pub bins: usize,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            margin_fraction: 0.05,
            bins: 64,
        }
    }
}

/// Grid diagnostics of the equilibrium conditions for `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    /// `max |skew ∇u − mean skew ∇u|`: zero iff `∇u − H0` is symmetric.
    pub symmetry_defect: f64,
    /// Median of `Φ'(∇·u)` over `Ω`.
    pub p0: f64,
    /// Mean `|Φ'(∇·u) − P0|` over cells outside the binodal band.
    pub p0_deviation: f64,
    /// Largest `|Φ'(∇·u) − P0|` over the same cells.
    pub p0_max_deviation: f64,
    /// `|{x : ∇·u ∈ (θ1 + δ, θ2 − δ)}|`.
    pub binodal_violation: f64,
    pub margin: f64,
    /// Fractions of `Ω` with `∇·u` within `δ` of `θ1` and of `θ2`.
    pub phase1_fraction: f64,
    pub phase2_fraction: f64,
    pub divergence_histogram: Histogram,
}

impl EquilibriumReport {
    /// `p0_deviation / |P0|`, or the absolute deviation when `P0 = 0`.
    pub fn relative_p0_deviation(&self) -> f64 {
        if self.p0 != 0.0 {
            self.p0_deviation / self.p0.abs()
        } else {
            self.p0_deviation
        }
    }
}

pub fn equilibrium_certificate(
    u: &VectorField,
    params: &MaterialParams,
    tangent: &CommonTangent,
) -> Result<EquilibriumReport> {
    equilibrium_certificate_with(u, params, tangent, &EquilibriumOptions::default())
}

pub fn equilibrium_certificate_with(
    u: &VectorField,
    params: &MaterialParams,
    tangent: &CommonTangent,
    options: &EquilibriumOptions,
) -> Result<EquilibriumReport> {
    if options.bins == 0 {
        return Err(invalid("histogram needs at least one bin"));
    }
    let grid = u.grid();
    let d = grid.dim();
    let cells = grid.inside();
    let volume = grid.cell_volume();

    // Shifted by the first cell so constant skew parts cancel exactly.
    let shift = u.gradient(cells[0]).skew();
    let mut mean_skew = SquareMatrix::zeros(d);
    for &i in cells {
        mean_skew = mean_skew + (u.gradient(i).skew() - shift);
    }
    mean_skew = shift + mean_skew * (1.0 / cells.len() as f64);
    let symmetry_defect = cells
        .iter()
        .map(|&i| (u.gradient(i).skew() - mean_skew).norm())
        .fold(0.0, f64::max);

    let div: Vec<f64> = cells.iter().map(|&i| u.gradient(i).trace()).collect();
    let slopes = div
        .iter()
        .map(|&t| params.phi(t).map(|j| j.slope))
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = slopes.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let p0 = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };

    let (margin, band): (f64, Option<(f64, f64)>) = match tangent.binodal() {
        Some(b) => {
            let delta = options.margin_fraction * b.width();
            (delta, Some((b.theta1, b.theta2)))
        }
        None => (0.0, None),
    };
    let mut violation = 0usize;
    let mut near1 = 0usize;
    let mut near2 = 0usize;
    let mut dev_sum = 0.0;
    let mut dev_max: f64 = 0.0;
    let mut dev_count = 0usize;
    for (k, &t) in div.iter().enumerate() {
        let in_band = match band {
            Some((t1, t2)) => {
                if (t - t1).abs() <= margin {
                    near1 += 1;
                }
                if (t - t2).abs() <= margin {
                    near2 += 1;
                }
                t > t1 + margin && t < t2 - margin
            }
            None => false,
        };
        if in_band {
            violation += 1;
        } else {
            let dev = (slopes[k] - p0).abs();
            dev_sum += dev;
            dev_max = dev_max.max(dev);
            dev_count += 1;
        }
    }
    let n = cells.len() as f64;
    Ok(EquilibriumReport {
        symmetry_defect,
        p0,
        p0_deviation: if dev_count > 0 {
            dev_sum / dev_count as f64
        } else {
            0.0
        },
        p0_max_deviation: dev_max,
        binodal_violation: violation as f64 * volume,
        margin,
        phase1_fraction: near1 as f64 / n,
        phase2_fraction: near2 as f64 / n,
        divergence_histogram: Histogram::build(&div, options.bins),
    })
}
