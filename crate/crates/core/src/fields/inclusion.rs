use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{DomainShape, GridDomain};
use crate::error::{invalid, precondition, Result};
use crate::matrix::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: [f64; MAX_DIM],
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance(x) < self.radius
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Greedy packing of disjoint balls in `Ω`, each carrying a phase-1 core of
/// radius `ω^{1/d} R`.
#[derive(Debug, Clone, PartialEq)]
pub struct HashinPacking {
    pub omega: f64,
    pub balls: Vec<Ball>,
    /// Fraction of the cells of `Ω` whose centre is covered by some ball.
    pub coverage: f64,
    pub target: f64,
    pub min_radius: f64,
    pub reached_target: bool,
}

impl HashinPacking {
    pub fn core_ratio(&self, d: usize) -> f64 {
        self.omega.powf(1.0 / d as f64)
    }

    /// Exact volume of the balls divided by the grid measure of `Ω`.
    pub fn analytic_coverage(&self, grid: &GridDomain) -> f64 {
        let d = grid.dim();
        let vol: f64 = self.balls.iter().map(|b| ball_volume(d, b.radius)).sum();
        vol / grid.measure()
    }
}

/// Volume of a `d`-ball.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    use core::f64::consts::PI;
    let unit = match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => f64::NAN,
    };
    unit * r.powi(d as i32)
}

/// Phase-1 set `A ⊂ Ω`.
#[derive(Debug, Clone, PartialEq)]
pub enum InclusionGeometry {
    /// Concentric ball in the unit ball domain with core radius `r0`.
    ConcentricBall {
        omega: f64,
        r0: f64,
        phase1_inside: bool,
    },
    HashinPacking(HashinPacking),
    /// Per-cell phase-1 flags on a given grid.
    ExplicitMask {
        omega: f64,
        phase1: Vec<bool>,
    },
}

impl InclusionGeometry {
    pub fn concentric_ball(d: usize, omega: f64, phase1_inside: bool) -> Result<Self> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(invalid(alloc::format!("ω = {omega} must lie in (0, 1)")));
        }
        let w = if phase1_inside { omega } else { 1.0 - omega };
        Ok(InclusionGeometry::ConcentricBall {
            omega,
            r0: w.powf(1.0 / d as f64),
            phase1_inside,
        })
    }

    /// Flags restricted to `Ω`; `ω` is their grid fraction.
    pub fn explicit_mask(grid: &GridDomain, phase1: Vec<bool>) -> Result<Self> {
        if phase1.len() != grid.len() {
            return Err(invalid("phase mask length does not match the grid"));
        }
        let mut flags = phase1;
        for (i, f) in flags.iter_mut().enumerate() {
            *f &= grid.contains(i);
        }
        let count = grid.inside().iter().filter(|&&i| flags[i]).count();
        Ok(InclusionGeometry::ExplicitMask {
            omega: count as f64 / grid.inside().len() as f64,
            phase1: flags,
        })
    }

    /// Phase 1 on the cells of `Ω` with centre in the ball.
    pub fn ball_mask(grid: &GridDomain, center: &[f64], radius: f64) -> Result<Self> {
        let mut c = [0.0; MAX_DIM];
        c[..center.len()].copy_from_slice(center);
        let ball = Ball { center: c, radius };
        let flags = (0..grid.len())
            .map(|i| ball.contains(&grid.center(i)[..grid.dim()]))
            .collect();
        Self::explicit_mask(grid, flags)
    }

    pub fn omega(&self) -> f64 {
        match self {
            InclusionGeometry::ConcentricBall { omega, .. } => *omega,
            InclusionGeometry::HashinPacking(p) => p.omega,
            InclusionGeometry::ExplicitMask { omega, .. } => *omega,
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            InclusionGeometry::ConcentricBall { .. } => "concentric_ball",
            InclusionGeometry::HashinPacking(_) => "hashin_packing",
            InclusionGeometry::ExplicitMask { .. } => "explicit_mask",
        }
    }

    /// Cell-centre membership in `A`.
    pub fn phase1_cells(&self, grid: &GridDomain) -> Result<Vec<bool>> {
        let d = grid.dim();
        match self {
            InclusionGeometry::ConcentricBall {
                r0, phase1_inside, ..
            } => Ok((0..grid.len())
                .map(|i| {
                    let r = crate::matrix::norm(&grid.center(i)[..d]);
                    grid.contains(i) && ((r < *r0) == *phase1_inside)
                })
                .collect()),
            InclusionGeometry::HashinPacking(p) => {
                let ratio = p.core_ratio(d);
                let mut flags = alloc::vec![false; grid.len()];
                for b in &p.balls {
                    let core = Ball {
                        center: b.center,
                        radius: ratio * b.radius,
                    };
                    for_cells_in_ball(grid, b, |i, x| {
                        if core.contains(x) {
                            flags[i] = grid.contains(i);
                        }
                    });
                }
                Ok(flags)
            }
            InclusionGeometry::ExplicitMask { phase1, .. } => {
                if phase1.len() != grid.len() {
                    return Err(invalid("phase mask length does not match the grid"));
                }
                Ok(phase1.clone())
            }
        }
    }
}

/// Calls `f(index, centre)` for every grid cell whose centre lies in `ball`.
pub(crate) fn for_cells_in_ball<F: FnMut(usize, &[f64])>(grid: &GridDomain, ball: &Ball, mut f: F) {
    let d = grid.dim();
    let s = grid.spacing();
    let first = grid.center(0);
    let dims = grid.dims();
    let mut lo = [0usize; MAX_DIM];
    let mut hi = [0usize; MAX_DIM];
    for a in 0..d {
        let l = ((ball.center[a] - ball.radius - first[a]) / s)
            .floor()
            .max(0.0) as usize;
        let h = ((ball.center[a] + ball.radius - first[a]) / s)
            .ceil()
            .max(0.0) as usize;
        lo[a] = l.min(dims[a] - 1);
        hi[a] = h.min(dims[a] - 1);
    }
    let mut m = lo;
    loop {
        let i = grid.index(&m[..d]);
        let x = grid.center(i);
        if ball.contains(&x[..d]) {
            f(i, &x[..d]);
        }
        let mut a = 0;
        loop {
            if a == d {
                return;
            }
            if m[a] < hi[a] {
                m[a] += 1;
                break;
            }
            m[a] = lo[a];
            a += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashinOptions {
    pub omega: f64,
    pub min_radius: f64,
    /// Stop once this fraction of `Ω` is covered.
    pub target_coverage: f64,
    pub max_balls: usize,
    /// Breaks ties between equally good centres.
    pub seed: u64,
}

/// Greedy packing with a coverage target of 0.99.
pub fn assemble_hashin(
    domain: &GridDomain,
    omega: f64,
    min_radius: f64,
    seed: u64,
) -> Result<InclusionGeometry> {
    assemble_hashin_with(
        domain,
        &HashinOptions {
            omega,
            min_radius,
            target_coverage: 0.99,
            max_balls: 1 << 20,
            seed,
        },
    )
}

/// Repeatedly places the largest ball centred at the cell centre farthest
/// from `∂Ω` and the balls placed so far.
pub fn assemble_hashin_with(
    domain: &GridDomain,
    options: &HashinOptions,
) -> Result<InclusionGeometry> {
    let omega = options.omega;
    if !(omega > 0.0 && omega < 1.0) {
        return Err(invalid(alloc::format!("ω = {omega} must lie in (0, 1)")));
    }
    let d = domain.dim();
    let size = domain.radius().max(domain.spacing());
    if !(options.min_radius > 0.0 && options.min_radius < size) {
        return Err(invalid("min_radius must lie in (0, domain size)"));
    }
    let cells = domain.inside();
    let mut clear: Vec<f64> = match domain.shape() {
        DomainShape::ExplicitMask => {
            let faces = domain.boundary_faces();
            if faces.is_empty() {
                return Err(precondition("domain has no boundary"));
            }
            cells
                .iter()
                .map(|&i| {
                    let x = domain.center(i);
                    faces
                        .iter()
                        .map(|f| {
                            (0..d)
                                .map(|a| (x[a] - f.center[a]) * (x[a] - f.center[a]))
                                .sum::<f64>()
                        })
                        .fold(f64::INFINITY, f64::min)
                        .sqrt()
                })
                .collect()
        }
        _ => cells
            .iter()
            .map(|&i| {
                domain
                    .analytic_boundary_distance(&domain.center(i)[..d])
                    .unwrap_or(0.0)
            })
            .collect(),
    };
    let centers: Vec<[f64; MAX_DIM]> = cells.iter().map(|&i| domain.center(i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut balls = Vec::new();
    let mut covered = 0usize;
    let total = cells.len();
    let tie = 1e-12 * size;
    let mut candidates = Vec::new();
    loop {
        let coverage = covered as f64 / total as f64;
        if coverage >= options.target_coverage || balls.len() >= options.max_balls {
            break;
        }
        let best = clear.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(best >= options.min_radius) {
            break;
        }
        candidates.clear();
        candidates.extend((0..total).filter(|&k| clear[k] >= best - tie));
        let pick = candidates[rng.random_range(0..candidates.len())];
        let ball = Ball {
            center: centers[pick],
            radius: best,
        };
        for (k, x) in centers.iter().enumerate() {
            let gap = ball.distance(&x[..d]) - best;
            if gap < clear[k] {
                if clear[k] >= 0.0 && gap < 0.0 {
                    covered += 1;
                }
                clear[k] = gap;
            }
        }
        balls.push(ball);
    }
    let coverage = covered as f64 / total as f64;
    Ok(InclusionGeometry::HashinPacking(HashinPacking {
        omega,
        balls,
        coverage,
        target: options.target_coverage,
        min_radius: options.min_radius,
        reached_target: coverage >= options.target_coverage,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_ball_fills_the_disk() {
        // Odd n puts a cell centre at the origin.
        let g = GridDomain::unit_disk(65).unwrap();
        let geo = assemble_hashin_with(
            &g,
            &HashinOptions {
                omega: 0.5,
                min_radius: 0.1,
                target_coverage: 0.99,
                max_balls: 1,
                seed: 0,
            },
        )
        .unwrap();
        let InclusionGeometry::HashinPacking(p) = geo else {
            panic!()
        };
        assert_eq!(p.balls.len(), 1);
        assert!((p.balls[0].radius - 1.0).abs() < 1e-15);
        assert_eq!(p.coverage, 1.0);
        assert!((p.analytic_coverage(&g) - 1.0).abs() < 0.01);
    }

    #[test]
    fn packing_is_disjoint_and_contained() {
        let g = GridDomain::square(64, 1.0).unwrap();
        let geo = assemble_hashin(&g, 0.4, 0.05, 3).unwrap();
        let InclusionGeometry::HashinPacking(p) = geo else {
            panic!()
        };
        for (i, a) in p.balls.iter().enumerate() {
            for k in 0..2 {
                assert!(a.center[k].abs() + a.radius <= 1.0 + 1e-12);
            }
            for b in &p.balls[i + 1..] {
                assert!(a.distance(&b.center[..2]) >= a.radius + b.radius - 1e-12);
            }
        }
        let again = assemble_hashin(&g, 0.4, 0.05, 3).unwrap();
        assert_eq!(again, InclusionGeometry::HashinPacking(p));
    }
}
