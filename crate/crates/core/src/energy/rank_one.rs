#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eval_w0, w0_gradient, CommonTangent, MaterialParams};
use crate::error::{invalid, precondition, Result};
use crate::matrix::{normalized, SquareMatrix, MAX_DIM};
use crate::tolerance::tolerances;

/// `H+ = H− + (θ2 − θ1) n⊗n` for `Tr H− = θ1`.
pub fn jump_pair(
    h_minus: &SquareMatrix,
    n: &[f64],
    tangent: &CommonTangent,
) -> Result<SquareMatrix> {
    let t = tangent.require()?;
    let d = h_minus.dim();
    if n.len() != d {
        return Err(invalid("normal has wrong dimension"));
    }
    let len = crate::matrix::norm(n);
    if (len - 1.0).abs() > 1e-12 {
        return Err(precondition("normal must be a unit vector"));
    }
    let tol = tolerances().algebraic * (1.0 + t.theta1.abs());
    if (h_minus.trace() - t.theta1).abs() > tol {
        return Err(precondition(alloc::format!(
            "Tr H- = {} is not on the θ1 = {} hyperplane",
            h_minus.trace(),
            t.theta1
        )));
    }
    Ok(*h_minus + SquareMatrix::outer(n, n) * t.width())
}

/// Residuals of the four jump relations across a phase boundary with
/// normal `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpResiduals {
    /// `|⟦H⟧ − (⟦H⟧n)⊗n|`: the jump is rank one with normal `n`.
    pub rank_one: f64,
    /// `|⟦P⟧ n|`: traction continuity.
    pub traction: f64,
    /// `|⟦P⟧ᵗ a|` with `a = ⟦H⟧ n`.
    pub transposed: f64,
    /// `|⟦W⟧ − ⟨{P}, ⟦H⟧⟩|`: Maxwell relation.
    pub maxwell: f64,
}

impl JumpResiduals {
    pub fn max(&self) -> f64 {
        self.rank_one
            .max(self.traction)
            .max(self.transposed)
            .max(self.maxwell)
    }
}

pub fn jump_conditions(
    h_minus: &SquareMatrix,
    h_plus: &SquareMatrix,
    n: &[f64],
    params: &MaterialParams,
) -> Result<JumpResiduals> {
    let jump = *h_plus - *h_minus;
    let a = jump.mul_vec(n);
    let d = jump.dim();
    let rank_one = (jump - SquareMatrix::outer(&a[..d], n)).norm();
    let p_minus = w0_gradient(h_minus, params)?;
    let p_plus = w0_gradient(h_plus, params)?;
    let dp = p_plus - p_minus;
    let traction = crate::matrix::norm(&dp.mul_vec(n)[..d]);
    let transposed = crate::matrix::norm(&dp.tr_mul_vec(&a[..d])[..d]);
    let avg = (p_plus + p_minus) * 0.5;
    let maxwell = (eval_w0(h_plus, params)? - eval_w0(h_minus, params)? - avg.inner(&jump)).abs();
    Ok(JumpResiduals {
        rank_one,
        traction,
        transposed,
        maxwell,
    })
}

/// Most negative Weierstrass excess found among the sampled rank-one
/// perturbations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeierstrassProbe {
    /// `min W0(H + a⊗n) − W0(H) − ⟨P(H), a⊗n⟩`.
    pub excess: f64,
    pub a: [f64; MAX_DIM],
    pub n: [f64; MAX_DIM],
    /// Tolerance the excess is compared against.
    pub tolerance: f64,
}

impl WeierstrassProbe {
    pub fn holds(&self) -> bool {
        self.excess >= -self.tolerance
    }
}

/// `false` iff some sampled rank-one perturbation violates the Weierstrass
/// inequality at `H`.
pub fn weierstrass_test(
    h: &SquareMatrix,
    params: &MaterialParams,
    n_dirs: usize,
    seed: u64,
) -> Result<bool> {
    weierstrass_worst(h, params, n_dirs, seed).map(|p| p.holds())
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> [f64; MAX_DIM] {
    loop {
        let mut v = [0.0; MAX_DIM];
        for x in v.iter_mut().take(d) {
            *x = rng.random_range(-1.0..1.0);
        }
        let r = crate::matrix::norm(&v[..d]);
        if r > 1e-3 && r <= 1.0 {
            return normalized(&v[..d]).unwrap();
        }
    }
}

/// Sweep over rank-one perturbations: coordinate normals and `n_dirs`
/// random normals, each paired with the dilatational direction `a ∥ n`, the
/// coordinate vectors and a random vector, at geometrically spaced
/// magnitudes of both signs.
pub fn weierstrass_worst(
    h: &SquareMatrix,
    params: &MaterialParams,
    n_dirs: usize,
    seed: u64,
) -> Result<WeierstrassProbe> {
    if n_dirs == 0 {
        return Err(invalid("n_dirs must be at least 1"));
    }
    let d = params.d();
    let w = eval_w0(h, params)?;
    let p = w0_gradient(h, params)?;
    let scale = params.potential().scale();
    let (dom_lo, dom_hi) = params.potential().domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const MAGNITUDES: usize = 40;
    let tol_rel = tolerances().algebraic;
    let mut worst = WeierstrassProbe {
        excess: f64::INFINITY,
        a: [0.0; MAX_DIM],
        n: [0.0; MAX_DIM],
        tolerance: tol_rel * (1.0 + w.abs()),
    };

    let mut normals: alloc::vec::Vec<[f64; MAX_DIM]> = (0..d)
        .map(|i| {
            let mut e = [0.0; MAX_DIM];
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..n_dirs {
        normals.push(random_unit(&mut rng, d));
    }
    for n in &normals {
        let mut dirs: alloc::vec::Vec<[f64; MAX_DIM]> = alloc::vec![*n];
        for i in 0..d {
            let mut e = [0.0; MAX_DIM];
            e[i] = 1.0;
            dirs.push(e);
        }
        dirs.push(random_unit(&mut rng, d));
        for a_dir in &dirs {
            for k in 0..MAGNITUDES {
                let s = scale * 1e-3 * (1e4f64).powf(k as f64 / (MAGNITUDES - 1) as f64);
                for sign in [1.0, -1.0] {
                    let mut a = [0.0; MAX_DIM];
                    for i in 0..d {
                        a[i] = sign * s * a_dir[i];
                    }
                    let pert = SquareMatrix::outer(&a[..d], &n[..d]);
                    let target = *h + pert;
                    let tr = target.sym().trace();
                    if tr < dom_lo || tr > dom_hi {
                        continue;
                    }
                    let linear = p.inner(&pert);
                    let excess = eval_w0(&target, params)? - w - linear;
                    if excess < worst.excess {
                        worst.excess = excess;
                        worst.a = a;
                        worst.n = *n;
                        worst.tolerance = tol_rel * (1.0 + w.abs() + linear.abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::common_tangent;

    #[test]
    fn jump_pair_satisfies_relations() {
        let p = MaterialParams::bi_quadratic(3, 1.0, 1.0, 1.0, 0.1).unwrap();
        let t = common_tangent(&p).unwrap();
        let hm = SquareMatrix::scaled_identity(3, 0.25 / 3.0);
        let n = [0.0, 0.6, 0.8];
        let hp = jump_pair(&hm, &n, &t).unwrap();
        assert!((hp.trace() - 0.85).abs() < 1e-14);
        let r = jump_conditions(&hm, &hp, &n, &p).unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
        let off = SquareMatrix::scaled_identity(3, 0.1);
        assert!(jump_pair(&off, &n, &t).is_err());
    }

    #[test]
    fn segment_interior_fails_rank_one_convexity() {
        let p = MaterialParams::bi_quadratic(2, 1.0, 1.0, 1.0, 0.1).unwrap();
        let t = common_tangent(&p).unwrap();
        let th1 = t.binodal().unwrap().theta1;
        let hm = SquareMatrix::from_row_slice(2, &[th1, 0.3, -0.1, 0.0]).unwrap();
        let n = [0.8, -0.6];
        let hp = jump_pair(&hm, &n, &t).unwrap();
        let mid = (hm + hp) * 0.5;
        assert!(!weierstrass_test(&mid, &p, 8, 1).unwrap());
        assert!(weierstrass_test(&hm, &p, 8, 1).unwrap());
    }
}
