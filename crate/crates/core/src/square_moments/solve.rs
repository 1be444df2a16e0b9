use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::curve::{CurveParam, CORNER};
use super::moments::{moment_system, moment_target, MomentSystem};
use super::slope_m;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{graded_rule, CompensatedSum};

/// Weight applied to `r_k` in the least-squares objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    /// `(2k+1) r_k`, which puts every target at the same scale `(ω+1)/4`.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub starts: usize,
    pub max_iterations: usize,
    pub weighting: Weighting,
    /// Weight of the admissibility penalties `|t| < a(t) ≤ τ`.
    pub penalty: f64,
    /// Exponent `p` of the `(t − τ)^p` factor in the correction.
    pub corner_order: u32,
    /// Half width of the uniform perturbations used for starts after the
    /// first.
    pub start_spread: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            starts: 8,
            max_iterations: 300,
            weighting: Weighting::Linear,
            penalty: 10.0,
            corner_order: 2,
            start_spread: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub index: usize,
    pub iterations: usize,
    /// Weighted objective `Σ (w_k r_k)²` plus penalties at the end point.
    pub objective: f64,
    /// `max |r_k|` from the adaptive quadrature, `NaN` if the start failed.
    pub max_residual: f64,
    pub admissible: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedFit {
    pub curve: CurveParam,
    pub system: MomentSystem,
    pub best_start: usize,
    pub starts: Vec<StartOutcome>,
}

impl TruncatedFit {
    /// `max_{k<K} |r_k|` of the returned curve.
    pub fn floor(&self) -> f64 {
        self.system.max_abs()
    }
}

pub fn solve_truncated(
    omega: f64,
    order: usize,
    n_coeffs: usize,
    pin_slope: bool,
    seed: u64,
) -> Result<TruncatedFit> {
    solve_truncated_with(
        omega,
        order,
        n_coeffs,
        pin_slope,
        seed,
        &SolveOptions::default(),
    )
}

/// Fixed quadrature with the parameter gradient of `a` cached at each node;
/// `a` is affine in `(m, c)` so the cache never goes stale.
struct Problem {
    omega: f64,
    order: usize,
    pin_slope: bool,
    m_pinned: f64,
    weighting: Weighting,
    penalty: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    node_grads: Vec<Vec<f64>>,
    checks: Vec<f64>,
    check_grads: Vec<Vec<f64>>,
}

impl Problem {
    fn n_params(&self) -> usize {
        self.node_grads[0].len() - usize::from(self.pin_slope)
    }

    /// Full `(m, c)` vector from the free parameters.
    fn full(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(theta.len() + 1);
        if self.pin_slope {
            out.push(self.m_pinned);
        }
        out.extend_from_slice(theta);
        out
    }

    fn a(grad: &[f64], full: &[f64]) -> f64 {
        CORNER + grad.iter().zip(full).map(|(g, p)| g * p).sum::<f64>()
    }

    fn weight(&self, k: usize) -> f64 {
        match self.weighting {
            Weighting::Uniform => 1.0,
            Weighting::Linear => (2 * k + 1) as f64,
        }
    }

    /// Residual vector and Jacobian (row major, `n_params` columns).
    fn evaluate(&self, theta: &[f64], want_jac: bool) -> (Vec<f64>, Vec<f64>) {
        let full = self.full(theta);
        let skip = usize::from(self.pin_slope);
        let np = self.n_params();
        let rows = self.order + 2 * self.checks.len();
        let mut res = alloc::vec![0.0; rows];
        let mut jac = if want_jac {
            alloc::vec![0.0; rows * np]
        } else {
            Vec::new()
        };

        let zs: Vec<Complex64> = self
            .nodes
            .iter()
            .zip(&self.node_grads)
            .map(|(&t, g)| Complex64::new(Self::a(g, &full), t))
            .collect();
        // z^{4k} by repeated multiplication with z⁴; |z| ≤ 1 so the relative
        // error grows only linearly in k.
        let z4: Vec<Complex64> = zs.iter().map(|z| (z * z) * (z * z)).collect();
        let mut zn1 = alloc::vec![Complex64::new(1.0, 0.0); zs.len()];
        for k in 0..self.order {
            let n = (4 * k + 1) as i32;
            let wk = self.weight(k);
            let mut acc = CompensatedSum::new();
            let mut dacc = alloc::vec![CompensatedSum::new(); if want_jac { np } else { 0 }];
            if k > 0 {
                for (p, q) in zn1.iter_mut().zip(&z4) {
                    *p *= q;
                }
            }
            for (i, z) in zs.iter().enumerate() {
                let zn1 = zn1[i];
                acc.add(self.weights[i] * (zn1 * z).re);
                if want_jac {
                    let q = self.weights[i] * n as f64 * zn1.re;
                    for (j, d) in dacc.iter_mut().enumerate() {
                        d.add(q * self.node_grads[i][j + skip]);
                    }
                }
            }
            res[k] = wk * (acc.value() - moment_target(self.omega, k));
            for (j, d) in dacc.iter().enumerate() {
                jac[k * np + j] = wk * d.value();
            }
        }
        for (c, (&t, g)) in self.checks.iter().zip(&self.check_grads).enumerate() {
            let a = Self::a(g, &full);
            let above = a - CORNER;
            let below = t + 1e-3 * CORNER - a;
            for (slot, excess, sign) in [(0, above, 1.0), (1, below, -1.0)] {
                let row = self.order + 2 * c + slot;
                if excess > 0.0 {
                    res[row] = self.penalty * excess;
                    if want_jac {
                        for j in 0..np {
                            jac[row * np + j] = sign * self.penalty * g[j + skip];
                        }
                    }
                }
            }
        }
        (res, jac)
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` (row major).
fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Levenberg–Marquardt with Marquardt's diagonal scaling.
fn levenberg_marquardt(
    problem: &Problem,
    mut theta: Vec<f64>,
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    let np = theta.len();
    let (mut res, mut jac) = problem.evaluate(&theta, true);
    let mut cost = norm_sq(&res);
    let mut lambda = 1e-3;
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let rows = res.len();
        let mut jtj = alloc::vec![0.0; np * np];
        let mut jtr = alloc::vec![0.0; np];
        for r in 0..rows {
            let row = &jac[r * np..(r + 1) * np];
            for i in 0..np {
                jtr[i] -= row[i] * res[r];
                for j in 0..=i {
                    jtj[i * np + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..np {
            for j in 0..i {
                jtj[j * np + i] = jtj[i * np + j];
            }
        }
        let diag_floor = (0..np).map(|i| jtj[i * np + i]).fold(0.0, f64::max) * 1e-12 + 1e-300;
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for i in 0..np {
                damped[i * np + i] += lambda * jtj[i * np + i].max(diag_floor);
            }
            let Some(step) = cholesky_solve(&damped, &jtr, np) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
            let (r2, _) = problem.evaluate(&trial, false);
            let c2 = norm_sq(&r2);
            if c2.is_finite() && c2 < cost {
                let small_step = step
                    .iter()
                    .zip(&theta)
                    .all(|(s, t)| s.abs() <= 1e-14 * (t.abs() + 1e-8));
                let small_gain = cost - c2 <= 1e-15 * cost;
                theta = trial;
                let (r, j) = problem.evaluate(&theta, true);
                res = r;
                jac = j;
                cost = c2;
                lambda = (lambda / 3.0).max(1e-12);
                improved = !(small_step || small_gain);
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (theta, cost, iter)
}

/// Least-squares fit of the curve to the first `order` moment equations,
/// `Σ (w_k r_k)²` plus admissibility penalties, by Levenberg–Marquardt from
/// several starts. The first start is the corner line. For eight or more
/// coefficients the second is the zero-padded fit with half as many; the
/// rest perturb the corner line with a ChaCha8 stream seeded by `seed`. The reported residuals are
/// recomputed with adaptive quadrature.
pub fn solve_truncated_with(
    omega: f64,
    order: usize,
    n_coeffs: usize,
    pin_slope: bool,
    seed: u64,
    options: &SolveOptions,
) -> Result<TruncatedFit> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(invalid(alloc::format!("ω = {omega} must lie in (0, 1)")));
    }
    if n_coeffs == 0 || order < n_coeffs {
        return Err(invalid(alloc::format!(
            "need K >= n_coeffs >= 1, got K = {order}, n_coeffs = {n_coeffs}"
        )));
    }
    if options.starts == 0 {
        return Err(invalid("need at least one start"));
    }
    let m0 = slope_m(omega)?;
    let template =
        CurveParam::with_corner_order(omega, m0, alloc::vec![0.0; n_coeffs], options.corner_order)?;
    // Grade toward the corner finely enough for the largest power.
    let finest = 0.02 / (4 * order + 1) as f64;
    let (nodes, weights) = graded_rule(0.0, CORNER, 24, finest);
    let mut buf = Vec::new();
    let mut grads = |ts: &[f64]| -> Vec<Vec<f64>> {
        ts.iter()
            .map(|&t| {
                template.parameter_gradient(t, &mut buf);
                buf.clone()
            })
            .collect()
    };
    let node_grads = grads(&nodes);
    let checks: Vec<f64> = (0..33).map(|i| CORNER * i as f64 / 32.0).collect();
    let check_grads = grads(&checks);
    let problem = Problem {
        omega,
        order,
        pin_slope,
        m_pinned: m0,
        weighting: options.weighting,
        penalty: options.penalty,
        nodes,
        weights,
        node_grads,
        checks,
        check_grads,
    };

    // Large bases stall easily from random starts; the fit with half the
    // coefficients, zero padded, is a much better one.
    let coarse = if n_coeffs >= 8 && options.starts >= 2 {
        solve_truncated_with(omega, order, n_coeffs / 2, pin_slope, seed, options).ok()
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::with_capacity(options.starts);
    let mut best: Option<(f64, usize, CurveParam, MomentSystem)> = None;
    for index in 0..options.starts {
        let mut theta = Vec::with_capacity(n_coeffs + 1);
        let spread = if index == 0 {
            0.0
        } else {
            options.start_spread
        };
        if !pin_slope {
            theta.push(m0 + spread * rng.random_range(-1.0..1.0));
        }
        for j in 0..n_coeffs {
            theta.push(spread * rng.random_range(-1.0..1.0) / (j + 1) as f64);
        }
        if let (1, Some(fit)) = (index, &coarse) {
            theta.clear();
            if !pin_slope {
                theta.push(fit.curve.m);
            }
            theta.extend_from_slice(&fit.curve.coeffs);
            theta.resize(n_coeffs + usize::from(!pin_slope), 0.0);
        }
        let (theta, objective, iterations) =
            levenberg_marquardt(&problem, theta, options.max_iterations);
        let full = problem.full(&theta);
        let outcome =
            CurveParam::with_corner_order(omega, full[0], full[1..].to_vec(), options.corner_order)
                .and_then(|curve| moment_system(&curve, order).map(|s| (curve, s)));
        match outcome {
            Ok((curve, system)) => {
                let admissible = curve.is_admissible();
                let max_residual = system.max_abs();
                outcomes.push(StartOutcome {
                    index,
                    iterations,
                    objective,
                    max_residual,
                    admissible,
                    note: None,
                });
                let better = best.as_ref().is_none_or(|b| max_residual < b.0);
                if admissible && max_residual.is_finite() && better {
                    best = Some((max_residual, index, curve, system));
                }
            }
            Err(e) => outcomes.push(StartOutcome {
                index,
                iterations,
                objective,
                max_residual: f64::NAN,
                admissible: false,
                note: Some(alloc::format!("{e}")),
            }),
        }
    }
    match best {
        Some((_, best_start, curve, system)) => Ok(TruncatedFit {
            curve,
            system,
            best_start,
            starts: outcomes,
        }),
        None => {
            let trace: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    alloc::format!(
                        "start {}: {} iterations, objective {:e}, admissible {}{}",
                        o.index,
                        o.iterations,
                        o.objective,
                        o.admissible,
                        o.note
                            .as_deref()
                            .map(|n| alloc::format!(", {n}"))
                            .unwrap_or_default()
                    )
                })
                .collect();
            Err(Error::Solver(alloc::format!(
                "no start produced an admissible curve: {}",
                trace.join("; ")
            )))
        }
    }
}
