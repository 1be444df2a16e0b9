//! Gauss–Legendre rules and an adaptive panel integrator.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Zero + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Values the adaptive integrator can accumulate.
pub trait Zero: Copy {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Zero for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Zero for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T> CompensatedSum<T>
where
    T: Zero + Add<Output = T> + Sub<Output = T>,
{
    pub fn new() -> Self {
        CompensatedSum {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.magnitude() >= x.magnitude() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T> Default for CompensatedSum<T>
where
    T: Zero + Add<Output = T> + Sub<Output = T>,
{
    fn default() -> Self {
        Self::new()
    }
}

/// Adaptive Gauss–Legendre integration.
///
/// Each panel is integrated with an `order`-point rule on the whole panel and
/// on its two halves; panels whose two estimates disagree by more than the
/// local share of the tolerance are bisected.
#[derive(Debug, Clone)]
pub struct AdaptiveQuadrature {
    rule: GaussLegendre,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub min_width: f64,
}

impl AdaptiveQuadrature {
    pub fn new(order: usize, rel_tol: f64, abs_tol: f64) -> Self {
        AdaptiveQuadrature {
            rule: GaussLegendre::new(order),
            rel_tol,
            abs_tol,
            max_panels: 20_000,
            min_width: 1e-14,
        }
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> Result<T>
    where
        T: Zero + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let whole = self.rule.integrate(a, b, &mut f);
        // Global scale estimate drives the relative tolerance.
        let scale = whole.magnitude().max(self.abs_tol);
        let mut stack: Vec<(f64, f64, T)> = alloc::vec![(a, b, whole)];
        let mut total = CompensatedSum::new();
        let mut panels = 0usize;
        while let Some((lo, hi, coarse)) = stack.pop() {
            panels += 1;
            if panels > self.max_panels {
                return Err(Error::Quadrature(alloc::format!(
                    "panel budget {} exhausted on [{a}, {b}]",
                    self.max_panels
                )));
            }
            let mid = 0.5 * (lo + hi);
            let left = self.rule.integrate(lo, mid, &mut f);
            let right = self.rule.integrate(mid, hi, &mut f);
            let fine = left + right;
            let err = (fine - coarse).magnitude();
            if !err.is_finite() {
                return Err(Error::Quadrature(alloc::format!(
                    "non-finite integrand on [{lo}, {hi}]"
                )));
            }
            let share = (hi - lo) / (b - a);
            let allowed = (self.rel_tol * scale).max(self.abs_tol) * share.max(1e-3);
            if err <= allowed || (hi - lo) < self.min_width * (b - a).abs().max(1.0) {
                total.add(fine);
            } else {
                stack.push((mid, hi, right));
                stack.push((lo, mid, left));
            }
        }
        Ok(total.value())
    }
}

/// Composite rule: `order`-point Gauss–Legendre on panels that shrink
/// geometrically (ratio 1/2) toward `b`, down to width `finest`.
pub fn graded_rule(a: f64, b: f64, order: usize, finest: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(order);
    let mut breaks = alloc::vec![b];
    let mut w = 0.5 * (b - a);
    while w > finest {
        breaks.push(b - w);
        w *= 0.5;
    }
    breaks.push(b - w.max(0.0));
    breaks.push(a);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pair in breaks.windows(2) {
        for (x, wt) in rule.mapped(pair[0], pair[1]) {
            nodes.push(x);
            weights.push(wt);
        }
    }
    (nodes, weights)
}
