use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use super::potential::{BiQuadratic, Potential};
use super::MaterialParams;
use crate::error::{Error, Result};

/// Common tangent of the shifted potential `Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexTangentData {
    pub theta1: f64,
    pub theta2: f64,
    /// Slope `Φ'(θ1) = Φ'(θ2)`.
    pub p0: f64,
    /// Value of the tangent line at `θ = 0`.
    pub intercept: f64,
    /// A tangency point lies within tolerance of the parabola crossover.
    pub near_kink: bool,
}

impl ConvexTangentData {
    pub fn line(&self, theta: f64) -> f64 {
        self.p0 * theta + self.intercept
    }

    pub fn width(&self) -> f64 {
        self.theta2 - self.theta1
    }

    /// `⟦θ⟧ = θ1 − θ2`.
    pub fn jump(&self) -> f64 {
        self.theta1 - self.theta2
    }

    /// Open binodal test, `θ1 < θ < θ2`.
    pub fn contains(&self, theta: f64) -> bool {
        theta > self.theta1 && theta < self.theta2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommonTangent {
    Binodal(ConvexTangentData),
    /// `Φ` is convex; the envelope is `Φ` itself.
    NoBinodal,
}

impl CommonTangent {
    pub fn binodal(&self) -> Option<&ConvexTangentData> {
        match self {
            CommonTangent::Binodal(t) => Some(t),
            CommonTangent::NoBinodal => None,
        }
    }

    /// The tangent data, or a precondition error when `Φ` is convex.
    pub fn require(&self) -> Result<&ConvexTangentData> {
        self.binodal()
            .ok_or_else(|| crate::error::precondition("potential has no binodal"))
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.binodal().is_some_and(|t| t.contains(theta))
    }
}

/// Common tangent for the material: closed form for the bi-quadratic
/// potential, numeric search for tabulated ones.
pub fn common_tangent(params: &MaterialParams) -> Result<CommonTangent> {
    match params.potential() {
        Potential::BiQuadratic(b) => Ok(CommonTangent::Binodal(analytic_common_tangent(
            params.d(),
            params.mu(),
            b,
        ))),
        Potential::Tabulated(_) => numeric_common_tangent(params),
    }
}

/// Closed-form tangency points of the shifted bi-quadratic potential.
pub fn analytic_common_tangent(d: usize, mu: f64, b: &BiQuadratic) -> ConvexTangentData {
    let df = d as f64;
    let k = b.kappa0;
    let c = (df - 1.0) * mu / df;
    let ratio = (df - 1.0) * mu * b.theta_p / (df * k + (df - 1.0) * mu);
    let base = b.f0 / (k * b.theta_p);
    let theta1 = 0.5 * (base + ratio);
    let theta2 = b.theta_p + 0.5 * (base - ratio);
    let stiff = k + c;
    let p0 = 2.0 * stiff * theta1;
    let intercept = -stiff * theta1 * theta1;
    let kink = b.crossover();
    let tol = crate::tolerance::tolerances().algebraic * (1.0 + kink.abs());
    ConvexTangentData {
        theta1,
        theta2,
        p0,
        intercept,
        near_kink: (theta1 - kink).abs() < tol || (theta2 - kink).abs() < tol,
    }
}

const SAMPLES: usize = 4097;
const MAX_SAMPLES: usize = 65537;

/// Numeric common-tangent search on `Φ`.
///
/// Seeds come from the widest edge of the lower convex hull of a sampled
/// `Φ`; the tangency system is then solved by damped Newton. If Newton
/// stalls or the resulting line is not a supporting line, bisection on the
/// tangent slope takes over.
pub fn numeric_common_tangent(params: &MaterialParams) -> Result<CommonTangent> {
    let phi = |x: f64| params.phi(x);
    let (lo, hi) = search_range(params);
    let scale = params.potential().scale();

    let Some((a, b)) = hull_seeds(&phi, lo, hi, scale)? else {
        return Ok(CommonTangent::NoBinodal);
    };
    let tangent = match newton_tangent(&phi, a, b, scale) {
        Some(t) if supports(&phi, &t, lo, hi, scale)? => t,
        _ => slope_bisection(&phi, lo, hi, 0.5 * (a + b), scale)?,
    };
    let near_kink = match params.potential() {
        Potential::BiQuadratic(bq) => {
            let k = bq.crossover();
            let tol = crate::tolerance::tolerances().algebraic * (1.0 + k.abs());
            (tangent.theta1 - k).abs() < tol || (tangent.theta2 - k).abs() < tol
        }
        Potential::Tabulated(_) => false,
    };
    Ok(CommonTangent::Binodal(ConvexTangentData {
        near_kink,
        ..tangent
    }))
}

fn search_range(params: &MaterialParams) -> (f64, f64) {
    match params.potential() {
        Potential::BiQuadratic(b) => {
            // Both wells and a margin of 2θp around the parabola crossover.
            let k = b.crossover();
            let lo = (k - 2.0 * b.theta_p).min(0.0) - 1.0;
            let hi = (k + 2.0 * b.theta_p).max(b.theta_p) + 1.0;
            (lo, hi)
        }
        Potential::Tabulated(t) => t.range(),
    }
}

fn sample<F>(phi: &F, lo: f64, hi: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<super::Jet>,
{
    let h = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
        .collect();
    let ys = xs
        .iter()
        .map(|&x| phi(x).map(|j| j.value))
        .collect::<Result<Vec<_>>>()?;
    Ok((xs, ys))
}

/// Lower convex hull (monotone chain) of points sorted by abscissa.
fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Seeds `(a, b)` bracketing the non-convex region, or `None` when `Φ` is
/// convex on the search interval.
fn hull_seeds<F>(phi: &F, lo: f64, hi: f64, scale: f64) -> Result<Option<(f64, f64)>>
where
    F: Fn(f64) -> Result<super::Jet>,
{
    let (mut a, mut b) = (lo, hi);
    let mut samples = SAMPLES;
    for _ in 0..80 {
        let (xs, ys) = sample(phi, a, b, samples)?;
        let vscale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-300);
        let hull = lower_hull(&xs, &ys);
        let mut best: Option<(f64, usize, usize)> = None;
        for w in hull.windows(2) {
            let (i, j) = (w[0], w[1]);
            if j <= i + 1 {
                continue;
            }
            let slope = (ys[j] - ys[i]) / (xs[j] - xs[i]);
            let gap = (i + 1..j)
                .map(|k| ys[k] - ys[i] - slope * (xs[k] - xs[i]))
                .fold(0.0f64, f64::max);
            if gap > 1e-13 * vscale && best.is_none_or(|(g, _, _)| gap > g) {
                best = Some((gap, i, j));
            }
        }
        if let Some((_, i, j)) = best {
            return Ok(Some((xs[i], xs[j])));
        }
        // No resolved gap: look for concavity below the sampling scale.
        let h = xs[1] - xs[0];
        let (k, second) = (1..xs.len() - 1)
            .map(|k| (k, (ys[k + 1] - 2.0 * ys[k] + ys[k - 1]) / (h * h)))
            .fold(
                (0, f64::INFINITY),
                |acc, v| if v.1 < acc.1 { v } else { acc },
            );
        let curvature_floor = 1e-9 * vscale / (scale * scale);
        if !(second < -curvature_floor) || h < 1e-13 * scale {
            // Nothing seen at this resolution: refine before declaring Φ convex.
            if samples < MAX_SAMPLES {
                samples = 2 * samples - 1;
                continue;
            }
            return Ok(None);
        }
        a = xs[k.saturating_sub(4)];
        b = xs[(k + 4).min(xs.len() - 1)];
        samples = SAMPLES;
    }
    Ok(None)
}

fn residual<F>(phi: &F, a: f64, b: f64) -> Option<([f64; 2], [super::Jet; 2])>
where
    F: Fn(f64) -> Result<super::Jet>,
{
    let ja = phi(a).ok()?;
    let jb = phi(b).ok()?;
    let f1 = ja.slope - jb.slope;
    let f2 = jb.value - ja.value - ja.slope * (b - a);
    Some(([f1, f2], [ja, jb]))
}

fn newton_tangent<F>(phi: &F, a0: f64, b0: f64, scale: f64) -> Option<ConvexTangentData>
where
    F: Fn(f64) -> Result<super::Jet>,
{
    let (mut a, mut b) = (a0, b0);
    let (mut r, mut jets) = residual(phi, a, b)?;
    let size = |r: &[f64; 2], a: f64, b: f64| {
        let w = (b - a).abs().max(1e-300);
        (r[0] * w).abs() + r[1].abs()
    };
    for _ in 0..100 {
        let [ja, jb] = jets;
        // Jacobian of (F1, F2) in (a, b).
        let j11 = ja.curvature;
        let j12 = -jb.curvature;
        let j21 = -ja.curvature * (b - a);
        let j22 = jb.slope - ja.slope;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let da = (r[0] * j22 - j12 * r[1]) / det;
        let db = (j11 * r[1] - j21 * r[0]) / det;
        let current = size(&r, a, b);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (na, nb) = (a - step * da, b - step * db);
            if nb > na {
                if let Some((nr, nj)) = residual(phi, na, nb) {
                    if size(&nr, na, nb) < current || current == 0.0 {
                        a = na;
                        b = nb;
                        r = nr;
                        jets = nj;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let moved = step * (da.abs() + db.abs());
        if !accepted || moved <= 1e-15 * scale {
            break;
        }
    }
    let [ja, jb] = jets;
    let slope_scale = ja.slope.abs().max(jb.slope.abs()).max(1e-300);
    let value_scale = ja.value.abs().max(jb.value.abs()).max(1e-300);
    if r[0].abs() > 1e-11 * slope_scale.max(1.0) || r[1].abs() > 1e-11 * value_scale.max(1.0) {
        return None;
    }
    let p0 = 0.5 * (ja.slope + jb.slope);
    Some(ConvexTangentData {
        theta1: a,
        theta2: b,
        p0,
        intercept: 0.5 * ((ja.value - p0 * a) + (jb.value - p0 * b)),
        near_kink: false,
    })
}

/// The candidate line lies below `Φ` on a sampled search interval.
fn supports<F>(phi: &F, t: &ConvexTangentData, lo: f64, hi: f64, scale: f64) -> Result<bool>
where
    F: Fn(f64) -> Result<super::Jet>,
{
    let (xs, ys) = sample(phi, lo, hi, SAMPLES)?;
    let vscale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let _ = scale;
    Ok(xs
        .iter()
        .zip(&ys)
        .all(|(&x, &y)| y - t.line(x) >= -1e-9 * vscale))
}

/// Minimum of `Φ(θ) − pθ` on `[lo, hi]`: dense sampling then golden section.
fn tilted_min<F>(phi: &F, p: f64, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<super::Jet>,
{
    const N: usize = 1025;
    let g = |x: f64| phi(x).map(|j| j.value - p * x);
    let h = (hi - lo) / (N - 1) as f64;
    let mut best = (lo, g(lo)?);
    for i in 1..N {
        let x = lo + h * i as f64;
        let v = g(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    for _ in 0..80 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let v = g(x)?;
    Ok(if v < best.1 { (x, v) } else { best })
}

/// Bisection on the slope `p` of the supporting line: the tilted minima on
/// either side of `split` coincide exactly at the common tangent.
pub(crate) fn slope_bisection<F>(
    phi: &F,
    lo: f64,
    hi: f64,
    split: f64,
    scale: f64,
) -> Result<ConvexTangentData>
where
    F: Fn(f64) -> Result<super::Jet>,
{
    let (xs, _) = sample(phi, lo, hi, 257)?;
    let slopes = xs
        .iter()
        .map(|&x| phi(x).map(|j| j.slope))
        .collect::<Result<Vec<_>>>()?;
    let mut p_lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut p_hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = |p: f64| -> Result<(f64, f64, f64)> {
        let (xl, vl) = tilted_min(phi, p, lo, split)?;
        let (xr, vr) = tilted_min(phi, p, split, hi)?;
        Ok((vl - vr, xl, xr))
    };
    let mut last = gap(0.5 * (p_lo + p_hi))?;
    for _ in 0..200 {
        let p = 0.5 * (p_lo + p_hi);
        last = gap(p)?;
        if last.0 < 0.0 {
            p_lo = p;
        } else {
            p_hi = p;
        }
        if p_hi - p_lo <= 1e-15 * p_hi.abs().max(1.0) {
            break;
        }
    }
    let (_, theta1, theta2) = last;
    if !(theta2 > theta1) {
        return Err(Error::NoConvergence {
            solver: "common-tangent slope bisection",
            iterations: 200,
            residual: p_hi - p_lo,
        });
    }
    // Polish with Newton when the bracket allows it.
    if let Some(t) = newton_tangent(phi, theta1, theta2, scale) {
        if (t.theta1 - theta1).abs() < 1e-3 * scale && (t.theta2 - theta2).abs() < 1e-3 * scale {
            return Ok(t);
        }
    }
    let (j1, j2) = (phi(theta1)?, phi(theta2)?);
    let p0 = (j2.value - j1.value) / (theta2 - theta1);
    Ok(ConvexTangentData {
        theta1,
        theta2,
        p0,
        intercept: j1.value - p0 * theta1,
        near_kink: false,
    })
}
