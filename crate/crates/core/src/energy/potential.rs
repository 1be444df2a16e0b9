use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// Value and first two derivatives of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
    /// The point sits on a derivative discontinuity; the derivatives are
    /// one-sided (branch of lower energy, ties to the low-θ branch).
    pub kink: bool,
}

/// `f(θ) = min{κ0 θ², κ0 (θ − θp)² + f0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiQuadratic {
    pub kappa0: f64,
    pub theta_p: f64,
    pub f0: f64,
}

impl BiQuadratic {
    pub fn new(kappa0: f64, theta_p: f64, f0: f64) -> Result<Self> {
        if !(kappa0 > 0.0 && kappa0.is_finite()) {
            return Err(invalid("kappa0 must be positive"));
        }
        if !(theta_p > 0.0 && theta_p.is_finite()) {
            return Err(invalid("theta_p must be positive"));
        }
        if !(f0 >= 0.0 && f0.is_finite()) {
            return Err(invalid("f0 must be non-negative"));
        }
        Ok(BiQuadratic {
            kappa0,
            theta_p,
            f0,
        })
    }

    /// Dilatation where the two parabolas cross.
    pub fn crossover(&self) -> f64 {
        0.5 * self.theta_p + self.f0 / (2.0 * self.kappa0 * self.theta_p)
    }

    pub fn jet(&self, theta: f64) -> Jet {
        let low = self.kappa0 * theta * theta;
        let shifted = theta - self.theta_p;
        let high = self.kappa0 * shifted * shifted + self.f0;
        let kink = low == high;
        if low <= high {
            Jet {
                value: low,
                slope: 2.0 * self.kappa0 * theta,
                curvature: 2.0 * self.kappa0,
                kink,
            }
        } else {
            Jet {
                value: high,
                slope: 2.0 * self.kappa0 * shifted,
                curvature: 2.0 * self.kappa0,
                kink,
            }
        }
    }
}

/// Double-well potential tabulated on a strictly increasing grid and
/// interpolated by a monotone (shape-preserving) cubic Hermite spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    thetas: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Tabulated {
    pub fn new(thetas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if thetas.len() < 3 {
            return Err(invalid("tabulated potential needs at least 3 points"));
        }
        if thetas.len() != values.len() {
            return Err(invalid("tabulated grid and values differ in length"));
        }
        if thetas.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(invalid("tabulated potential has non-finite entries"));
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tabulated grid must be strictly increasing"));
        }
        let slopes = pchip_slopes(&thetas, &values);
        Ok(Tabulated {
            thetas,
            values,
            slopes,
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.thetas[0], *self.thetas.last().unwrap())
    }

    pub fn jet(&self, theta: f64) -> Result<Jet> {
        let (lo, hi) = self.range();
        if !(theta >= lo && theta <= hi) {
            return Err(Error::OutOfRange { theta, lo, hi });
        }
        let k = match self.thetas.binary_search_by(|x| x.total_cmp(&theta)) {
            Ok(i) => i.min(self.thetas.len() - 2),
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.thetas[k], self.thetas[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
        let h = x1 - x0;
        let t = (theta - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        let slope = (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1;
        let s00 = 12.0 * t - 6.0;
        let s10 = 6.0 * t - 4.0;
        let s01 = -12.0 * t + 6.0;
        let s11 = 6.0 * t - 2.0;
        let curvature = (s00 * y0 + s01 * y1) / (h * h) + (s10 * m0 + s11 * m1) / h;
        Ok(Jet {
            value,
            slope,
            curvature,
            kink: false,
        })
    }
}

/// Fritsch–Butland slopes with shape-preserving one-sided end conditions.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = alloc::vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// The dilatational double-well potential `f(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    BiQuadratic(BiQuadratic),
    Tabulated(Tabulated),
}

impl Potential {
    pub fn jet(&self, theta: f64) -> Result<Jet> {
        match self {
            Potential::BiQuadratic(b) => Ok(b.jet(theta)),
            Potential::Tabulated(t) => t.jet(theta),
        }
    }

    pub fn value(&self, theta: f64) -> Result<f64> {
        self.jet(theta).map(|j| j.value)
    }

    /// Interval on which the potential is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Potential::BiQuadratic(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Potential::Tabulated(t) => t.range(),
        }
    }

    /// Natural dilatation scale, used to size searches and probes.
    pub fn scale(&self) -> f64 {
        match self {
            Potential::BiQuadratic(b) => b.theta_p.abs() + b.f0 / (b.kappa0 * b.theta_p) + 1.0,
            Potential::Tabulated(t) => {
                let (lo, hi) = t.range();
                (hi - lo).max(lo.abs().max(hi.abs()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bi_quadratic_values() {
        let b = BiQuadratic::new(1.0, 1.0, 0.1).unwrap();
        assert_eq!(b.jet(0.0).value, 0.0);
        assert!((b.jet(1.0).value - 0.1).abs() < 1e-15);
        assert!((b.jet(0.5).value - 0.25).abs() < 1e-15);
        assert!((b.crossover() - 0.55).abs() < 1e-15);
        let flat = BiQuadratic::new(1.0, 1.0, 0.0).unwrap();
        let at = flat.jet(0.5);
        assert!(at.kink);
        // tie goes to the low-θ branch
        assert_eq!(at.slope, 1.0);
    }

    #[test]
    fn pchip_reproduces_data_and_is_c1() {
        let xs: Vec<f64> = (0..21).map(|i| -0.5 + 0.1 * i as f64).collect();
        let b = BiQuadratic::new(1.0, 1.0, 0.1).unwrap();
        let ys: Vec<f64> = xs.iter().map(|&x| b.jet(x).value).collect();
        let t = Tabulated::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((t.jet(*x).unwrap().value - y).abs() < 1e-14);
        }
        let knot = xs[7];
        let left = t.jet(knot - 1e-9).unwrap().slope;
        let right = t.jet(knot + 1e-9).unwrap().slope;
        assert!((left - right).abs() < 1e-6);
    }

    #[test]
    fn tabulated_range_is_enforced() {
        let t = Tabulated::new(alloc::vec![0.0, 1.0, 2.0], alloc::vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(t.jet(2.5), Err(Error::OutOfRange { .. })));
        assert!(Tabulated::new(alloc::vec![0.0, 0.0, 1.0], alloc::vec![0.0; 3]).is_err());
    }
}
