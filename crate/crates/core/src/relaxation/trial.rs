use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::matrix::{SquareMatrix, MAX_DIM};

/// One Fourier mode `c cos(2π k·x) + s sin(2π k·x)` of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMode {
    pub wave: Vec<i64>,
    pub cos_amp: Vec<f64>,
    pub sin_amp: Vec<f64>,
}

/// Periodic vector field on the unit cell given by a finite Fourier sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigonometricField {
    d: usize,
    modes: Vec<TrigMode>,
}

impl TrigonometricField {
    pub fn new(d: usize, modes: Vec<TrigMode>) -> Result<Self> {
        for m in &modes {
            if m.wave.len() != d || m.cos_amp.len() != d || m.sin_amp.len() != d {
                return Err(invalid("trigonometric mode has wrong dimension"));
            }
            if m.cos_amp.iter().chain(&m.sin_amp).any(|a| !a.is_finite()) {
                return Err(invalid("trigonometric amplitudes must be finite"));
            }
        }
        Ok(TrigonometricField { d, modes })
    }

    /// Build from real wave vectors; anything off the integer lattice would
    /// not be periodic on the unit cell and is rejected.
    pub fn from_real_waves(d: usize, modes: &[(Vec<f64>, Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let mut out = Vec::with_capacity(modes.len());
        for (k, c, s) in modes {
            let mut wave = Vec::with_capacity(k.len());
            for &x in k {
                let r = x.round();
                if (x - r).abs() > 1e-12 || !x.is_finite() {
                    return Err(invalid(alloc::format!(
                        "wave vector component {x} is not an integer: field is not periodic"
                    )));
                }
                wave.push(r as i64);
            }
            out.push(TrigMode {
                wave,
                cos_amp: c.clone(),
                sin_amp: s.clone(),
            });
        }
        Self::new(d, out)
    }

    /// `n_modes` modes with wave components in `-max_wave..=max_wave` (not
    /// all zero) and amplitudes uniform in `[-amplitude, amplitude]`.
    pub fn random<R: Rng>(
        d: usize,
        n_modes: usize,
        max_wave: i64,
        amplitude: f64,
        rng: &mut R,
    ) -> Self {
        let mut modes = Vec::with_capacity(n_modes);
        while modes.len() < n_modes {
            let wave: Vec<i64> = (0..d)
                .map(|_| rng.random_range(-max_wave..=max_wave))
                .collect();
            if wave.iter().all(|&k| k == 0) {
                continue;
            }
            let cos_amp = (0..d)
                .map(|_| rng.random_range(-amplitude..=amplitude))
                .collect();
            let sin_amp = (0..d)
                .map(|_| rng.random_range(-amplitude..=amplitude))
                .collect();
            modes.push(TrigMode {
                wave,
                cos_amp,
                sin_amp,
            });
        }
        TrigonometricField { d, modes }
    }

    pub fn modes(&self) -> &[TrigMode] {
        &self.modes
    }

    pub fn max_wave(&self) -> i64 {
        self.modes
            .iter()
            .flat_map(|m| m.wave.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn value(&self, x: &[f64]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for m in &self.modes {
            let arg = 2.0 * PI * phase(&m.wave, x);
            let (s, c) = arg.sin_cos();
            for i in 0..self.d {
                out[i] += m.cos_amp[i] * c + m.sin_amp[i] * s;
            }
        }
        out
    }

    /// `∂φ_i/∂x_j`.
    pub fn gradient(&self, x: &[f64]) -> SquareMatrix {
        let mut g = SquareMatrix::zeros(self.d);
        for m in &self.modes {
            let arg = 2.0 * PI * phase(&m.wave, x);
            let (s, c) = arg.sin_cos();
            for i in 0..self.d {
                let amp = 2.0 * PI * (m.sin_amp[i] * c - m.cos_amp[i] * s);
                for j in 0..self.d {
                    g.set(i, j, g.get(i, j) + amp * m.wave[j] as f64);
                }
            }
        }
        g
    }
}

/// `k·x` reduced modulo 1 to keep the trigonometric argument small.
fn phase(k: &[i64], x: &[f64]) -> f64 {
    let mut p = 0.0;
    for (ki, xi) in k.iter().zip(x) {
        p += *ki as f64 * xi;
    }
    p - p.floor()
}

/// Laminate with its two interfaces mollified over a layer of width `w`.
///
/// The gradient is `J (χ(x_axis) − ω) e⊗e` where `χ` is a C^∞ periodic
/// indicator of phase 1 with mean exactly `ω` and `e` is a coordinate axis,
/// so the field is the gradient of a periodic displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedLaminate {
    pub d: usize,
    pub axis: usize,
    pub omega: f64,
    /// `θ1 − θ2`.
    pub jump: f64,
    pub width: f64,
}

impl SmoothedLaminate {
    pub fn new(d: usize, axis: usize, omega: f64, jump: f64, width: f64) -> Result<Self> {
        if axis >= d {
            return Err(invalid("lamination axis out of range"));
        }
        if !(omega > 0.0 && omega < 1.0) {
            return Err(invalid("smoothed laminate needs ω in (0, 1)"));
        }
        if !(width > 0.0 && width < omega.min(1.0 - omega)) {
            return Err(invalid("transition width must be below min(ω, 1 − ω)"));
        }
        Ok(SmoothedLaminate {
            d,
            axis,
            omega,
            jump,
            width,
        })
    }

    /// Smooth periodic indicator of `[0, ω)`.
    pub fn indicator(&self, s: f64) -> f64 {
        let w = self.width;
        let s = s - s.floor();
        // Shift so the rising transition is centred at 0 and the falling one at ω.
        let s = if s >= 1.0 - 0.5 * w { s - 1.0 } else { s };
        smooth_step((s + 0.5 * w) / w) - smooth_step((s - self.omega + 0.5 * w) / w)
    }

    pub fn gradient(&self, x: &[f64]) -> SquareMatrix {
        let mut g = SquareMatrix::zeros(self.d);
        let a = self.axis;
        g.set(a, a, self.jump * (self.indicator(x[a]) - self.omega));
        g
    }
}

/// C^∞ step from 0 (t ≤ 0) to 1 (t ≥ 1) with `S(t) + S(1 − t) = 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Periodic trial field `φ` on the unit cell.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialField {
    Trigonometric(TrigonometricField),
    SmoothedLaminate(SmoothedLaminate),
}

impl TrialField {
    pub fn zero(d: usize) -> Self {
        TrialField::Trigonometric(TrigonometricField {
            d,
            modes: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            TrialField::Trigonometric(t) => t.d,
            TrialField::SmoothedLaminate(s) => s.d,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> SquareMatrix {
        match self {
            TrialField::Trigonometric(t) => t.gradient(x),
            TrialField::SmoothedLaminate(s) => s.gradient(x),
        }
    }

    /// Coarsest midpoint grid that resolves the field.
    pub fn min_resolution(&self) -> usize {
        match self {
            TrialField::Trigonometric(t) => (2 * t.max_wave() + 1).max(2) as usize,
            TrialField::SmoothedLaminate(s) => (8.0 / s.width).ceil() as usize,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_integer_waves_are_rejected() {
        let bad = TrigonometricField::from_real_waves(
            2,
            &[(
                alloc::vec![0.5, 1.0],
                alloc::vec![1.0, 0.0],
                alloc::vec![0.0, 0.0],
            )],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = TrigonometricField::from_real_waves(
            2,
            &[(
                alloc::vec![1.0, -2.0],
                alloc::vec![0.3, 0.1],
                alloc::vec![-0.2, 0.4],
            )],
        )
        .unwrap();
        let x = [0.31, 0.77];
        let g = f.gradient(&x);
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (vp, vm) = (f.value(&xp), f.value(&xm));
            for i in 0..2 {
                assert!(((vp[i] - vm[i]) / (2.0 * h) - g.get(i, j)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn smoothed_indicator_has_mean_omega() {
        let s = SmoothedLaminate::new(2, 0, 0.3, -0.6, 1.0 / 32.0).unwrap();
        let n = 4096;
        let mean: f64 = (0..n)
            .map(|i| s.indicator((i as f64 + 0.5) / n as f64))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.3).abs() < 1e-12);
        assert_eq!(s.indicator(0.15), 1.0);
        assert_eq!(s.indicator(0.6), 0.0);
    }
}
