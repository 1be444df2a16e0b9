//! Dense `d×d` matrices for the small dimensions of continuum mechanics.
//!
//! Storage is row-major in a fixed buffer, so matrices are `Copy` and never
//! allocate. Only `1 ≤ d ≤ MAX_DIM` is supported.

use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;

use crate::error::{invalid, Result};

pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    entries: [f64; MAX_DIM * MAX_DIM],
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.dim {
            list.entry(&&self.entries[i * self.dim..(i + 1) * self.dim]);
        }
        list.finish()
    }
}

impl SquareMatrix {
    /// Zero matrix. Panics when `dim` is outside `1..=MAX_DIM`.
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "matrix dimension {dim} not in 1..={MAX_DIM}"
        );
        SquareMatrix {
            dim,
            entries: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        Self::identity(dim) * s
    }

    /// Builds a matrix from `dim*dim` row-major entries.
    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(invalid(alloc::format!(
                "matrix dimension {dim} not in 1..={MAX_DIM}"
            )));
        }
        if data.len() != dim * dim {
            return Err(invalid(alloc::format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let mut m = Self::zeros(dim);
        m.entries[..dim * dim].copy_from_slice(data);
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Dyadic product `a ⊗ b`, i.e. entries `a_i b_j`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of unequal lengths");
        Self::from_fn(a.len(), |i, j| a[i] * b[j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.entries[i * self.dim + j] = v;
    }

    /// Row-major view of the `dim*dim` entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.entries[..self.dim * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    /// Symmetric part `(H + Hᵗ)/2`.
    pub fn sym(&self) -> Self {
        Self::from_fn(self.dim, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    /// Skew part `(H − Hᵗ)/2`.
    pub fn skew(&self) -> Self {
        Self::from_fn(self.dim, |i, j| 0.5 * (self.get(i, j) - self.get(j, i)))
    }

    /// Trace-free part `H − (Tr H / d) I`.
    pub fn deviator(&self) -> Self {
        let mean = self.trace() / self.dim as f64;
        let mut m = *self;
        for i in 0..self.dim {
            m.set(i, i, m.get(i, i) - mean);
        }
        m
    }

    /// Frobenius inner product `⟨A, B⟩ = Σ A_ij B_ij`.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self::from_fn(self.dim, |i, j| {
            (0..self.dim)
                .map(|k| self.get(i, k) * other.get(k, j))
                .sum()
        })
    }

    /// `H v` written into `out`.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| self.get(i, j) * v[j]).sum();
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        self.mul_vec_into(v, &mut out[..self.dim]);
        out
    }

    /// `Hᵗ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for j in 0..self.dim {
            out[j] = (0..self.dim).map(|i| self.get(i, j) * v[i]).sum();
        }
        out
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.dim;
        let mut a = *self;
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a.get(r, col).abs().total_cmp(&a.get(s, col).abs()))
                .unwrap();
            if a.get(pivot, col) == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(pivot, j));
                    a.set(pivot, j, tmp);
                }
                det = -det;
            }
            let p = a.get(col, col);
            det *= p;
            for r in col + 1..n {
                let factor = a.get(r, col) / p;
                for j in col..n {
                    a.set(r, j, a.get(r, j) - factor * a.get(col, j));
                }
            }
        }
        det
    }

    /// Eigenvalues of the symmetric part, ascending (cyclic Jacobi).
    pub fn sym_eigenvalues(&self) -> [f64; MAX_DIM] {
        let n = self.dim;
        let mut a = self.sym();
        for _sweep in 0..64 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a.get(i, j) * a.get(i, j))
                .sum();
            if off <= 1e-30 * a.norm_sq().max(f64::MIN_POSITIVE) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut ev = [f64::INFINITY; MAX_DIM];
        for (i, e) in ev.iter_mut().take(n).enumerate() {
            *e = a.get(i, i);
        }
        ev[..n].sort_by(f64::total_cmp);
        ev
    }

    pub fn min_sym_eigenvalue(&self) -> f64 {
        self.sym_eigenvalues()[0]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }
}

impl Add for SquareMatrix {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for SquareMatrix {
    fn add_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.entries.iter_mut().zip(rhs.entries.iter()) {
            *a += b;
        }
    }
}

impl Sub for SquareMatrix {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for SquareMatrix {
    fn sub_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.entries.iter_mut().zip(rhs.entries.iter()) {
            *a -= b;
        }
    }
}

impl Mul<f64> for SquareMatrix {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for a in self.entries.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Neg for SquareMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit vector along `a`, or `None` for the zero vector.
pub fn normalized(a: &[f64]) -> Option<[f64; MAX_DIM]> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    let mut out = [0.0; MAX_DIM];
    for (o, x) in out.iter_mut().zip(a) {
        *o = x / n;
    }
    Some(out)
}
