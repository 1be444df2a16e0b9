use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twowell_core::certify::*;
use twowell_core::energy::*;
use twowell_core::fields::*;
use twowell_core::SquareMatrix;

fn reference(d: usize) -> (MaterialParams, CommonTangent) {
    let p = MaterialParams::bi_quadratic(d, 1.0, 1.0, 1.0, 0.1).unwrap();
    let t = common_tangent(&p).unwrap();
    (p, t)
}

fn loading(d: usize, tr: f64, shear: f64) -> SquareMatrix {
    let mut h = SquareMatrix::scaled_identity(d, tr / d as f64);
    h.set(0, 1, shear);
    h
}

/// Disk minimizer with phase 1 in the core; `shift` moves `Tr H0` off the
/// value that balances the phase fractions.
fn minimizer(n: usize, omega: f64, shift: f64) -> (SquareMatrix, VectorField) {
    let (_, t) = reference(2);
    let b = *t.binodal().unwrap();
    let grid = Arc::new(GridDomain::unit_disk(n).unwrap());
    let inc = InclusionGeometry::concentric_ball(2, omega, true).unwrap();
    let pot = build_potential(&grid, &inc, &t).unwrap();
    let h0 = loading(2, omega * b.theta1 + (1.0 - omega) * b.theta2 + shift, 0.1);
    (h0, displacement_field(&pot.h, &h0).unwrap())
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> SquareMatrix {
    SquareMatrix::from_fn(d, |_, _| rng.random_range(-1.0..1.0))
}

fn fd_gradient(h: &SquareMatrix, p: &MaterialParams, step: f64) -> SquareMatrix {
    let d = h.dim();
    SquareMatrix::from_fn(d, |i, j| {
        let mut a = *h;
        let mut b = *h;
        a.set(i, j, h.get(i, j) + step);
        b.set(i, j, h.get(i, j) - step);
        (eval_w0(&a, p).unwrap() - eval_w0(&b, p).unwrap()) / (2.0 * step)
    })
}

#[test]
fn piola_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2, 3] {
        let (p, _) = reference(d);
        assert_eq!(piola(&SquareMatrix::zeros(d), &p).unwrap().norm(), 0.0);
        let theta: f64 = 0.7;
        let fprime = p.f(theta).unwrap().slope;
        let dil = piola(&SquareMatrix::scaled_identity(d, theta / d as f64), &p).unwrap();
        assert!((dil - SquareMatrix::scaled_identity(d, fprime)).norm() < 1e-13);

        let kink = p.bi_quadratic_potential().unwrap().crossover();
        let mut checked = 0;
        while checked < 1000 {
            let h = random_matrix(&mut rng, d);
            if (h.trace() - kink).abs() < 1e-3 {
                continue;
            }
            let err = (piola(&h, &p).unwrap() - fd_gradient(&h, &p, 1e-5)).norm();
            assert!(err <= 1e-6, "d={d} err={err}");
            checked += 1;
        }
    }
}

#[test]
fn eshelby_traction_across_jump_pairs() {
    let (p, t) = reference(2);
    assert_eq!(eshelby(&SquareMatrix::zeros(2), &p).unwrap().norm(), 0.0);
    let b = *t.binodal().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let n = [phi.cos(), phi.sin()];
        let mut hm = random_matrix(&mut rng, 2);
        hm = hm + SquareMatrix::scaled_identity(2, (b.theta1 - hm.trace()) / 2.0);
        let hp = jump_pair(&hm, &n, &t).unwrap();
        let jn = (eshelby(&hp, &p).unwrap() - eshelby(&hm, &p).unwrap()).mul_vec(&n);
        assert!(jn[0].hypot(jn[1]) < 1e-12, "{jn:?}");

        // Same jump anchored off the binodal breaks the Maxwell relation.
        let off = hm + SquareMatrix::scaled_identity(2, 0.05);
        let offp = off + SquareMatrix::outer(&n, &n) * b.width();
        let r = jump_conditions(&off, &offp, &n, &p).unwrap();
        assert!(r.maxwell > 1e-3, "{r:?}");
        let jn = (eshelby(&offp, &p).unwrap() - eshelby(&off, &p).unwrap()).mul_vec(&n);
        assert!(jn[0].hypot(jn[1]) > 1e-3);
    }
}

proptest! {
    #[test]
    fn eshelby_trace_identity(entries in prop::collection::vec(-2.0f64..2.0, 9)) {
        let (p, _) = reference(3);
        let h = SquareMatrix::from_row_slice(3, &entries).unwrap();
        let lhs = eshelby(&h, &p).unwrap().trace();
        let rhs = 3.0 * eval_w0(&h, &p).unwrap() - piola(&h, &p).unwrap().inner(&h);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }
}

fn ellipse_grid(n: usize) -> Arc<GridDomain> {
    let s = 2.0 / n as f64;
    let mask: Vec<bool> = (0..n * n)
        .map(|k| {
            let x = -1.0 + (k % n) as f64 * s + 0.5 * s;
            let y = -1.0 + (k / n) as f64 * s + 0.5 * s;
            (x / 0.9).powi(2) + (y / 0.6).powi(2) < 1.0
        })
        .collect();
    Arc::new(GridDomain::from_mask(&[n, n], s, &[-1.0, -1.0], &mask).unwrap())
}

#[test]
fn clapeyron_is_exact_for_affine_fields() {
    let (p, _) = reference(2);
    let grids = [
        Arc::new(GridDomain::unit_disk(96).unwrap()),
        Arc::new(GridDomain::square(64, 1.0).unwrap()),
        ellipse_grid(80),
    ];
    for g in grids {
        for shift in [0.0, 0.4] {
            let mut h0 = SquareMatrix::from_row_slice(2, &[0.3, 0.2, -0.1, 0.9]).unwrap();
            h0.set(0, 0, h0.get(0, 0) + shift);
            let u = VectorField::affine(g.clone(), &h0).unwrap();
            let trace = BoundaryTrace::extract(&u, &p).unwrap();
            assert!((trace.total_weight() - g.boundary_measure()).abs() < 1e-12);
            let exact = g.measure() * eval_w0(&h0, &p).unwrap();
            let e = clapeyron_energy(&trace, 2);
            assert!((e - exact).abs() <= 1e-12 * exact.abs(), "{e} {exact}");
            assert!((total_energy(&u, &p).unwrap() - exact).abs() <= 1e-12 * exact.abs());
        }
    }
}

#[test]
fn clapeyron_for_the_disk_minimizer() {
    let (p, _) = reference(2);
    for (n, tol) in [(256, 0.01), (512, 0.003)] {
        let (_, u) = minimizer(n, 0.4, 0.0);
        let e = clapeyron_energy(&BoundaryTrace::extract(&u, &p).unwrap(), 2);
        let v = total_energy(&u, &p).unwrap();
        assert!(((e - v) / v).abs() <= tol, "n={n} {e} {v}");
    }
}

/// `u = H0 x + ∇(a(x³ − 3xy²))`: value and gradient at `(x, y)`.
fn harmonic_field(h0: &SquareMatrix, a: f64, x: f64, y: f64) -> ([f64; 2], SquareMatrix) {
    let u = [
        h0.get(0, 0) * x + h0.get(0, 1) * y + 3.0 * a * (x * x - y * y),
        h0.get(1, 0) * x + h0.get(1, 1) * y - 6.0 * a * x * y,
    ];
    let g = SquareMatrix::from_row_slice(
        2,
        &[
            h0.get(0, 0) + 6.0 * a * x,
            h0.get(0, 1) - 6.0 * a * y,
            h0.get(1, 0) - 6.0 * a * y,
            h0.get(1, 1) - 6.0 * a * x,
        ],
    )
    .unwrap();
    (u, g)
}

/// Exact `∫_disk W` and `½ ∮ σn·u` for the harmonic field with
/// `f(θ) = θ²`, `μ = 1`.
fn linear_elastic_oracle(h0: &SquareMatrix, a: f64) -> (f64, f64) {
    let dev = |g: &SquareMatrix| g.sym() - SquareMatrix::scaled_identity(2, g.trace() / 2.0);
    let m = 4096;
    let mut boundary = 0.0;
    for k in 0..m {
        let phi = 2.0 * PI * k as f64 / m as f64;
        let (x, y) = (phi.cos(), phi.sin());
        let (u, g) = harmonic_field(h0, a, x, y);
        let sigma = SquareMatrix::scaled_identity(2, 2.0 * g.trace()) + dev(&g) * 2.0;
        let sn = sigma.mul_vec(&[x, y]);
        boundary += 0.5 * (sn[0] * u[0] + sn[1] * u[1]) * 2.0 * PI / m as f64;
    }
    // The density is a quadratic in (x, y): two Gauss points in r and the
    // trapezoid in angle are exact.
    let nodes = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
    let q = 64;
    let mut volume = 0.0;
    for k in 0..q {
        let phi = 2.0 * PI * k as f64 / q as f64;
        for &r in &nodes {
            let (_, g) = harmonic_field(h0, a, r * phi.cos(), r * phi.sin());
            let w = g.trace().powi(2) + dev(&g).norm_sq();
            volume += w * r * 0.5 * 2.0 * PI / q as f64;
        }
    }
    (volume, boundary)
}

#[test]
fn clapeyron_linear_elastic_limit() {
    // A large f0 keeps every cell on the low parabola f(θ) = θ².
    let p = MaterialParams::bi_quadratic(2, 1.0, 1.0, 1.0, 100.0).unwrap();
    let h0 = SquareMatrix::from_row_slice(2, &[0.1, 0.05, -0.02, 0.2]).unwrap();
    let a = 0.1;
    let (volume, boundary) = linear_elastic_oracle(&h0, a);
    assert!(
        (volume - boundary).abs() < 1e-10 * volume,
        "{volume} {boundary}"
    );

    let grid = Arc::new(GridDomain::unit_disk(256).unwrap());
    let u = VectorField::from_fn(grid, |x| {
        let (v, g) = harmonic_field(&h0, a, x[0], x[1]);
        ([v[0], v[1], 0.0, 0.0], g)
    })
    .unwrap();
    let e = clapeyron_energy(&BoundaryTrace::extract(&u, &p).unwrap(), 2);
    assert!(((e - boundary) / boundary).abs() < 0.01, "{e} {boundary}");
    let v = total_energy(&u, &p).unwrap();
    assert!(((v - volume) / volume).abs() < 0.01, "{v} {volume}");
    let s = stationarity_residuals(&u, &p).unwrap();
    assert!(s.el_residual < 1e-3 && s.noether_residual < 1e-3, "{s:?}");
}

#[test]
fn stationarity_controls() {
    let (p, t) = reference(2);
    let g = Arc::new(GridDomain::unit_disk(64).unwrap());
    let u = VectorField::affine(g, &loading(2, 0.5, 0.3)).unwrap();
    let s = stationarity_residuals(&u, &p).unwrap();
    assert!(s.el_residual < 1e-13 && s.noether_residual < 1e-13, "{s:?}");
    assert!(s.tests > 0);

    let b = *t.binodal().unwrap();
    let mut el = Vec::new();
    for n in [256, 512] {
        let (_, u) = minimizer(n, 0.4, 0.0);
        let s = stationarity_residuals(&u, &p).unwrap();
        assert!(
            s.el_residual < 0.01 && s.noether_residual < 0.01,
            "n={n} {s:?}"
        );
        el.push(s.el_residual);

        let (_, bad) = minimizer(n, 0.4, 0.2 * b.width());
        let s = stationarity_residuals(&bad, &p).unwrap();
        assert!(s.el_residual < 0.01, "n={n} {s:?}");
        assert!(s.noether_residual > 0.1, "n={n} {s:?}");
    }
    assert!(el[1] < 0.6 * el[0], "{el:?}");
}

#[test]
fn noether_residual_without_shear() {
    // W0 I and Hᵗ P nearly cancel here; the residual must still shrink
    // with the grid rather than measure that cancellation.
    let (p, t) = reference(2);
    let b = *t.binodal().unwrap();
    let mut noether = Vec::new();
    for n in [128, 512] {
        let grid = Arc::new(GridDomain::unit_disk(n).unwrap());
        let inc = InclusionGeometry::concentric_ball(2, 0.5, true).unwrap();
        let pot = build_potential(&grid, &inc, &t).unwrap();
        let h0 = loading(2, 0.5 * (b.theta1 + b.theta2), 0.0);
        let u = displacement_field(&pot.h, &h0).unwrap();
        noether.push(stationarity_residuals(&u, &p).unwrap().noether_residual);
    }
    assert!(
        noether[1] < 0.01 && noether[1] < 0.5 * noether[0],
        "{noether:?}"
    );
}

fn failed(r: &CertificateReport, h: Hypothesis) -> bool {
    matches!(&r.verdict, Verdict::NotCertified(f) if f.contains(&h))
}

#[test]
fn certificate_on_affine_fields() {
    let (p, t) = reference(2);
    let g = Arc::new(GridDomain::unit_disk(128).unwrap());
    let out = loading(2, 1.2, 0.1);
    let u = VectorField::affine(g.clone(), &out).unwrap();
    let r = theorem3_certificate(&u, &out, &p, &t).unwrap();
    assert!(r.certified(), "{r:?}");
    assert!(r.qw_gap.abs() < 1e-12 * r.volume_energy);

    let inside = loading(2, 0.5, 0.1);
    let u = VectorField::affine(g, &inside).unwrap();
    let r = theorem3_certificate(&u, &inside, &p, &t).unwrap();
    assert!(failed(&r, Hypothesis::LocalStability), "{r:?}");
    assert!(failed(&r, Hypothesis::EnvelopeGap));
    assert!((r.local_stability_violation - r.measure).abs() < 1e-12);
    assert!(r.qw_gap > 0.0);
    assert!(r.el_residual < 1e-12 && r.boundary_affine_defect < 1e-12);
}

#[test]
fn certificate_on_the_disk_minimizer() {
    let (p, t) = reference(2);
    let (h0, u) = minimizer(256, 0.4, 0.0);
    let r = theorem3_certificate(&u, &h0, &p, &t).unwrap();
    assert!(r.certified(), "{r:?}");
    assert!(r.relative_clapeyron_gap() < 0.01);
    assert!(r.qw_gap.abs() < 0.02 * r.volume_energy);
    for v in [
        r.lipschitz_estimate,
        r.el_residual,
        r.noether_residual,
        r.local_stability_violation,
        r.boundary_affine_defect,
        r.collar_oscillation,
        r.clapeyron_gap,
    ] {
        assert!(v >= 0.0);
    }
}

#[test]
fn certificate_negative_controls() {
    let (p, t) = reference(2);
    let b = *t.binodal().unwrap();

    let (h0, u) = minimizer(256, 0.4, 0.2 * b.width());
    let r = theorem3_certificate(&u, &h0, &p, &t).unwrap();
    assert!(failed(&r, Hypothesis::Stationarity), "{r:?}");

    let g = Arc::new(GridDomain::square(128, 1.0).unwrap());
    let rad = (4.0 * 0.4 / PI).sqrt();
    let inc = InclusionGeometry::ball_mask(&g, &[0.0, 0.0], rad).unwrap();
    let pot = build_potential(&g, &inc, &t).unwrap();
    let w = inc.omega();
    let h0 = loading(2, w * b.theta1 + (1.0 - w) * b.theta2, 0.1);
    let u = displacement_field(&pot.h, &h0).unwrap();
    let r = theorem3_certificate(&u, &h0, &p, &t).unwrap();
    assert!(failed(&r, Hypothesis::BoundaryAffine), "{r:?}");

    let (h0, u) = minimizer(128, 0.4, 0.0);
    let steep = u.with_bump(&[0.1, 0.2], 0.05, &[50.0, 0.0]).unwrap();
    let opts = CertificateOptions {
        lipschitz_max: 100.0,
        ..CertificateOptions::default()
    };
    let r = theorem3_certificate_with(&steep, &h0, &p, &t, &opts).unwrap();
    assert!(failed(&r, Hypothesis::Lipschitz), "{r:?}");

    // Tangential shear u += c (1 − r0/r)(−y, x) switched on inside the
    // collar: divergence free, so only the gradient kink shows.
    let g = Arc::new(GridDomain::unit_disk(128).unwrap());
    let h0 = loading(2, 1.2, 0.1);
    let r0 = 1.0 - 2.0 * g.spacing();
    let c = 0.5;
    let kinked = VectorField::from_fn(g, |x| {
        let r = x[0].hypot(x[1]);
        let mut y = h0.mul_vec(x);
        let mut gr = h0;
        if r > r0 {
            let s = c * (1.0 - r0 / r);
            let t = [-x[1], x[0]];
            y[0] += s * t[0];
            y[1] += s * t[1];
            let ds = [c * r0 * x[0] / r.powi(3), c * r0 * x[1] / r.powi(3)];
            let rot = [[0.0, -1.0], [1.0, 0.0]];
            for i in 0..2 {
                for j in 0..2 {
                    gr.set(i, j, gr.get(i, j) + t[i] * ds[j] + s * rot[i][j]);
                }
            }
        }
        (y, gr)
    })
    .unwrap();
    let r = theorem3_certificate(&kinked, &h0, &p, &t).unwrap();
    assert!(failed(&r, Hypothesis::CollarSmoothness), "{r:?}");
    assert!(!failed(&r, Hypothesis::BoundaryAffine), "{r:?}");
}

#[test]
fn non_star_shaped_domain_is_inapplicable() {
    let (p, t) = reference(2);
    let n = 96;
    let s = 2.0 / n as f64;
    let mask: Vec<bool> = (0..n * n)
        .map(|k| {
            let x = -1.0 + (k % n) as f64 * s + 0.5 * s;
            let y = -1.0 + (k / n) as f64 * s + 0.5 * s;
            let r = x.hypot(y);
            r > 0.4 && r < 0.95
        })
        .collect();
    let g = Arc::new(GridDomain::from_mask(&[n, n], s, &[-1.0, -1.0], &mask).unwrap());
    let h0 = loading(2, 1.2, 0.0);
    let u = VectorField::affine(g, &h0).unwrap();
    let r = theorem3_certificate(&u, &h0, &p, &t).unwrap();
    assert_eq!(r.verdict, Verdict::Inapplicable);
    assert!(r.star_shape_min < 0.0);
}

#[test]
fn null_lagrangian_depends_on_boundary_values_only() {
    let (p, _) = reference(2);
    let g = ellipse_grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base: Vec<[f64; 4]> = (0..g.len())
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                0.0,
                0.0,
            ]
        })
        .collect();
    // Perturb only cells whose 5×5 neighbourhood lies in Ω.
    let deep = |i: usize| {
        let m = g.multi(i);
        (-2i64..=2).all(|a| {
            (-2i64..=2).all(|b| {
                let idx = [(m[0] as i64 + a) as usize, (m[1] as i64 + b) as usize];
                g.contains(g.index(&idx))
            })
        })
    };
    let mut other = base.clone();
    let mut changed = 0;
    for (i, v) in other.iter_mut().enumerate() {
        if g.contains(i) && deep(i) {
            v[0] += rng.random_range(-1.0..1.0);
            v[1] += rng.random_range(-1.0..1.0);
            changed += 1;
        }
    }
    assert!(changed > 100);
    let a = VectorField::from_values(g.clone(), base).unwrap();
    let b = VectorField::from_values(g, other).unwrap();
    let ea = null_lagrangian_energy(&a, &p);
    let eb = null_lagrangian_energy(&b, &p);
    assert!((ea - eb).abs() < 1e-10, "{ea} {eb}");
    assert!((total_energy(&a, &p).unwrap() - total_energy(&b, &p).unwrap()).abs() > 1e-3);
}
