use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twowell_core::energy::*;
use twowell_core::relaxation::*;
use twowell_core::SquareMatrix;

fn reference(d: usize) -> (MaterialParams, CommonTangent) {
    let p = MaterialParams::bi_quadratic(d, 1.0, 1.0, 1.0, 0.1).unwrap();
    let t = common_tangent(&p).unwrap();
    (p, t)
}

/// Random matrix with its trace moved to `trace`.
fn with_trace(d: usize, raw: &[f64], trace: f64) -> SquareMatrix {
    let h = SquareMatrix::from_fn(d, |i, j| raw[i * d + j]);
    h + SquareMatrix::scaled_identity(d, (trace - h.trace()) / d as f64)
}

fn unit(raw: &[f64]) -> Option<Vec<f64>> {
    let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.1).then(|| raw.iter().map(|x| x / n).collect())
}

#[test]
fn midpoint_laminate_example() {
    let (p, t) = reference(3);
    let h0 = SquareMatrix::scaled_identity(3, (0.25 + 0.85) / 6.0);
    let lam = build_laminate(&h0, &t, &[1.0, 0.0, 0.0]).unwrap();
    assert!((lam.omega - 0.5).abs() < 1e-15);
    assert!((lam.m1 + lam.m2).norm() < 1e-15);
    let e = periodic_energy(&lam, &h0, &p, 16).unwrap();
    assert!((e - eval_qw0(&h0, &p, &t).unwrap()).abs() < 1e-12);
}

#[test]
fn zero_trial_field_gives_w0() {
    let (p, _) = reference(2);
    let h0 = SquareMatrix::from_row_slice(2, &[0.3, 0.1, -0.2, 0.2]).unwrap();
    let r = lower_bound_check(&h0, &p, &TrialField::zero(2), 4).unwrap();
    assert!((r.average - eval_w0(&h0, &p).unwrap()).abs() < 1e-14);
    assert!(r.holds && r.converged);
}

#[test]
fn smoothed_laminate_excess_is_linear_in_layer_width() {
    let (p, t) = reference(2);
    let b = *t.binodal().unwrap();
    let h0 = SquareMatrix::from_row_slice(2, &[0.3, 0.05, -0.05, 0.25]).unwrap();
    let omega = lever_rule(h0.trace(), &t).unwrap();
    let bound = eval_qw0(&h0, &p, &t).unwrap();
    let excess = |w: f64| {
        let s = SmoothedLaminate::new(2, 0, omega, b.jump(), w).unwrap();
        let r = lower_bound_check(&h0, &p, &TrialField::SmoothedLaminate(s), 16).unwrap();
        assert!(r.holds);
        r.average - bound
    };
    let e32 = excess(1.0 / 32.0);
    let e64 = excess(1.0 / 64.0);
    assert!(e32 > 0.0 && e64 > 0.0);
    let ratio = e32 / e64;
    assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
    assert!(e32 < 32.0 * 1.0 / 32.0 * b.width().powi(2));
}

#[test]
fn j2_is_a_null_lagrangian_on_the_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2usize, 3] {
        for _ in 0..10 {
            let phi = TrigonometricField::random(d, 3, 3, 0.2, &mut rng);
            let raw: Vec<f64> = (0..d * d).map(|i| (i as f64 * 0.37).sin()).collect();
            let h = SquareMatrix::from_fn(d, |i, j| raw[i * d + j]);
            let n = 2 * phi.max_wave() as usize + 1;
            let total = n.pow(d as u32);
            let mut acc = 0.0;
            for idx in 0..total {
                let mut rem = idx;
                let mut x = vec![0.0; d];
                for xi in x.iter_mut() {
                    *xi = ((rem % n) as f64 + 0.5) / n as f64;
                    rem /= n;
                }
                acc += eval_j2(&(h + phi.gradient(&x)));
            }
            assert!((acc / total as f64 - eval_j2(&h)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn laminate_attains_envelope(
        d in 2usize..=3,
        frac in 0.0f64..1.0,
        raw in prop::collection::vec(-1.0f64..1.0, 9),
        nraw in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let (p, t) = reference(d);
        let b = *t.binodal().unwrap();
        let h0 = with_trace(d, &raw, b.theta1 + frac * b.width());
        let Some(n) = unit(&nraw[..d]) else { return Ok(()); };
        let lam = build_laminate(&h0, &t, &n).unwrap();
        prop_assert!(lam.mean_defect() <= 1e-15);
        prop_assert!(lam.compatibility_defect() <= 1e-14);
        prop_assert!(((h0 + lam.m1).trace() - b.theta1).abs() <= 1e-14);
        prop_assert!(((h0 + lam.m2).trace() - b.theta2).abs() <= 1e-14);
        prop_assert!((lam.omega * b.theta1 + (1.0 - lam.omega) * b.theta2 - h0.trace()).abs() <= 1e-14);
        let e = periodic_energy(&lam, &h0, &p, 8).unwrap();
        prop_assert!((e - eval_qw0(&h0, &p, &t).unwrap()).abs() <= 1e-12);

        let mut e1 = vec![0.0; d];
        e1[0] = 1.0;
        let axis = build_laminate(&h0, &t, &e1).unwrap();
        prop_assert!((periodic_energy(&axis, &h0, &p, 8).unwrap() - e).abs() <= 1e-12);
    }

    #[test]
    fn no_trial_field_beats_the_envelope(
        d in 2usize..=3,
        seed in any::<u64>(),
        trace in -0.5f64..1.5,
        raw in prop::collection::vec(-0.5f64..0.5, 9),
    ) {
        let (p, _) = reference(d);
        let h0 = with_trace(d, &raw, trace);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = TrialField::Trigonometric(TrigonometricField::random(d, 3, 2, 0.15, &mut rng));
        let opts = LowerBoundOptions {
            max_points: if d == 2 { 1 << 16 } else { 1 << 15 },
            ..LowerBoundOptions::default()
        };
        let r = lower_bound_check_with(&h0, &p, &phi, 8, &opts).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }
}
