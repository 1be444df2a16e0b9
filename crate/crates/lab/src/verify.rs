//! The property suite behind `twowell verify`: a fixed list of checks over
//! every module, run in parallel and reported in list order.
//!
//! A check compares one measured number against a limit. Limits that are
//! tolerances are multiplied by `tolerances.scale`; lower bounds and
//! pass/fail flags are not.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use twowell_core::certify::{
    clapeyron_energy, theorem3_certificate_with, BoundaryTrace, CertificateOptions,
    CertificateReport, Hypothesis, Verdict,
};
use twowell_core::energy::{
    acoustic_tensor, analytic_common_tangent, common_tangent, eval_phi_cvx, eval_qw0, eval_w0,
    in_binodal, jump_conditions, jump_pair, numeric_common_tangent,
    recover_envelope_from_degeneracy, translation_identity_residual, weierstrass_test,
    CommonTangent, Envelope, MaterialParams,
};
use twowell_core::fields::{
    build_potential, displacement_field, total_energy, GridDomain, InclusionGeometry,
    PotentialField, VectorField,
};
use twowell_core::relaxation::{
    build_laminate, lower_bound_check_with, periodic_energy, LowerBoundOptions, TrialField,
    TrigonometricField,
};
use twowell_core::square_moments::{
    generating_residual, log_growth_fit, slope_m, solve_truncated, CORNER,
};
use twowell_core::SquareMatrix;

use crate::config::{ExperimentConfig, ToleranceSpec};
use crate::error::LabError;
use crate::output::{num, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(module: &'static str, name: &str, value: f64, limit: f64) -> Self {
        Check {
            module,
            name: name.into(),
            value,
            relation: Relation::AtMost,
            limit,
            pass: value <= limit,
        }
    }

    fn at_least(module: &'static str, name: &str, value: f64, limit: f64) -> Self {
        Check {
            module,
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            limit,
            pass: value >= limit,
        }
    }

    /// A yes/no outcome, stored as 1 or 0 against a limit of 1.
    fn flag(module: &'static str, name: &str, ok: bool) -> Self {
        Self::at_least(module, name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    fn to_json(&self) -> Value {
        json!({
            "module": self.module,
            "name": self.name,
            "value": num(self.value),
            "relation": match self.relation { Relation::AtMost => "<=", Relation::AtLeast => ">=" },
            "limit": num(self.limit),
            "pass": self.pass,
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// One line per check: status, module, name, value and limit.
    pub fn matrix(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let rel = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            writeln!(
                s,
                "{}  {:<10} {:<width$}  {:>11.4e} {rel} {:.4e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.module,
                c.name,
                c.value,
                c.limit,
            )
            .unwrap();
        }
        let failed = self.failures().len();
        writeln!(s, "{} checks, {} failed", self.checks.len(), failed).unwrap();
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Shared inputs of the field checks.
struct Ctx {
    seed: u64,
    tol: ToleranceSpec,
    ladder: [usize; 3],
    omega: f64,
}

/// Phase-1 fraction of the disk minimizers.
const DISK_OMEGA: f64 = 0.4;

type Group = fn(&Ctx) -> Result<Vec<Check>, LabError>;

const GROUPS: &[(&str, Group)] = &[
    ("energy", tangents),
    ("energy", envelope_bound),
    ("energy", jump_set),
    ("energy", acoustic),
    ("relaxation", laminates),
    ("relaxation", lower_bound),
    ("fields", ball_minimizer),
    ("certify", clapeyron),
    ("certify", certificate),
    ("square", square_evidence),
];

/// Runs every check. Material, loading and construction of the
/// configuration are not used: the checks fix their own reference material,
/// random parameter sets and disk minimizers, and take the seed, the finest
/// resolution and the tolerances from `config`.
pub fn run_checks(config: &ExperimentConfig) -> VerifyReport {
    let n = *config
        .resolution
        .ladder
        .last()
        .expect("ladder is non-empty");
    let ctx = Ctx {
        seed: config.seed,
        tol: config.scaled(),
        ladder: [n.div_ceil(4), n.div_ceil(2), n],
        omega: DISK_OMEGA,
    };
    let checks: Vec<Vec<Check>> = GROUPS
        .par_iter()
        .map(|(module, group)| {
            group(&ctx).unwrap_or_else(|e| {
                vec![Check {
                    module,
                    name: format!("error: {e}"),
                    value: f64::NAN,
                    relation: Relation::AtMost,
                    limit: 0.0,
                    pass: false,
                }]
            })
        })
        .collect();
    VerifyReport {
        checks: checks.into_iter().flatten().collect(),
    }
}

/// Writes `verify.json` and `verify.txt`, prints the matrix and fails when
/// any check fails.
pub fn run(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), LabError> {
    let report = run_checks(config);
    let matrix = report.matrix();
    print!("{matrix}");
    out.json("verify.json", report.to_json())?;
    out.text("verify.txt", &matrix)?;
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<String> = report.failures().iter().map(|c| c.name.clone()).collect();
        Err(LabError::Failed(format!(
            "failed checks: {}",
            names.join(", ")
        )))
    }
}

fn reference(d: usize) -> Result<(MaterialParams, CommonTangent), LabError> {
    let p = MaterialParams::bi_quadratic(d, 1.0, 1.0, 1.0, 0.1)?;
    let t = common_tangent(&p)?;
    Ok((p, t))
}

fn random_material(rng: &mut ChaCha8Rng) -> Result<MaterialParams, LabError> {
    let d = rng.random_range(2..=3);
    Ok(MaterialParams::bi_quadratic(
        d,
        rng.random_range(0.2..5.0),
        rng.random_range(0.2..5.0),
        rng.random_range(0.2..3.0),
        rng.random_range(0.0..2.0),
    )?)
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> SquareMatrix {
    SquareMatrix::from_fn(d, |_, _| rng.random_range(-scale..scale))
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn with_trace(h: SquareMatrix, trace: f64) -> SquareMatrix {
    let d = h.dim();
    h + SquareMatrix::scaled_identity(d, (trace - h.trace()) / d as f64)
}

fn rng(ctx: &Ctx, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(ctx.seed);
    r.set_stream(stream);
    r
}

fn tangents(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let mut rng = rng(ctx, 1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = random_material(&mut rng)?;
        let a = analytic_common_tangent(p.d(), p.mu(), p.bi_quadratic_potential().unwrap());
        let n = *numeric_common_tangent(&p)?.require()?;
        worst = worst
            .max((a.theta1 - n.theta1).abs())
            .max((a.theta2 - n.theta2).abs());
    }
    let (_, t) = reference(3)?;
    let b = t.require()?;
    let reference_error = (b.theta1 - 0.25).abs().max((b.theta2 - 0.85).abs());
    Ok(vec![
        Check::at_most(
            "energy",
            "tangent_analytic_vs_numeric",
            worst,
            ctx.tol.algebraic,
        ),
        Check::at_most(
            "energy",
            "tangent_reference_values",
            reference_error,
            ctx.tol.algebraic,
        ),
    ])
}

fn envelope_bound(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let mut rng = rng(ctx, 2);
    let (mut above, mut off_gap, mut inside_gap) = (f64::NEG_INFINITY, 0.0f64, f64::INFINITY);
    let mut translation = 0.0f64;
    for _ in 0..100 {
        let p = random_material(&mut rng)?;
        let t = common_tangent(&p)?;
        for _ in 0..100 {
            let h = random_matrix(&mut rng, p.d(), 2.0);
            let q = eval_qw0(&h, &p, &t)?;
            let w = eval_w0(&h, &p)?;
            above = above.max(q - w);
            if in_binodal(&h, &t) {
                inside_gap = inside_gap.min(w - q);
            } else {
                off_gap = off_gap.max((q - w).abs() / (1.0 + w.abs()));
            }
            translation = translation.max(translation_identity_residual(&h));
        }
    }
    let mut recovery = 0.0f64;
    for (p, t) in [reference(2)?, reference(3)?] {
        let thetas: Vec<f64> = (0..=400).map(|i| -0.5 + 2.0 * i as f64 / 400.0).collect();
        let r = recover_envelope_from_degeneracy(&p, &t, &thetas)?;
        for (theta, e) in thetas.iter().zip(&r.envelope) {
            recovery = recovery.max((e - eval_phi_cvx(*theta, &t, &p)?).abs());
        }
    }
    Ok(vec![
        Check::at_most("energy", "qw0_below_w0", above.max(0.0), ctx.tol.algebraic),
        Check::at_most(
            "energy",
            "qw0_equals_w0_off_binodal",
            off_gap,
            ctx.tol.algebraic,
        ),
        Check::at_least("energy", "qw0_below_w0_inside_binodal", inside_gap, 0.0),
        Check::at_most(
            "energy",
            "translation_identity",
            translation,
            ctx.tol.algebraic,
        ),
        Check::at_most(
            "energy",
            "envelope_from_degeneracy",
            recovery,
            ctx.tol.envelope,
        ),
    ])
}

fn jump_set(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let mut rng = rng(ctx, 3);
    let mut worst = 0.0f64;
    let (mut interior_passing, mut outside_failing, mut endpoint_failing) = (0, 0, 0);
    for _ in 0..1000 {
        let p = random_material(&mut rng)?;
        let d = p.d();
        let t = common_tangent(&p)?;
        let b = *t.require()?;
        let hm = with_trace(random_matrix(&mut rng, d, 1.0), b.theta1);
        let n = random_unit(&mut rng, d);
        let hp = jump_pair(&hm, &n, &t)?;
        worst = worst.max(jump_conditions(&hm, &hp, &n, &p)?.max());
        if !weierstrass_test(&hm, &p, 4, ctx.seed)? {
            endpoint_failing += 1;
        }
        let s = rng.random_range(0.05..0.95);
        if weierstrass_test(&(hm * (1.0 - s) + hp * s), &p, 4, ctx.seed)? {
            interior_passing += 1;
        }
        let off = if rng.random_bool(0.5) {
            b.theta1 - rng.random_range(0.01..1.0)
        } else {
            b.theta2 + rng.random_range(0.01..1.0)
        };
        let h = with_trace(random_matrix(&mut rng, d, 1.0), off);
        if !weierstrass_test(&h, &p, 4, ctx.seed)? {
            outside_failing += 1;
        }
    }
    Ok(vec![
        Check::at_most("energy", "jump_conditions", worst, ctx.tol.algebraic),
        Check::at_most(
            "energy",
            "weierstrass_interior_passing",
            interior_passing as f64,
            0.0,
        ),
        Check::at_most(
            "energy",
            "weierstrass_endpoint_failing",
            endpoint_failing as f64,
            0.0,
        ),
        Check::at_most(
            "energy",
            "weierstrass_off_binodal_failing",
            outside_failing as f64,
            0.0,
        ),
    ])
}

fn acoustic(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let mut rng = rng(ctx, 4);
    let (mut inside, mut outside) = (0.0f64, f64::INFINITY);
    for _ in 0..1000 {
        let p = random_material(&mut rng)?;
        let d = p.d();
        let t = common_tangent(&p)?;
        let b = *t.require()?;
        let n = random_unit(&mut rng, d);
        let theta = b.theta1 + rng.random_range(0.001..0.999) * b.width();
        let a = acoustic_tensor(theta, &n, &p, Envelope::Relaxed(&t))?;
        inside = inside.max(a.matrix.det().abs());
        let off = if rng.random_bool(0.5) {
            b.theta1 - rng.random_range(0.01..1.0)
        } else {
            b.theta2 + rng.random_range(0.01..1.0)
        };
        let a = acoustic_tensor(off, &n, &p, Envelope::Relaxed(&t))?;
        outside = outside.min(a.matrix.det());
    }
    Ok(vec![
        Check::at_most("energy", "acoustic_det_inside", inside, ctx.tol.algebraic),
        Check::at_least(
            "energy",
            "acoustic_det_outside_positive",
            outside,
            f64::MIN_POSITIVE,
        ),
    ])
}

fn laminates(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let mut rng = rng(ctx, 5);
    let mut worst = 0.0f64;
    for d in [2, 3] {
        let (p, t) = reference(d)?;
        let b = *t.require()?;
        for _ in 0..500 {
            let h0 = with_trace(
                random_matrix(&mut rng, d, 1.0),
                b.theta1 + rng.random_range(0.0..1.0) * b.width(),
            );
            let n = random_unit(&mut rng, d);
            let lam = build_laminate(&h0, &t, &n)?;
            let e = periodic_energy(&lam, &h0, &p, 8)?;
            worst = worst.max((e - eval_qw0(&h0, &p, &t)?).abs());
        }
    }
    Ok(vec![Check::at_most(
        "relaxation",
        "laminate_attains_qw0",
        worst,
        1e-12 * ctx.tol.scale,
    )])
}

fn lower_bound(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let mut rng = rng(ctx, 6);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..16 {
        let d = 2 + i % 2;
        let (p, _) = reference(d)?;
        let h0 = with_trace(random_matrix(&mut rng, d, 0.5), rng.random_range(-0.5..1.5));
        let phi = TrialField::Trigonometric(TrigonometricField::random(d, 3, 2, 0.15, &mut rng));
        let opts = LowerBoundOptions {
            max_points: if d == 2 { 1 << 16 } else { 1 << 15 },
            ..LowerBoundOptions::default()
        };
        let r = lower_bound_check_with(&h0, &p, &phi, 8, &opts)?;
        if !r.holds {
            violations += 1;
        }
        worst = worst.min(r.average - r.bound);
    }
    Ok(vec![
        Check::at_most(
            "relaxation",
            "trial_fields_below_qw0",
            violations as f64,
            0.0,
        ),
        Check::at_least(
            "relaxation",
            "trial_field_min_excess",
            worst,
            -ctx.tol.algebraic,
        ),
    ])
}

fn disk(
    n: usize,
    omega: f64,
    inside: bool,
    t: &CommonTangent,
) -> Result<(Arc<GridDomain>, PotentialField), LabError> {
    let grid = Arc::new(GridDomain::unit_disk(n)?);
    let inc = InclusionGeometry::concentric_ball(2, omega, inside)?;
    let pot = build_potential(&grid, &inc, t)?;
    Ok((grid, pot))
}

fn balanced_loading(omega: f64, t: &CommonTangent, shift: f64) -> Result<SquareMatrix, LabError> {
    let b = t.require()?;
    let mut h = SquareMatrix::scaled_identity(
        2,
        (omega * b.theta1 + (1.0 - omega) * b.theta2 + shift) / 2.0,
    );
    h.set(0, 1, 0.1);
    Ok(h)
}

fn ball_minimizer(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let (p, t) = reference(2)?;
    let omega = ctx.omega;
    let h0 = balanced_loading(omega, &t, 0.0)?;
    let mut defects = Vec::new();
    let mut finest = None;
    for &n in &ctx.ladder {
        let (grid, pot) = disk(n, omega, true, &t)?;
        defects.push(pot.neumann_defect);
        finest = Some((grid, pot));
    }
    let (grid, pot) = finest.unwrap();
    let u = displacement_field(&pot.h, &h0)?;
    let e_in = total_energy(&u, &p)?;
    let target = grid.measure() * eval_qw0(&h0, &p, &t)?;
    let (_, outer) = disk(ctx.ladder[2], omega, false, &t)?;
    let e_out = total_energy(&displacement_field(&outer.h, &h0)?, &p)?;
    let order = (0..2)
        .map(|k| (defects[k] / defects[k + 1]).log2())
        .fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most(
            "fields",
            "disk_energy_vs_qw0",
            ((e_in - target) / target).abs(),
            ctx.tol.certificate,
        ),
        Check::at_least("fields", "free_boundary_defect_order", order, 1.0),
        Check::at_most(
            "fields",
            "morphology_energy_gap",
            ((e_in - e_out) / e_in).abs(),
            0.005 * ctx.tol.scale,
        ),
        Check::at_most(
            "fields",
            "phase_fraction_error",
            (pot.measured_fraction() - omega).abs() / omega,
            0.01 * ctx.tol.scale,
        ),
        Check::at_most(
            "fields",
            "mixed_partial_defect",
            pot.h.mixed_partial_defect(),
            ctx.tol.algebraic,
        ),
    ])
}

fn clapeyron(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let (p, t) = reference(2)?;
    let n = ctx.ladder[2];
    let mut affine = 0.0f64;
    for grid in [GridDomain::unit_disk(n)?, GridDomain::square(n / 2, 1.0)?] {
        let g = Arc::new(grid);
        for tr in [0.5, 1.2] {
            let h0 = with_trace(SquareMatrix::from_row_slice(2, &[0.3, 0.2, -0.1, 0.9])?, tr);
            let u = VectorField::affine(g.clone(), &h0)?;
            let e = clapeyron_energy(&BoundaryTrace::extract(&u, &p)?, 2);
            let v = g.measure() * eval_w0(&h0, &p)?;
            affine = affine.max(((e - v) / v).abs());
        }
    }
    let h0 = balanced_loading(ctx.omega, &t, 0.0)?;
    let (_, pot) = disk(n, ctx.omega, true, &t)?;
    let u = displacement_field(&pot.h, &h0)?;
    let e = clapeyron_energy(&BoundaryTrace::extract(&u, &p)?, 2);
    let v = total_energy(&u, &p)?;
    Ok(vec![
        Check::at_most("certify", "clapeyron_affine", affine, 1e-12 * ctx.tol.scale),
        Check::at_most(
            "certify",
            "clapeyron_ball",
            ((e - v) / v).abs(),
            0.01 * ctx.tol.scale,
        ),
    ])
}

fn failed(r: &CertificateReport, h: Hypothesis) -> bool {
    matches!(&r.verdict, Verdict::NotCertified(f) if f.contains(&h))
}

fn certificate(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let (p, t) = reference(2)?;
    let b = *t.require()?;
    let n = ctx.ladder[2];
    let opts = CertificateOptions {
        tolerance: ctx.tol.certificate,
        ..CertificateOptions::default()
    };
    let omega = ctx.omega;

    let h0 = balanced_loading(omega, &t, 0.0)?;
    let (_, pot) = disk(n, omega, true, &t)?;
    let u = displacement_field(&pot.h, &h0)?;
    let good = theorem3_certificate_with(&u, &h0, &p, &t, &opts)?;

    let inside = balanced_loading(0.5, &t, 0.0)?;
    let g = Arc::new(GridDomain::unit_disk(n / 2)?);
    let affine =
        theorem3_certificate_with(&VectorField::affine(g, &inside)?, &inside, &p, &t, &opts)?;

    let g = Arc::new(GridDomain::square(n / 2, 1.0)?);
    let inc = InclusionGeometry::ball_mask(&g, &[0.0, 0.0], (4.0 * omega / PI).sqrt())?;
    let sq = build_potential(&g, &inc, &t)?;
    let w = inc.omega();
    let hs = balanced_loading(w, &t, 0.0)?;
    let square = theorem3_certificate_with(&displacement_field(&sq.h, &hs)?, &hs, &p, &t, &opts)?;

    let shifted = balanced_loading(omega, &t, 0.2 * b.width())?;
    let off = theorem3_certificate_with(
        &displacement_field(&pot.h, &shifted)?,
        &shifted,
        &p,
        &t,
        &opts,
    )?;

    Ok(vec![
        Check::flag("certify", "disk_minimizer_certified", good.certified()),
        Check::flag(
            "certify",
            "affine_in_binodal_rejected_local_stability",
            failed(&affine, Hypothesis::LocalStability),
        ),
        Check::at_least(
            "certify",
            "ball_in_square_free_boundary_defect",
            sq.neumann_defect,
            0.05,
        ),
        Check::flag(
            "certify",
            "ball_in_square_rejected_boundary_affine",
            failed(&square, Hypothesis::BoundaryAffine),
        ),
        Check::at_least(
            "certify",
            "non_maxwell_noether_residual",
            off.noether_residual,
            opts.tolerance,
        ),
        Check::flag(
            "certify",
            "non_maxwell_rejected_stationarity",
            failed(&off, Hypothesis::Stationarity),
        ),
    ])
}

fn square_evidence(ctx: &Ctx) -> Result<Vec<Check>, LabError> {
    let omega = 0.3;
    let pairs: Vec<(usize, usize)> = [8, 16, 32, 64]
        .iter()
        .flat_map(|&k| {
            [4, 8, 16]
                .into_iter()
                .filter(move |&n| n <= k)
                .map(move |n| (k, n))
        })
        .collect();
    let fits = pairs
        .par_iter()
        .map(|&(k, n)| solve_truncated(omega, k, n, false, ctx.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let floor = fits.iter().map(|f| f.floor()).fold(f64::INFINITY, f64::min);
    let report = &fits[pairs.iter().position(|&p| p == (32, 8)).unwrap()];
    let slope_error = (report.curve.m - slope_m(omega)?).abs();
    let zs: Vec<f64> = (0..=30).map(|i| 10.0 + i as f64).collect();
    let growth = log_growth_fit(&generating_residual(&report.curve, &zs)?)?;
    let line = twowell_core::square_moments::CurveParam::corner_line(omega)?;
    let corner_value = (line.a(CORNER) - CORNER).abs();
    Ok(vec![
        Check::at_most(
            "square",
            "fitted_slope_error",
            slope_error,
            0.05 * ctx.tol.scale,
        ),
        Check::at_least("square", "residual_floor", floor, 1e-6),
        Check::at_least(
            "square",
            "generating_growth_slope",
            growth.slope,
            f64::MIN_POSITIVE,
        ),
        Check::at_least(
            "square",
            "generating_growth_r_squared",
            growth.r_squared,
            0.9,
        ),
        Check::at_most(
            "square",
            "curve_passes_corner",
            corner_value,
            ctx.tol.algebraic,
        ),
    ])
}
