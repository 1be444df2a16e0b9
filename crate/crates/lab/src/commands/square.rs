use rayon::prelude::*;
use serde_json::{json, Value};
use twowell_core::square_moments::{
    corner_flatness, generating_residual, log_growth_fit, outline, slope_m, solve_truncated_with,
    Morphology, SolveOptions, TruncatedFit, CORNER,
};

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::output::{num, nums, OutputDir};

const CURVE_SAMPLES: usize = 201;

/// Sweeps the truncated moment system over `(K, n)` with `n ≤ K` and writes
/// `floors.csv`, `curve.csv` and `outline.csv` for the reported fit,
/// `generating.csv` along the `z` grid, and `residuals.json`.
pub fn run(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), LabError> {
    let s = &config.square;
    let morphology = match s.morphology.as_str() {
        "boundary" => Morphology::Boundary,
        _ => Morphology::Center,
    };
    let omega = morphology.effective_omega(s.omega);
    let seed = config.seed;
    let options = SolveOptions::default();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &k in &s.orders {
        for &n in &s.bases {
            if n <= k {
                pairs.push((k, n));
            }
        }
    }
    if !pairs.contains(&(s.report_order, s.report_basis)) {
        pairs.push((s.report_order, s.report_basis));
    }
    let fits: Vec<TruncatedFit> = pairs
        .par_iter()
        .map(|&(k, n)| solve_truncated_with(omega, k, n, s.pin_slope, seed, &options))
        .collect::<Result<_, _>>()?;
    let m_expected = slope_m(omega)?;

    let rows = pairs.iter().zip(&fits).map(|(&(k, n), f)| {
        vec![
            k as f64,
            n as f64,
            f.floor(),
            f.curve.m,
            f.curve.m - m_expected,
            if f.curve.is_admissible() { 1.0 } else { 0.0 },
        ]
    });
    out.csv(
        "floors.csv",
        &[
            "order",
            "basis",
            "floor",
            "slope",
            "slope_error",
            "admissible",
        ],
        rows,
    )?;

    let at = pairs
        .iter()
        .position(|&p| p == (s.report_order, s.report_basis))
        .expect("report pair is in the sweep");
    let fit = &fits[at];
    let curve = &fit.curve;
    out.csv(
        "curve.csv",
        &["t", "a"],
        (0..CURVE_SAMPLES).map(|i| {
            let t = CORNER * i as f64 / (CURVE_SAMPLES - 1) as f64;
            vec![t, curve.a(t)]
        }),
    )?;
    let outline = outline(curve, s.outline_samples)?;
    out.csv(
        "outline.csv",
        &["x", "y"],
        outline.iter().map(|p| p.to_vec()),
    )?;

    let zs: Vec<f64> = (0..s.z_points)
        .map(|i| s.z_min + (s.z_max - s.z_min) * i as f64 / (s.z_points - 1) as f64)
        .collect();
    let generating = generating_residual(curve, &zs)?;
    out.csv(
        "generating.csv",
        &["z", "value", "scaled", "log_abs"],
        generating
            .iter()
            .map(|g| vec![g.z, g.value, g.scaled, g.log_abs]),
    )?;
    let growth = log_growth_fit(&generating)?;

    let corner = corner_flatness(curve);
    let flat_options = SolveOptions {
        corner_order: 3,
        ..options.clone()
    };
    let flat = solve_truncated_with(
        omega,
        s.report_order,
        s.report_basis,
        s.pin_slope,
        seed,
        &flat_options,
    )?;

    let floors: Vec<Value> = pairs
        .iter()
        .zip(&fits)
        .map(|(&(k, n), f)| {
            json!({
                "order": k,
                "basis": n,
                "floor": num(f.floor()),
                "slope": num(f.curve.m),
                "admissible": f.curve.is_admissible(),
                "best_start": f.best_start,
            })
        })
        .collect();
    out.json(
        "residuals.json",
        json!({
            "omega": num(s.omega),
            "morphology": s.morphology,
            "effective_omega": num(omega),
            "seed": seed,
            "report": {
                "order": s.report_order,
                "basis": s.report_basis,
                "residuals": nums(&fit.system.residuals),
                "floor": num(fit.floor()),
                "slope": num(curve.m),
                "coefficients": nums(&curve.coeffs),
                "area_fraction": num(curve.area_fraction()),
                "admissible": curve.is_admissible(),
            },
            "floors": floors,
            "slope": {
                "expected": num(m_expected),
                "fitted": num(curve.m),
                "error": num(curve.m - m_expected),
            },
            "growth": {
                "z_min": num(s.z_min),
                "z_max": num(s.z_max),
                "slope": num(growth.slope),
                "intercept": num(growth.intercept),
                "r_squared": num(growth.r_squared),
            },
            "corner": {
                "second_at_corner": num(corner.second_at_corner),
                "third_at_corner": num(corner.third_at_corner),
                "second_at_mid": num(corner.second_at_mid),
                "ratio": num(corner.ratio),
            },
            "flat_corner": {
                "floor": num(flat.floor()),
                "ratio_to_free": num(flat.floor() / fit.floor()),
            },
        }),
    )?;
    Ok(())
}
