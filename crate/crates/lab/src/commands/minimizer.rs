use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};
use twowell_core::certify::{theorem3_certificate_with, CertificateOptions, Verdict};
use twowell_core::energy::{eval_qw0, CommonTangent, MaterialParams};
use twowell_core::fields::{
    build_potential, displacement_field, equilibrium_certificate, total_energy, GridDomain,
    InclusionGeometry, PotentialField, VectorField,
};
use twowell_core::SquareMatrix;

use super::{field_columns, field_rows, inclusion, inclusion_json};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::output::{num, OutputDir};

struct Level {
    n: usize,
    grid: Arc<GridDomain>,
    geometry: Option<InclusionGeometry>,
    potential: Option<PotentialField>,
    u: VectorField,
    energy: f64,
}

fn level(
    config: &ExperimentConfig,
    n: usize,
    h0: &SquareMatrix,
    p: &MaterialParams,
    t: &CommonTangent,
) -> Result<Level, LabError> {
    let grid = Arc::new(config.grid(n)?);
    let geometry = inclusion(config, &grid)?;
    let (potential, u) = match &geometry {
        Some(g) => {
            let pot = build_potential(&grid, g, t)?;
            let u = displacement_field(&pot.h, h0)?;
            (Some(pot), u)
        }
        None => (None, VectorField::affine(grid.clone(), h0)?),
    };
    let energy = total_energy(&u, p)?;
    Ok(Level {
        n,
        grid,
        geometry,
        potential,
        u,
        energy,
    })
}

/// Builds the configured field on every rung of the resolution ladder and
/// writes `convergence.csv`, `energy.json`, `certificate.json`,
/// `inclusion.json`, plus `potential.csv` and `divergence.csv` on the finest
/// grid.
pub fn run(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), LabError> {
    let (p, t) = config.tangent()?;
    let h0 = config.h0(&t)?;
    let levels: Vec<Level> = config
        .resolution
        .ladder
        .par_iter()
        .map(|&n| level(config, n, &h0, &p, &t))
        .collect::<Result<_, _>>()?;
    let qw0 = eval_qw0(&h0, &p, &t)?;

    let mut rows = Vec::new();
    for l in &levels {
        let target = l.grid.measure() * qw0;
        let (defect, residual, fraction) = match &l.potential {
            Some(pot) => (
                pot.neumann_defect,
                pot.laplacian_residual(2),
                pot.measured_fraction(),
            ),
            None => (0.0, 0.0, f64::NAN),
        };
        rows.push(vec![
            l.n as f64,
            l.grid.spacing(),
            l.energy,
            target,
            (l.energy - target) / target.abs().max(f64::MIN_POSITIVE),
            defect,
            residual,
            fraction,
        ]);
    }
    out.csv(
        "convergence.csv",
        &[
            "n",
            "spacing",
            "energy",
            "target",
            "relative_gap",
            "neumann_defect",
            "laplacian_residual",
            "phase1_fraction",
        ],
        rows,
    )?;

    let fine = levels.last().expect("ladder is non-empty");
    let target = fine.grid.measure() * qw0;
    let mut energy = json!({
        "n": fine.n,
        "measure": num(fine.grid.measure()),
        "energy": num(fine.energy),
        "qw0": num(qw0),
        "target": num(target),
        "relative_gap": num((fine.energy - target) / target.abs().max(f64::MIN_POSITIVE)),
        "mean_divergence": num(fine.u.mean_divergence()),
        "trace_h0": num(h0.trace()),
    });
    if t.binodal().is_some() {
        let eq = equilibrium_certificate(&fine.u, &p, &t)?;
        energy.as_object_mut().unwrap().insert(
            "equilibrium".into(),
            json!({
                "symmetry_defect": num(eq.symmetry_defect),
                "p0": num(eq.p0),
                "relative_p0_deviation": num(eq.relative_p0_deviation()),
                "binodal_violation": num(eq.binodal_violation),
                "phase1_fraction": num(eq.phase1_fraction),
                "phase2_fraction": num(eq.phase2_fraction),
            }),
        );
    }
    out.json("energy.json", energy)?;

    let options = CertificateOptions {
        tolerance: config.scaled().certificate,
        ..CertificateOptions::default()
    };
    let report = theorem3_certificate_with(&fine.u, &h0, &p, &t, &options)?;
    let verdict = match &report.verdict {
        Verdict::Certified => "certified",
        Verdict::NotCertified(_) => "not_certified",
        Verdict::Inapplicable => "inapplicable",
    };
    let failed: Vec<Value> = report.failed.iter().map(|h| json!(h.name())).collect();
    out.json(
        "certificate.json",
        json!({
            "verdict": verdict,
            "failed": failed,
            "tolerance": num(options.tolerance),
            "lipschitz_estimate": num(report.lipschitz_estimate),
            "el_residual": num(report.el_residual),
            "noether_residual": num(report.noether_residual),
            "local_stability_violation": num(report.local_stability_violation),
            "boundary_affine_defect": num(report.boundary_affine_defect),
            "collar_oscillation": num(report.collar_oscillation),
            "star_shape_min": num(report.star_shape_min),
            "volume_energy": num(report.volume_energy),
            "boundary_energy": num(report.boundary_energy),
            "clapeyron_gap": num(report.clapeyron_gap),
            "relative_clapeyron_gap": num(report.relative_clapeyron_gap()),
            "qw_gap": num(report.qw_gap),
            "measure": num(report.measure),
        }),
    )?;

    let inc = match &fine.geometry {
        Some(g) => inclusion_json(config, g, &fine.grid),
        None => json!({ "variant": "affine", "omega": Value::Null, "centers": [], "radii": [] }),
    };
    out.json("inclusion.json", inc)?;

    let columns = field_columns(fine.grid.dim());
    if let Some(pot) = &fine.potential {
        let h = pot.h.values();
        out.csv("potential.csv", columns, field_rows(&fine.grid, |i| h[i]))?;
    }
    let div = field_rows(&fine.grid, |i| fine.u.gradient(i).trace());
    out.csv("divergence.csv", columns, div)?;
    Ok(())
}
