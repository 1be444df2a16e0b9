use serde_json::json;
use twowell_core::energy::{eval_qw0, eval_w0, in_binodal};
use twowell_core::relaxation::{build_laminate, periodic_energy};

use crate::config::{ConstructionSpec, ExperimentConfig};
use crate::error::LabError;
use crate::output::{num, nums, OutputDir};

const PROFILE_SAMPLES: usize = 200;

/// Simple laminate for `H0`: `laminate.json` with the microstructure and
/// its cell-averaged energy against `QW0(H0)`, and `laminate_profile.csv`
/// across one period.
pub fn run(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), LabError> {
    let (p, tangent) = config.tangent()?;
    let d = p.d();
    let h0 = config.h0(&tangent)?;
    let bound = eval_qw0(&h0, &p, &tangent)?;
    let w0 = eval_w0(&h0, &p)?;
    if !in_binodal(&h0, &tangent) {
        out.json(
            "laminate.json",
            json!({
                "laminate_needed": false,
                "trace_h0": num(h0.trace()),
                "w0": num(w0),
                "qw0": num(bound),
            }),
        )?;
        return Ok(());
    }
    let normal = match &config.construction {
        ConstructionSpec::Laminate { normal } => normal.clone(),
        _ => {
            let mut e1 = vec![0.0; d];
            e1[0] = 1.0;
            e1
        }
    };
    let lam = build_laminate(&h0, &tangent, &normal)?;
    let energy = periodic_energy(&lam, &h0, &p, 64)?;
    let h1 = h0 + lam.m1;
    let h2 = h0 + lam.m2;
    let (w1, w2) = (eval_w0(&h1, &p)?, eval_w0(&h2, &p)?);
    out.json(
        "laminate.json",
        json!({
            "laminate_needed": true,
            "trace_h0": num(h0.trace()),
            "normal": nums(&lam.normal[..d]),
            "omega": num(lam.omega),
            "theta1": num(lam.theta1),
            "theta2": num(lam.theta2),
            "m1": nums(lam.m1.as_slice()),
            "m2": nums(lam.m2.as_slice()),
            "mean_defect": num(lam.mean_defect()),
            "compatibility_defect": num(lam.compatibility_defect()),
            "periodic_energy": num(energy),
            "w0": num(w0),
            "qw0": num(bound),
            "gap": num(energy - bound),
        }),
    )?;
    let rows = (0..PROFILE_SAMPLES).map(|i| {
        let s = (i as f64 + 0.5) / PROFILE_SAMPLES as f64;
        let (trace, w) = if s < lam.omega {
            (h1.trace(), w1)
        } else {
            (h2.trace(), w2)
        };
        vec![s, trace, w]
    });
    out.csv("laminate_profile.csv", &["s", "trace", "energy"], rows)?;
    Ok(())
}
