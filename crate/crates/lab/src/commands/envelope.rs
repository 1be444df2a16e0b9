use serde_json::json;
use twowell_core::energy::{
    analytic_common_tangent, eval_f, eval_phi, eval_phi_cvx, eval_qw0, numeric_common_tangent,
    recover_envelope_from_degeneracy, CommonTangent,
};
use twowell_core::SquareMatrix;

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::output::{num, OutputDir};

/// `envelope.csv` with `θ, f, Φ, Φ**, QW0` along the dilatation ray
/// `H = (θ/d) I` and the envelope rebuilt from acoustic degeneracy, plus
/// `tangent.json`.
pub fn run(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), LabError> {
    let (p, tangent) = config.tangent()?;
    let d = p.d();
    let e = &config.envelope;
    let (lo, hi) = p.potential().domain();
    let (a, b) = (e.theta_min.max(lo), e.theta_max.min(hi));
    if !(a < b) {
        return Err(LabError::Config(format!(
            "envelope range [{}, {}] misses the potential's domain [{lo}, {hi}]",
            e.theta_min, e.theta_max
        )));
    }
    let thetas: Vec<f64> = (0..e.samples)
        .map(|i| a + (b - a) * i as f64 / (e.samples - 1) as f64)
        .collect();
    let recovered = recover_envelope_from_degeneracy(&p, &tangent, &thetas)?;
    let mut rows = Vec::with_capacity(thetas.len());
    let mut recovery_error = 0.0f64;
    for (i, &theta) in thetas.iter().enumerate() {
        let cvx = eval_phi_cvx(theta, &tangent, &p)?;
        let ray = SquareMatrix::scaled_identity(d, theta / d as f64);
        recovery_error = recovery_error.max((recovered.envelope[i] - cvx).abs());
        rows.push(vec![
            theta,
            eval_f(theta, &p)?,
            eval_phi(theta, &p)?,
            cvx,
            eval_qw0(&ray, &p, &tangent)?,
            recovered.envelope[i],
        ]);
    }
    out.csv(
        "envelope.csv",
        &["theta", "f", "phi", "phi_cvx", "qw0_ray", "recovered"],
        rows,
    )?;

    let mut report = match &tangent {
        CommonTangent::Binodal(t) => json!({
            "binodal": true,
            "theta1": num(t.theta1),
            "theta2": num(t.theta2),
            "p0": num(t.p0),
            "intercept": num(t.intercept),
            "near_kink": t.near_kink,
        }),
        CommonTangent::NoBinodal => json!({ "binodal": false }),
    };
    let obj = report.as_object_mut().unwrap();
    obj.insert("d".into(), json!(d));
    obj.insert("mu".into(), num(p.mu()));
    obj.insert("recovery_max_error".into(), num(recovery_error));
    obj.insert(
        "recovery_slope_mismatch".into(),
        num(recovered.slope_mismatch),
    );
    if let Some(bq) = p.bi_quadratic_potential() {
        let exact = analytic_common_tangent(d, p.mu(), bq);
        if let Some(n) = numeric_common_tangent(&p)?.binodal() {
            obj.insert(
                "analytic_vs_numeric".into(),
                num((exact.theta1 - n.theta1)
                    .abs()
                    .max((exact.theta2 - n.theta2).abs())),
            );
        }
    }
    out.json("tangent.json", report)?;
    Ok(())
}
