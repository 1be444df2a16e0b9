//! One module per subcommand. Each writes its files into the output
//! directory and returns the list of paths through [`OutputDir`].

pub mod envelope;
pub mod hashin;
pub mod laminate;
pub mod minimizer;
pub mod square;

use serde_json::{json, Value};
use twowell_core::fields::{assemble_hashin_with, GridDomain, HashinOptions, InclusionGeometry};

use crate::config::{ConstructionSpec, ExperimentConfig};
use crate::error::LabError;
use crate::output::{num, nums};

/// Phase-1 set for the configured construction on `grid`; `None` for the
/// affine field.
pub(crate) fn inclusion(
    config: &ExperimentConfig,
    grid: &GridDomain,
) -> Result<Option<InclusionGeometry>, LabError> {
    let d = grid.dim();
    let geometry = match &config.construction {
        ConstructionSpec::ConcentricBall {
            omega,
            phase1_inside,
        } => InclusionGeometry::concentric_ball(d, *omega, *phase1_inside)?,
        ConstructionSpec::Hashin {
            omega,
            min_radius,
            target_coverage,
        } => assemble_hashin_with(
            grid,
            &HashinOptions {
                omega: *omega,
                min_radius: *min_radius,
                target_coverage: *target_coverage,
                max_balls: 1 << 20,
                seed: config.seed,
            },
        )?,
        ConstructionSpec::BallMask { center, radius } => {
            if center.len() != d {
                return Err(LabError::Config(format!(
                    "ball_mask center needs {d} entries"
                )));
            }
            InclusionGeometry::ball_mask(grid, center, *radius)?
        }
        ConstructionSpec::Affine => return Ok(None),
        ConstructionSpec::Laminate { .. } => {
            return Err(LabError::Config(
                "a laminate is not a grid field; use the laminate command".into(),
            ))
        }
    };
    Ok(Some(geometry))
}

/// `{variant, centers, radii, omega}` plus variant-specific details.
pub(crate) fn inclusion_json(
    config: &ExperimentConfig,
    geometry: &InclusionGeometry,
    grid: &GridDomain,
) -> Value {
    let d = grid.dim();
    let mut v = json!({ "variant": geometry.variant(), "omega": num(geometry.omega()) });
    let obj = v.as_object_mut().unwrap();
    let (centers, radii): (Vec<Value>, Vec<Value>) = match geometry {
        InclusionGeometry::ConcentricBall {
            r0, phase1_inside, ..
        } => {
            obj.insert("phase1_inside".into(), json!(phase1_inside));
            (vec![nums(&vec![0.0; d])], vec![num(*r0)])
        }
        InclusionGeometry::HashinPacking(p) => {
            obj.insert("coverage".into(), num(p.coverage));
            obj.insert("target_coverage".into(), num(p.target));
            obj.insert("reached_target".into(), json!(p.reached_target));
            obj.insert("min_radius".into(), num(p.min_radius));
            obj.insert("core_ratio".into(), num(p.core_ratio(d)));
            obj.insert("analytic_coverage".into(), num(p.analytic_coverage(grid)));
            p.balls
                .iter()
                .map(|b| (nums(&b.center[..d]), num(b.radius)))
                .unzip()
        }
        InclusionGeometry::ExplicitMask { phase1, .. } => {
            obj.insert(
                "phase1_cells".into(),
                json!(phase1.iter().filter(|&&f| f).count()),
            );
            match &config.construction {
                ConstructionSpec::BallMask { center, radius } => {
                    (vec![nums(center)], vec![num(*radius)])
                }
                _ => (Vec::new(), Vec::new()),
            }
        }
    };
    obj.insert("centers".into(), Value::Array(centers));
    obj.insert("radii".into(), Value::Array(radii));
    v
}

/// Rows `x, y[, z], value` over the cells of `Ω`.
pub(crate) fn field_rows(grid: &GridDomain, value: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
    let d = grid.dim();
    grid.inside()
        .iter()
        .map(|&i| {
            let mut row = grid.center(i)[..d].to_vec();
            row.push(value(i));
            row
        })
        .collect()
}

pub(crate) fn field_columns(d: usize) -> &'static [&'static str] {
    match d {
        2 => &["x", "y", "value"],
        3 => &["x", "y", "z", "value"],
        _ => &["x", "y", "z", "w", "value"],
    }
}
