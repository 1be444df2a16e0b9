use twowell_core::fields::InclusionGeometry;

use super::{field_columns, field_rows, inclusion, inclusion_json};
use crate::config::{ConstructionSpec, ExperimentConfig};
use crate::error::LabError;
use crate::output::OutputDir;

/// Hashin-type packing on the finest grid of the ladder: `inclusion.json`
/// and the phase indicator as `phase.csv`.
///
/// Without a `hashin` construction in the configuration the packing uses
/// its `omega` (or 0.1) and a minimum radius of 0.05.
pub fn run(config: &ExperimentConfig, out: &mut OutputDir) -> Result<(), LabError> {
    let mut config = config.clone();
    if !matches!(config.construction, ConstructionSpec::Hashin { .. }) {
        let omega = match config.construction {
            ConstructionSpec::ConcentricBall { omega, .. } => omega,
            _ => 0.1,
        };
        config.construction = ConstructionSpec::Hashin {
            omega,
            min_radius: 0.05,
            target_coverage: 0.99,
        };
    }
    let n = *config.resolution.ladder.last().unwrap();
    let grid = config.grid(n)?;
    let Some(geometry) = inclusion(&config, &grid)? else {
        unreachable!("hashin construction always yields a geometry");
    };
    let InclusionGeometry::HashinPacking(_) = &geometry else {
        unreachable!("hashin construction yields a packing");
    };
    out.json("inclusion.json", inclusion_json(&config, &geometry, &grid))?;
    let phase1 = geometry.phase1_cells(&grid)?;
    let rows = field_rows(&grid, |i| if phase1[i] { 1.0 } else { 0.0 });
    out.csv("phase.csv", field_columns(grid.dim()), rows)?;
    Ok(())
}
