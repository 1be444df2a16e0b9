//! Grid realisations of two-phase equilibria: the potential `h` with
//! `Δh = (θ1 − θ2)(χ_A − ω)`, `h ∈ W0^{2,2}(Ω)`, the displacement
//! `u = H0 x + ∇h` and its energy.

mod displacement;
mod equilibrium;
mod grid;
mod inclusion;
mod potential;
mod radial;

pub use displacement::{displacement_field, total_energy, VectorField};
pub use equilibrium::{
    equilibrium_certificate, equilibrium_certificate_with, EquilibriumOptions, EquilibriumReport,
    Histogram,
};
pub use grid::{BoundaryCell, BoundaryFace, DomainShape, GridDomain, PADDING};
pub use inclusion::{
    assemble_hashin, assemble_hashin_with, ball_volume, Ball, HashinOptions, HashinPacking,
    InclusionGeometry,
};
pub use potential::{
    build_potential, free_boundary_defect, solve_dirichlet_poisson, PotentialField, ScalarField,
    SolverStats,
};
pub use radial::{radial_h, RadialJet, RadialProfile};
