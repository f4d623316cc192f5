//! Finite-volume laboratory for radial solutions on the unit ball and the
//! spectrum of their linearization, sector by sector.

pub mod checks;
pub mod mesh;
pub mod sector;
pub mod solve;
pub mod sweep;

pub use checks::{
    eigenfunction_profiles, outer_limits_check, solution_decay, OuterReport, ProfileReport,
};
pub use mesh::RadialMesh;
pub use sector::{
    assemble_bands, harmonic_multiplicity, sector_eigen, AssembledBands, BandEntry, SectorSpectrum,
};
pub use solve::{
    continuation_guess, default_core_width, lambda0, projected_bubble_guess, solve_default,
    solve_radial, FiniteVolume, RadialSolution,
};
pub use sweep::{sweep, sweep_point, sweep_with, SweepOptions, SweepPoint, SweepReport, SweepSolve};

use crate::numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("epsilon {0} is outside (0, 0.3]")]
    Epsilon(f64),
    #[error("newton: {0}")]
    Newton(String),
    #[error("solution is not positive at node {0}")]
    NonPositive(usize),
    #[error("solution scale {scale:e} spans only {nodes} mesh nodes")]
    Unresolved { scale: f64, nodes: usize },
    #[error("bands: {0}")]
    Bands(String),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
