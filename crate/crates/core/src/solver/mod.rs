//! Time integration of the forced Navier-Stokes equations.

pub mod config;
pub mod force;
pub mod forcing;
pub mod integrator;
pub mod io;
pub mod run;

pub use config::{
    ForceTarget, ForcingConfig, InitialCondition, NonlinearFormConfig, ShellKind, SimulationConfig,
};
pub use force::{force_shape_factors, make_force, ForceNorms, ForceProfile, ShapeContext, ShapeFactors};
pub use forcing::{Forcing, ManufacturedSolution};
pub use integrator::Integrator;
pub use run::{
    attractor_bound, initial_field, run, AttractorStatus, BudgetRow, NullSink, RunSummary,
    SeriesRow, Simulation, Snapshot, SnapshotSink, StoredSnapshot, Trajectory,
};
