//! Pseudo-spectral Navier-Stokes solver for the periodic box with
//! physical-scale energy-cascade diagnostics.

pub mod agmon;
pub mod analysis;
pub mod budget;
pub mod covering;
pub mod cutoffs;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod solver;
pub mod spectral;
pub mod toy1d;

pub use analysis::{AnalysisOptions, RunAnalysis};
pub use error::{CoreError, Result};
pub use grid::Grid;
pub use solver::{RunSummary, SeriesRow, SimulationConfig};
