pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod io;
pub mod landau;
pub mod memory;
pub mod multiplier;
pub mod norms;
pub mod perturbation;
pub mod spectral;
pub mod stencil;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::{sample, Maxwellian, ScalarField, SymTensorField, VectorField};
pub use landau::{landau_coefficients, landau_rhs, run_landau, LandauConfig, LandauOperator};
pub use norms::{moments, weighted_sobolev_norm, MomentsRecord, Weight};
pub use trajectory::{ConservationDrift, RunInfo, Trajectory};
pub use grid::{build_grid, VelocityGrid};
pub use memory::{memory_flux, memory_step, run_memory, stationarity_residual, HistoryBuffer, HistoryEntry, HistoryMode, MemoryConfig, MemoryState};
pub use multiplier::{build_landau_multiplier, build_memory_table, MemoryMultiplierTable, SpectralMultiplier, TableRequest};
pub use spectral::{Contraction, PaddedState, SpectralEngine, TensorResponse, Workspace};
