//! Asymptotic-preserving finite-volume solver for the one-dimensional
//! Euler-Poisson-Boltzmann system and its reformulated variant.

pub mod config;
pub mod error;
pub mod grid;
pub mod harness;
pub mod hydro;
pub mod linalg;
pub mod poisson;
pub mod scheme;
pub mod soliton;
pub mod source;
pub mod stability;
pub mod state;

pub use config::{Boundary, Dissipation, GuessPolicy, NewtonParams, SchemeConfig, SourceTreatment, Variant};
pub use error::{Error, Result};
pub use grid::{make_grid, sample_on_grid, Grid1D};
pub use state::{Conserved, FluidState, PotentialField};
