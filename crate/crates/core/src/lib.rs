//! Open-system dynamics of the Jaynes-Cummings ladder under three descriptions:
//! the Lindblad master equation, the normalised non-Hermitian flow, and the
//! non-Hermitian Hamiltonian with explicit jump (recycling) terms.
//!
//! Start with [`quantum`] for the model and [`lindblad`], [`nhqm`], [`nheh`] for
//! the flows. The `examples/` directory has one runnable program per capability.

pub mod checks;
pub mod dynamics;
pub mod error;
pub mod generator;
pub mod integrator;
pub mod linalg;
pub mod lindblad;
pub mod metrics;
pub mod nheh;
pub mod nhqm;
pub mod quantum;
pub mod scenarios;
pub mod sector;
pub mod steady_state;

pub use error::{Error, ErrorCategory, Result};
