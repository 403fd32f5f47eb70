//! Truncated Hilbert space, operators and superoperators of the
//! Jaynes-Cummings model.

mod basis;
mod density;
mod frame;
mod operators;
mod params;
mod superop;

pub use basis::{excitation_of, BasisIndex, Tls};
pub use density::{DensityMatrix, Tolerances};
pub use frame::{rotate_to_lab, Frame};
pub use operators::{build_operators, OperatorSet};
pub use params::SystemParams;
pub use superop::{excitation_block, hermitian_flow, jump_transfer, lindblad_dissipator, rung_projector};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
