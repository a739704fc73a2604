//! Dense linear algebra on a handful of qubits.
//!
//! Qubit 0 is the most significant bit of a basis index and the leftmost
//! tensor factor.

pub mod channel;
pub mod gate;
pub mod pauli;
pub mod state;

pub type C64 = num_complex::Complex64;

pub use channel::NoisyRotationChannel;
pub use gate::{phase_insensitive_distance, rot_y, theta, Gate};
pub use pauli::{Pauli, PauliString};
pub use state::{
    diagonal_error, magic_state, magic_state_bar, plus_state, trace_distance, zero_state, DensityOperator,
};
