//! Coherent-state optical qubits.
//!
//! Logical qubits are encoded as `|0⟩ = |−α⟩`, `|1⟩ = |α⟩`. Two independent
//! representations are provided and cross-checked against each other:
//!
//! * [`fock`]: dense amplitudes over a truncated photon-number basis, able to
//!   hold any state including squeezed light.
//! * [`coherent`]: exact finite superpositions of multimode coherent states,
//!   closed under displacements, beamsplitters, phase shifts and photon
//!   counting.
//!
//! On top of these, [`gates`] builds the teleportation-based gate set and its
//! fidelity analysis, [`catgen`] generates cats by conditional subtraction from
//! squeezed vacuum, and [`loss`] models photon loss and its correction.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catgen;
pub mod coherent;
mod error;
pub mod fock;
pub mod gates;
pub mod loss;
pub mod numeric;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
