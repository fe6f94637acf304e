//! Geometric quantum discord of qutrit pairs under non-Markovian amplitude
//! damping, and its protection by weak measurement and measurement reversal.
//!
//! Basis convention: qutrit levels are stored in the order `|2⟩, |1⟩, |0⟩`,
//! so `|0⟩` (the ground state) has matrix index 2. Two-qutrit states use the
//! Kronecker order `|ab⟩ → 3·(2−a) + (2−b)`.

pub mod bloch;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod reservoir;
pub mod states;
pub mod sweep;

pub use bloch::{gqd_lower_bound, gqd_two_qubit};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix};
pub use protocol::{protect_single, protect_two_qutrit, WeakMeasurementParams};
pub use reservoir::{decay_functions, DecaySnapshot, ReservoirParams};
pub use sweep::{run_sweep, Family, Mode, SweepConfig, SweepRecord};
