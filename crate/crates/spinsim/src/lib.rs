//! Simulation and optimization core for piecewise-constant control of XXZ
//! spin chains.
//!
//! The crate compiles per-slice control fields into a first-order Trotter
//! circuit (nearest-neighbor `RXX`/`RYY`/`RZZ` drift blocks followed by
//! on-site `RZ` controls), simulates it on a statevector or density-matrix
//! backend, and minimizes the terminal infidelity `J = 1 - F` with a native
//! box-constrained quasi-Newton method driven by finite-difference gradients.
//!
//! Everything here is pure computation over heap buffers; IO, configs, and
//! the experiment CLI live in the companion `spinctl` crate.
//!
//! Conventions used throughout:
//! - site 0 is the leftmost chain site and maps to the most-significant bit
//!   of a basis index, so `|100⟩` on three qubits is basis index 4;
//! - rotations use the half-angle convention, `RZ(φ) = exp(-i φ Z/2)` and
//!   `RPP(φ) = exp(-i φ P⊗P/2)`, so the slice factor `exp(-i u Z Δt)`
//!   compiles to `RZ(2 u Δt)`.
#![no_std]

extern crate alloc;

pub mod chain;
pub mod density;
pub mod error;
pub mod objective;
pub mod optimize;
pub mod oracle;
pub mod params;
pub mod state;

pub use chain::{ChainSpec, Circuit, SliceControls};
pub use density::{DensityMatrix, NoiseSpec};
pub use error::{Error, Result};
pub use objective::ObjectiveSpec;
pub use optimize::{
    eval_cost_check, fd_gradient, mean_trace, minimize, optimize_controls, time_to_threshold,
    EvalCostReport, OptTrace, StopReason, StopRule,
};
pub use params::{GlobalScheme, LocalScheme, ParamVector, Scheme};
pub use state::{GateDescriptor, GateKind, StateVector};
