//! Simulation of a heralded single-photon source built from two-photon
//! absorption (TPA).
//!
//! Two weak laser pulses pass through long TPA filter cells that leave
//! mostly vacuum or a single photon in each pulse. The filtered pulses
//! then enter a quantum Zeno SWAP' gate placed between two Hadamard beam
//! splitters, which acts as a CNOT on dual-rail target modes. A click in
//! the target logical-0 detector heralds a single photon in the control
//! output.
//!
//! Module map:
//! - [`fock`]: truncated Fock space, photon-number distributions, density matrices.
//! - [`numerics`]: Liouvillian construction and two independent integrators.
//! - [`filter`]: TPA filter cell acting on phase-averaged coherent pulses.
//! - [`circuit`]: Hadamards, the SWAP' Zeno gate and the full heralding circuit.
//! - [`metrics`]: threshold detectors and source figures of merit.
//! - [`sweep`]: parameter sweeps producing CSV tables.
//! - [`verify`]: the invariant suite behind the `verify` command.

pub mod circuit;
pub mod error;
pub mod filter;
pub mod fock;
pub mod metrics;
pub mod numerics;
pub mod sweep;
pub mod verify;

pub use circuit::{run_circuit, swap_prime, CircuitOutput, GateParams, HeraldingCircuit, ZenoGate};
pub use error::{Error, Result};
pub use filter::{filter_evolve, filter_multi_residual, FilterOutput, FilterParams};
pub use fock::{DensityMatrix, Mode, Occupation, PhotonDistribution, StateSpace};
pub use metrics::{source_point, DetectorParams, SourceMetrics};
pub use numerics::{
    build_liouvillian, evolve_expm, evolve_rk4, DecayChannel, DecayKind, Liouvillian,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
