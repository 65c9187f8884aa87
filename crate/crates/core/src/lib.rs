//! Photon blockade in a driven cavity coupled to one atom through a Raman
//! transition, with a microwave field closing an interference loop.
//!
//! The model lives on a truncated Fock ⊗ spin-½ space; steady states and
//! trajectories come from the Lindblad master equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod interference;
pub mod liouvillian;
pub mod model;
pub mod observables;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};
pub use hilbert::{build_basis, Basis, Operator, Spin};
pub use interference::{
    analytic_g2, optimal_conditions, optimal_microwave, optimal_phase, weak_drive_amplitudes,
    OptimalConditions, WeakDriveAmplitudes,
};
pub use liouvillian::{
    build_liouvillian, propagate, steady_state, DensityMatrix, PropagationSettings, Superoperator,
};
pub use model::{hamiltonian, SystemParams};
pub use observables::{g2_tau, g2_zero, photon_dynamics, photon_number, CorrelationSeries};
pub use spectrum::{dressed_energy, dressed_splitting, numeric_spectrum, resonance_detuning, Branch, DressedLevel};
pub use sweep::{find_optimum, run_sweep, SweepResult, SweepSpec};
