//! Ground-state properties of grid-discretized matter coupled to a
//! discretized multimode photon continuum, in the long-wavelength limit of
//! non-relativistic QED.
//!
//! The crate builds sparse real-symmetric Hamiltonians for three model
//! systems (a soft-Coulomb atom, a clamped-nuclei H2 molecule, a 2D quantum
//! ring), couples them to photon mode sets in the length or velocity gauge,
//! and compares three approximation strategies against exact diagonalization:
//!
//! * `m_dse` — matter plus mean-field dipole self-energy, no photon space;
//! * `nrqed_low` — keep only the lowest-frequency mode per polarization;
//! * `nrqed_ave` — one effective mode per polarization with the mean
//!   frequency and root-sum-square coupling.
//!
//! Everything is in Hartree atomic units internally; meV/nm are converted at
//! the configuration boundary (see [`units`]).

// `!(x > 0.0)` rejects NaN where `x <= 0.0` would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod grid;
pub mod matter;
pub mod observables;
pub mod output;
pub mod par;
pub mod photons;
pub mod solver;
pub mod sparse;
pub mod units;

pub use error::{Error, Result};
pub use grid::{Grid1D, Grid2D};
pub use matter::{AtomModel, MatterOperator, MoleculeModel, QuantumRingModel};
pub use photons::{PhotonBath, PhotonMode};
pub use solver::{GroundState, SolverConfig};
