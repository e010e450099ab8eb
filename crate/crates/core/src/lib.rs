//! Trion-polariton quantum optics in a single-mode cavity.
//!
//! The light–matter coupling of a trion excitation built on a Fermi sea of
//! `N_s` electrons saturates with filling. This crate builds that model on a
//! truncated Fock space and computes
//!
//! * manifold-resolved transition spectra and the collapse of the Rabi
//!   doublet at high photon number ([`manifold`]),
//! * driven–dissipative steady states, g²(0) and g²(τ) ([`lindblad`]),
//! * detuning scans and blockade minimization ([`sweep`]),
//! * model parameters from TMD material constants ([`materials`]).
//!
//! Energies are in a single user-chosen unit with ħ = 1; most examples use
//! units of the cavity decay rate γ_c.

pub mod error;
pub mod fockspace;
pub mod lindblad;
pub mod manifold;
pub mod materials;
pub mod sparse;
pub mod sweep;

pub use error::{Error, Result};
pub use fockspace::{
    build_hamiltonian, coupling_factor, photon_lowering, trion_lowering, Basis, EnergyUnit, Frame,
    ModelParams, SparseOperator, Truncation,
};
pub use sparse::CsrMatrix;

pub type C64 = num_complex::Complex<f64>;
