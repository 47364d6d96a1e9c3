//! Phonon-mediated, tunable Ising interactions in one-dimensional crystals of
//! polar molecules.
//!
//! The crate is organized bottom-up:
//!
//! * [`crystal`]: equilibrium positions and phonon modes (harmonic and ring traps)
//! * [`couplings`]: bare, spin-phonon and phonon-mediated couplings, valid detuning windows
//! * [`dynamics`]: closed-form spin-phonon evolution without transverse field
//! * [`oracle`]: brute-force integration on a truncated Fock space
//! * [`spinmodel`]: transverse-field Ising model, ground states and adiabatic sweeps
//! * [`ring`]: coupling profiles and displacement estimates for the ring crystal
//! * [`rotor`]: rigid-rotor Stark maps and the dipole sweet spot

pub mod couplings;
pub mod crystal;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod oracle;
pub mod ring;
pub mod rotor;
pub mod spinmodel;

pub use error::{Error, Result};
