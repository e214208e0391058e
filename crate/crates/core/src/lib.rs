//! Entanglement entropy and single-copy entanglement of XY spin chains.
//!
//! The pipeline runs `model` → `corr` → `spectra`: a chain's couplings fix
//! the ground-state correlations of a block, whose single-particle spectrum
//! determines the entropy and the largest eigenvalue of the reduced state.
//! `cft` fits the resulting block-size scaling, `offcritical` covers the
//! gapped phase, and `oracle` checks everything against exact
//! diagonalization of small chains.

pub mod cft;
pub mod cli;
pub mod corr;
pub mod error;
pub mod linalg;
pub mod model;
pub mod offcritical;
pub mod oracle;
pub mod quadrature;
pub mod spectra;

pub use corr::{block_spectrum, SingleParticleSpectrum, SymbolTable};
pub use error::{Error, Result};
pub use model::{CriticalityClass, Family, ModelSpec, Universality};
pub use spectra::{report, EntanglementReport};
