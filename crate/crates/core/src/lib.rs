//! Pauli blocking of light scattering in a harmonically trapped, degenerate
//! Fermi gas.
//!
//! The crate computes the suppression factor `S(k)` of spontaneous scattering
//! with momentum transfer `k`, its angular, temperature and confinement
//! dependence, spatially resolved column images, a pre-pulse Monte Carlo,
//! and the optical budget of the probe. Reduced units are used throughout:
//! energies in `E_F`, momenta in `hbar k_F`, temperatures as `T / T_F`.

pub mod blockade;
pub mod cli;
pub mod error;
pub mod gas;
pub mod observables;
pub mod optics;
pub mod profile;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
