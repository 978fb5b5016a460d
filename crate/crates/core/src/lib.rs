//! Trap parameters, particle temperature, noise spectral densities and
//! phonon-number budgets for levitated-nanoparticle optomechanics.
//!
//! Two optical systems are modelled:
//!
//! * a nanosphere held at an antinode of a confocal Fabry-Perot mode and
//!   sideband-cooled by a second, weaker mode ([`cavity`]);
//! * a nanosphere held at the focus of a lens and cold-damped by
//!   electronic feedback on the laser power ([`feedback`]).
//!
//! Closed-form results are cross-checked by a classical Langevin Monte
//! Carlo integrator in [`langevin`]. All quantities are SI; unit-suffixed
//! inputs are converted once, in [`config`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cavity;
pub mod cli;
pub mod config;
pub mod constants;
pub mod emit;
pub mod error;
pub mod feedback;
pub mod langevin;
pub mod optics;
pub mod optimize;
pub mod quadrature;
pub mod records;
pub mod report;
pub mod scenario;
pub mod spectra;
pub mod thermo;

pub use error::{Error, Result};
pub use scenario::{
    CavitySetup, DetectorLayout, FeedbackGains, GasEnvironment, LensSetup, Optics, Particle,
    Scenario,
};
