//! Reconstruction and estimation of quantum states from incomplete data.
//!
//! Three estimation families live here:
//!
//! * maximum-entropy reconstruction on observation levels ([`maxent`], [`spin`],
//!   [`tomography`]),
//! * Bayesian posterior-mean estimation from finite measurement records ([`bayes`]),
//! * optimal finite POVMs for spin-coherent and phase estimation ([`povm`]).
//!
//! Units: ħ = 1, `q = (a + a†)/√2`, `p = (a − a†)/(i√2)`, Wigner functions
//! normalized so that the vacuum peaks at 2.

pub mod bayes;
pub mod cli;
pub mod hilbert;
pub mod io;
pub mod maxent;
pub mod povm;
pub mod special;
pub mod spin;
pub mod states;
pub mod tomography;
pub mod wigner;
