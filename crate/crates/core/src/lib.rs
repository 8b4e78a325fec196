//! Periodic travelling waves of discrete nonlinear Schrödinger rings.
//!
//! The envelope `Phi` of a wave `psi_n(t) = exp(i q u) Phi(u)`, `u = n - omega t`,
//! solves `L Phi = F(|Phi|^2) Phi` where `L` is a Fourier multiplier. This crate
//! solves that equation by fixed-point iteration of `L^{-1} o N`, checks the
//! existence conditions on `omega`, embeds the result on a ring and verifies it
//! against direct integration of the lattice.

pub mod cli;
pub mod embedding;
pub mod error;
pub mod integrator;
pub mod lattice;
pub mod nonlinearity;
pub mod profile;
pub mod solver;
pub mod spectral;
pub mod theorem;

pub use error::{Error, Result};
pub use lattice::{LatticeConfig, LatticeState};
pub use nonlinearity::Nonlinearity;
pub use profile::Profile;
pub use spectral::WaveParameters;
