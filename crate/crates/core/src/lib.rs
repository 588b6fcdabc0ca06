//! Numerical laboratory for semi-classical spinning-particle models.
//!
//! The crate is organised by subsystem:
//!
//! * [`tensor`]: 3-vectors, Minkowski tensors, spin tensors, Pauli/Dirac matrices.
//! * [`spin`]: precession and the alignment interaction, with closed-form oracles.
//! * [`brackets`]: Poisson structures with spin-induced noncommutativity.
//! * [`accel`]: longitudinal acceleration versus speed and power-law fits.
//! * [`spacetime`] and [`curved`]: Schwarzschild curvature and spinning-body dynamics.
//! * [`qm`]: positive-energy quantum mechanics, Pryce operators and the
//!   Foldy-Wouthuysen restriction.
//! * [`check`] and [`suite`]: residual reports and the aggregate self-check.

pub mod accel;
pub mod brackets;
pub mod check;
pub mod curved;
pub mod error;
pub mod fit;
pub mod ode;
pub mod qm;
pub mod rng;
pub mod spacetime;
pub mod spin;
pub mod suite;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{AntisymTensor4, FourVector, Vec3};
