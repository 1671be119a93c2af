//! Numerical workbench for joint measurements of noncommuting observables
//! built from quantum cloning machines.
//!
//! Two pipelines are provided:
//!
//! - [`spin`]: the universal symmetric 1→3 qubit cloner, the discrete
//!   eight-outcome POVM obtained by measuring the three clones along
//!   orthogonal axes, and variance scoring of the resulting joint spin
//!   measurement against the spin-coherent-state bound.
//! - [`boson`] (on top of the truncated Fock-space toolkit in [`fock`]):
//!   a 1→2 cloner for a bosonic mode that is covariant under displacements
//!   only, the continuous POVM it induces when conjugate quadratures are
//!   measured on the two clones, and the operator-valued moment identities
//!   showing the measurement adds the minimum noise allowed by the
//!   commutator.
//!
//! Everything is dense, deterministic, and validated by residuals against
//! closed forms or independent numerical oracles; [`harness`] packages the
//! checks into reproducible reports with machine-readable pass/fail status.

pub mod boson;
pub mod fock;
pub mod harness;
pub mod quad;
pub mod report;
pub mod spin;
pub mod tensor;

pub use tensor::{Operator, TensorError, Vector};
