//! Finite-dimensional open quantum system dynamics: Liouville-space linear
//! algebra, dynamical maps and their complete positivity, GKSL generators,
//! Liouvillian spectra, weak-coupling (Davies) derivations and non-Markovian
//! evolution schemes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod gksl;
pub mod liouville;
pub mod maps;
pub mod nonmarkov;
pub mod par;
pub mod quad;
pub mod random;
pub mod spectra;
pub mod weak_coupling;

pub use error::{Error, Result};
pub use liouville::{DensityMatrix, Operator, Superoperator, C64};
