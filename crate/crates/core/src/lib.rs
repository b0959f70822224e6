//! Interface-fitted finite elements with an interface-adaptive multigrid
//! solver for elliptic problems with discontinuous coefficients.

pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod linsolve;
pub mod meshgen;
pub mod mg;
pub mod quality;
pub mod sparse;

pub use error::{Error, Result};
