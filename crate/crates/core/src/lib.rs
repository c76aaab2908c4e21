//! Lattice simulator for the rescaled self-dual abelian Higgs functional on
//! flat tori with twisted line bundles.

pub mod diagnostics;
pub mod error;
pub mod functional;
pub mod gauge;
pub mod io;
pub mod lattice;
pub(crate) mod par;
pub mod planar;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
