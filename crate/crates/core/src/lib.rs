//! Spectral analysis of Dirac-type boundary value problems
//! `y' = (iλB(x) − Q(x)) y`, `Cy(0) + Dy(ℓ) = 0`, and of the damped
//! Timoshenko beam reduced to such a problem.

pub mod boundary;
pub mod bvp;
pub mod classify;
pub mod cli;
pub mod error;
pub mod expoly;
pub mod func;
pub mod fundamental;
pub mod kernels;
pub mod linalg;
pub mod ode;
pub mod potential;
pub mod riesz;
pub mod profile;
pub mod report;
pub mod spectra;
pub mod timoshenko;
pub mod zeros;

pub use error::{Error, Result};
