//! Numerical laboratory for the critical p-Laplacian Dirichlet problem
//! `-Delta_p u = |u|^{p*-2} u` on annuli.

pub mod annulus;
pub mod bubbles;
pub mod calibration;
pub mod error;
pub mod ode;
pub mod radial;
pub mod sobolev;
pub mod symmetry;

pub use error::{Error, Result};
