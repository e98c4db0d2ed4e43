//! Simulation of nonlinear acoustic waves in velocity-enthalpy form.
//!
//! The general model
//!
//! ```text
//! (1 - a h) dh/dt + c0^2 div v = b lap h - c v . grad h - d h div v,
//!           dv/dt + grad h     = 0,            h = 0 on the boundary,
//! ```
//!
//! covers the Westervelt, Kuznetsov and Rasmussen equations and the linear
//! damped wave equation. Space is discretized with discontinuous `P_k`
//! velocities and continuous `P_{k+1}` enthalpies, time with the implicit
//! midpoint rule and Newton's method.

pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod model;
pub mod timestepper;

pub use error::{Error, Result};
