//! Model coefficients, discrete state, and the weak-form terms of the
//! velocity-enthalpy system.

pub mod forms;
pub mod params;
pub mod state;

pub use forms::{Discretization, PowerBalance};
pub use params::{DegeneracyPolicy, ModelKind, ModelParams, ScalarSource, VectorSource};
pub use state::State;
