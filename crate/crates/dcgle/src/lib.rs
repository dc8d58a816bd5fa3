//! Existence, bifurcation structure, and stability of plane waves in the 1-D
//! delayed cubic-quintic complex Ginzburg-Landau equation, verified by direct
//! method-of-lines simulation of the delay system.
//!
//! Layout: [`params`] and [`planewave`] hold the algebra every other layer
//! consumes; [`trivial`] treats the zero state; [`existence`] finds and traces
//! the delayed plane-wave family; [`stability`] implements the no-delay
//! quadratic, the finite-delay quasipolynomial, and the large-delay
//! strong/weak split; [`sim`] integrates the full delay PDE; [`io`] is the
//! scenario front end behind the `dcgle` binary.

pub mod error;
pub mod existence;
pub mod io;
pub mod params;
pub mod planewave;
pub mod sim;
pub mod stability;
pub mod trivial;

pub use error::{ConfigError, ModelError, ScenarioError, SimError};
pub use params::ModelParams;
pub use planewave::{
    nodelay_amplitude, planewave_from_theta, residual_pw, tube_residual, BranchTag, PlaneWave,
};
