//! Direct numerical integration of the delay equation: method of lines on a
//! periodic grid, embedded Cash-Karp 5(4) adaptive stepping, the delayed
//! term served by a cubic-Hermite ring over accepted steps, and observables
//! that reduce trajectories to plane-wave readouts.

mod grid;
mod history;
mod integrator;
mod observables;

pub use grid::{FieldState, Grid};
pub use history::{make_initial_history, HistoryBuffer, InitialHistory, Perturbation};
pub use integrator::{integrate, integrate_with, rhs, IntegrateOptions, SimOutput};
pub use observables::{estimate_planewave, Observables, PlanewaveEstimate};
