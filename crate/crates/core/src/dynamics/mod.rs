//! Time integration of the coupled velocity/director system.

mod config;
mod solver;
mod state;

pub use config::{DtPolicy, SolverConfig};
pub use solver::{RunOutcome, Solver, StepOutcome, Termination};
pub use state::State;

#[cfg(test)]
mod tests;
