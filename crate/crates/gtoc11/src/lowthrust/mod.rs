//! Indirect (costate-based) constant-acceleration transfer machinery:
//! equinoctial dynamics with forward-mode derivatives, an adaptive
//! Dormand–Prince integrator, a damped finite-difference Newton, and the
//! shooting solvers built on them.

mod dual;
mod mee;
mod ode;
mod shooting;
mod solve;

pub use dual::{Dual6, Real};
pub use mee::{
    augmented_rhs, bt_lambda, gauss_ab, hamiltonian_energy, hamiltonian_time_optimal,
    optimal_control, Problem,
};
pub use ode::{integrate, integrate_observed, OdeOptions};
pub use shooting::{newton_fd, NewtonOptions, NewtonOutcome};
pub use solve::{
    AugmentedState, EnergySolution, LowThrustSolver, SolverOptions, TransferSolution,
};
