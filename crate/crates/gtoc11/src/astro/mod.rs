//! Orbital mechanics foundation: physical constants, epochs, element sets and
//! their conversions, conic propagation, the two-point boundary value solver,
//! and analytic low-thrust estimates.

mod consts;
mod edelbaum;
mod elements;
mod epoch;
mod lambert;
mod propagate;

pub use consts::Constants;
pub use edelbaum::{asteroid_mass, edelbaum, plane_change_angle};
pub use elements::{
    cart_to_kep, eccentric_from_true, kep_to_cart, kep_to_mee, mee_to_cart, mee_to_kep,
    solve_kepler, true_from_eccentric, wrap_2pi, wrap_pi, CartesianState, EquinoctialState,
    KeplerianElements, TAU,
};
pub use epoch::Epoch;
pub use lambert::{lambert, lambert_all, Branch, Direction, LambertSolution};
pub use propagate::propagate_kepler;
