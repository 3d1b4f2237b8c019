//! Mission-design pipeline for the GTOC11 problem: up to ten impulsive
//! motherships fly by small asteroids and drop transfer devices; the asteroids
//! then self-propel at a fixed 1e-4 m/s^2 onto a circular "Dyson ring" orbit
//! where twelve equally phased stations are built in sequence. The score
//! rewards the least massive station and penalizes mothership delta-v.
//!
//! The pipeline has four blocks:
//! 1. [`chains`] - beam search over Lambert flyby legs builds the mothership
//!    chains inside a GA-driven transcription of (dt_E2A, dt_A2A, a_D).
//! 2. [`rdv_table`] - for every visited asteroid, indirect time-optimal
//!    transfers ([`lowthrust`]) are collated over departure phase and spline
//!    interpolation locates every station rendezvous opportunity.
//! 3. [`dispatch`] - a GA/PSO-driven allocator assigns asteroids to stations,
//!    balancing station masses under the 90-day build sequencing constraint.
//! 4. [`final_refine`] - each transfer is re-converged as a true rendezvous
//!    and each mothership leg is offered one deep-space maneuver.
//!
//! [`mission`] holds the solution model, the constraint validator, the scorer,
//! and the file formats; the `gtoc11` binary exposes every stage as a CLI.

// Numeric guards are written `!(x > 0.0)` on purpose: a NaN must take the
// failure branch, which the un-negated `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod astro;
pub mod catalog;
pub mod chain_refine;
pub mod chains;
pub mod config;
pub mod dispatch;
pub mod error;
pub mod final_refine;
pub mod lowthrust;
pub mod mission;
pub mod optim;
pub mod pipeline;
pub mod rdv_table;
pub mod ring;
pub mod search;

pub use error::{Error, Result};

/// Cartesian 3-vector in km or km/s.
pub type V3 = nalgebra::Vector3<f64>;
