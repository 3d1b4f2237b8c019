//! The destination ring: `n_stations` equally phased stations on one circular
//! heliocentric orbit.  Station 1's phase is pinned at the window start; the
//! rest trail it by equal fractions of the circumference.

use crate::astro::{
    kep_to_cart, CartesianState, Constants, Epoch, EquinoctialState, KeplerianElements, TAU,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingConfig {
    /// Ring radius, AU.
    pub a_d: f64,
    /// Ring plane inclination, rad.
    pub i_d: f64,
    /// Ring plane node, rad.
    pub raan_d: f64,
    /// Argument of latitude of station 1 at the window start, rad.
    pub phi_s1: f64,
    pub n_stations: usize,
}

impl Default for RingConfig {
    fn default() -> Self {
        RingConfig {
            a_d: 1.05,
            i_d: 0.0,
            raan_d: 0.0,
            phi_s1: 0.0,
            n_stations: 12,
        }
    }
}

impl RingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_d.is_finite() && self.a_d > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ring radius {} AU out of range",
                self.a_d
            )));
        }
        if self.n_stations == 0 {
            return Err(Error::InvalidArgument("ring needs at least one station".into()));
        }
        for (name, v) in [("i_d", self.i_d), ("raan_d", self.raan_d), ("phi_s1", self.phi_s1)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("ring angle {name} not finite")));
            }
        }
        Ok(())
    }

    /// Mean motion shared by all stations, rad/s.
    pub fn mean_motion(&self, c: &Constants) -> f64 {
        (c.mu_sun / (self.a_d * c.au).powi(3)).sqrt()
    }

    pub fn period_s(&self, c: &Constants) -> f64 {
        TAU / self.mean_motion(c)
    }

    /// Orbit of station `j` (0-based) as Keplerian elements referenced to the
    /// window start.
    pub fn station_elements(&self, j: usize, c: &Constants) -> KeplerianElements {
        KeplerianElements {
            a_au: self.a_d,
            e: 0.0,
            i: self.i_d,
            raan: self.raan_d,
            argp: 0.0,
            m0: self.phi_s1 + j as f64 * TAU / self.n_stations as f64,
            ref_epoch: c.window_start(),
        }
    }

    pub fn station_state(&self, j: usize, t: Epoch, c: &Constants) -> Result<CartesianState> {
        kep_to_cart(&self.station_elements(j, c), t, c)
    }

    /// Equinoctial elements of station `j` at the window start (its true
    /// longitude advances at the ring's mean motion).
    pub fn station_mee(&self, j: usize, c: &Constants) -> EquinoctialState {
        let ti2 = (self.i_d / 2.0).tan();
        EquinoctialState {
            p: self.a_d * c.au,
            f: 0.0,
            g: 0.0,
            h: ti2 * self.raan_d.cos(),
            k: ti2 * self.raan_d.sin(),
            l: self.raan_d + self.phi_s1 + j as f64 * TAU / self.n_stations as f64,
        }
    }

    /// Unwrapped true longitude of station `j` at epoch `t`.
    pub fn station_true_longitude(&self, j: usize, t: Epoch, c: &Constants) -> f64 {
        self.station_mee(j, c).l + self.mean_motion(c) * t.seconds_since(c.window_start(), c.day)
    }
}
