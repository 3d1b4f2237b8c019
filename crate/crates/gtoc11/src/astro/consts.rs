use serde::{Deserialize, Serialize};

/// Physical constants and mission limits. Values are the GTOC-conventional
/// ones; every field can be overridden through the pipeline config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    /// Sun gravitational parameter, km^3/s^2.
    pub mu_sun: f64,
    /// Astronomical unit, km.
    pub au: f64,
    /// Day length, s.
    pub day: f64,
    /// Year length, days.
    pub year_days: f64,
    /// ATD acceleration, m/s^2 (constant once active).
    pub f_atd: f64,
    /// Asteroid mass decay rate while thrusting, 1/s.
    pub alpha: f64,
    /// Flyby relative-speed cap, km/s.
    pub v_flyby_max: f64,
    /// Free Earth-departure impulse cap, km/s.
    pub v_launch_max: f64,
    /// Minimum solar distance, AU.
    pub r_min: f64,
    /// Minimum ring radius, AU.
    pub a_d_min: f64,
    /// ATD activation delay after the flyby, days.
    pub atd_delay: f64,
    /// Minimum gap between consecutive station completions, days.
    pub station_gap_min: f64,
    /// Mission window start, MJD.
    pub t_start_mjd: f64,
    /// Mission window length, years.
    pub window_years: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            mu_sun: 1.32712440018e11,
            au: 1.49597870691e8,
            day: 86400.0,
            year_days: 365.25,
            f_atd: 1e-4,
            alpha: 6e-9,
            v_flyby_max: 2.0,
            v_launch_max: 6.0,
            r_min: 0.4,
            a_d_min: 0.65,
            atd_delay: 30.0,
            station_gap_min: 90.0,
            t_start_mjd: 95739.0,
            window_years: 20.0,
        }
    }
}

impl Constants {
    /// ATD acceleration in km/s^2.
    pub fn f_atd_kms2(&self) -> f64 {
        self.f_atd * 1e-3
    }

    /// Canonical time unit (s): the unit that makes mu = 1 with lengths in AU.
    pub fn tu(&self) -> f64 {
        (self.au.powi(3) / self.mu_sun).sqrt()
    }

    /// ATD acceleration in canonical units (AU/TU^2).
    pub fn f_atd_canonical(&self) -> f64 {
        self.f_atd_kms2() * self.tu().powi(2) / self.au
    }

    /// Mission window start.
    pub fn window_start(&self) -> super::Epoch {
        super::Epoch::new(self.t_start_mjd)
    }

    /// Mission window end.
    pub fn window_end(&self) -> super::Epoch {
        super::Epoch::new(self.t_start_mjd + self.window_years * self.year_days)
    }

    /// Orbital period of a circular orbit of radius `a_au`, in seconds.
    pub fn period_s(&self, a_au: f64) -> f64 {
        let a_km = a_au * self.au;
        2.0 * std::f64::consts::PI * (a_km.powi(3) / self.mu_sun).sqrt()
    }

    /// Circular-orbit mean motion at `a_au`, rad/s.
    pub fn mean_motion(&self, a_au: f64) -> f64 {
        let a_km = a_au * self.au;
        (self.mu_sun / a_km.powi(3)).sqrt()
    }
}
