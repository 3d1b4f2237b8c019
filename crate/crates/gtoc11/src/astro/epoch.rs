use serde::{Deserialize, Serialize};

/// Mission epoch as a Modified Julian Date on a uniform (TDB-like) scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epoch {
    pub mjd: f64,
}

impl Epoch {
    pub fn new(mjd: f64) -> Self {
        Epoch { mjd }
    }

    pub fn plus_days(self, days: f64) -> Self {
        Epoch {
            mjd: self.mjd + days,
        }
    }

    pub fn plus_seconds(self, s: f64, day_s: f64) -> Self {
        Epoch {
            mjd: self.mjd + s / day_s,
        }
    }

    /// Days elapsed since `other` (negative if self precedes it).
    pub fn days_since(self, other: Epoch) -> f64 {
        self.mjd - other.mjd
    }

    /// Seconds elapsed since `other`.
    pub fn seconds_since(self, other: Epoch, day_s: f64) -> f64 {
        (self.mjd - other.mjd) * day_s
    }
}

impl std::fmt::Display for Epoch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} MJD", self.mjd)
    }
}
