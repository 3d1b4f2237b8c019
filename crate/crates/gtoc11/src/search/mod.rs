//! Generic bounded metaheuristic drivers: a genetic algorithm and a particle
//! swarm, both deterministic for a fixed seed.  Objective evaluations inside
//! one generation may run in parallel; reproducibility is preserved by
//! drawing all random numbers for the generation up front.

mod ga;
mod pso;

pub use ga::{ga_minimize, GaParams};
pub use pso::{pso_minimize, PsoParams};

use crate::{Error, Result};

/// A bounded, optionally integer-constrained box domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Dims flagged true only ever take integer values (bounds included).
    pub integrality: Vec<bool>,
}

impl SearchSpace {
    pub fn continuous(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = lower.len();
        Self::new(lower, upper, vec![false; n])
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>, integrality: Vec<bool>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != integrality.len() || lower.is_empty() {
            return Err(Error::InvalidArgument(
                "search space bound arrays must be non-empty and of equal length".into(),
            ));
        }
        for (k, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "bad bounds on dim {k}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(SearchSpace {
            lower,
            upper,
            integrality,
        })
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    /// Clamp into the box and round integer dims to the nearest feasible value.
    pub fn project(&self, x: &mut [f64]) {
        for (k, xi) in x.iter_mut().enumerate() {
            *xi = xi.clamp(self.lower[k], self.upper[k]);
            if self.integrality[k] {
                *xi = xi.round().clamp(self.lower[k].ceil(), self.upper[k].floor());
            }
        }
    }
}

/// Outcome of one driver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: u64,
    /// Best-so-far value after each generation/iteration.
    pub history: Vec<f64>,
}

/// Evaluate a batch, in parallel when a rayon pool is active.  Non-finite
/// objective values are treated as +inf (the point is effectively discarded).
fn eval_batch<F>(objective: &F, points: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|p| {
            let v = objective(p);
            if v.is_finite() {
                v
            } else {
                log::debug!("discarding non-finite objective value at {p:?}");
                f64::INFINITY
            }
        })
        .collect()
}

#[cfg(test)]
pub(crate) fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[cfg(test)]
pub(crate) fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (crate::astro::TAU * v).cos())
            .sum::<f64>()
}
