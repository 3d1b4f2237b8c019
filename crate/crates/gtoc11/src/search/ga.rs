//! Genetic algorithm: tournament selection, uniform crossover, per-gene
//! Gaussian mutation, elitism.

use super::{eval_batch, SearchReport, SearchSpace};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaParams {
    pub pop: usize,
    pub generations: usize,
    pub seed: u64,
    /// Probability of crossing a pair at all (per-gene mixing is fair).
    pub crossover_p: f64,
    pub tournament: usize,
    /// Individuals copied unchanged into the next generation.
    pub elite: usize,
    /// Mutation step as a fraction of each dimension's range.
    pub sigma_frac: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            pop: 200,
            generations: 100,
            seed: 0,
            crossover_p: 0.9,
            tournament: 3,
            elite: 2,
            sigma_frac: 0.1,
        }
    }
}

/// Standard normal via Box-Muller (keeps the dependency set small).
pub(crate) fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (crate::astro::TAU * u2).cos()
}

pub fn ga_minimize<F>(objective: F, space: &SearchSpace, params: &GaParams) -> Result<SearchReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dims = space.dims();
    let pop_n = params.pop.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut pop: Vec<Vec<f64>> = (0..pop_n)
        .map(|_| {
            let mut x: Vec<f64> = (0..dims)
                .map(|k| rng.gen_range(space.lower[k]..=space.upper[k]))
                .collect();
            space.project(&mut x);
            x
        })
        .collect();
    let mut values = eval_batch(&objective, &pop);
    let mut evaluations = pop_n as u64;

    let mut best_idx = argmin(&values);
    let mut best_point = pop[best_idx].clone();
    let mut best_value = values[best_idx];
    let mut history = Vec::with_capacity(params.generations);

    let mutation_p = 1.0 / dims as f64;
    for _ in 0..params.generations {
        // Rank for elitism.
        let mut order: Vec<usize> = (0..pop_n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut next: Vec<Vec<f64>> = Vec::with_capacity(pop_n);
        for &idx in order.iter().take(params.elite.min(pop_n)) {
            next.push(pop[idx].clone());
        }
        while next.len() < pop_n {
            let pa = tournament(&mut rng, &values, params.tournament);
            let pb = tournament(&mut rng, &values, params.tournament);
            let mut child = pop[pa].clone();
            if rng.gen::<f64>() < params.crossover_p {
                for (gene, donor) in child.iter_mut().zip(&pop[pb]) {
                    if rng.gen::<bool>() {
                        *gene = *donor;
                    }
                }
            }
            for (gene, (lo, hi)) in child
                .iter_mut()
                .zip(space.lower.iter().zip(&space.upper))
            {
                if rng.gen::<f64>() < mutation_p {
                    *gene += params.sigma_frac * (hi - lo) * gauss(&mut rng);
                }
            }
            space.project(&mut child);
            next.push(child);
        }
        pop = next;
        values = eval_batch(&objective, &pop);
        evaluations += pop_n as u64;

        best_idx = argmin(&values);
        if values[best_idx] < best_value {
            best_value = values[best_idx];
            best_point = pop[best_idx].clone();
        }
        history.push(best_value);
    }

    Ok(SearchReport {
        best_point,
        best_value,
        evaluations,
        history,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = k;
        }
    }
    best
}

fn tournament(rng: &mut ChaCha8Rng, values: &[f64], size: usize) -> usize {
    let mut winner = rng.gen_range(0..values.len());
    for _ in 1..size.max(1) {
        let challenger = rng.gen_range(0..values.len());
        if values[challenger] < values[winner] {
            winner = challenger;
        }
    }
    winner
}
