//! Particle swarm with the standard inertia-weight form and early stop after
//! a configurable number of stalled iterations.

use super::{eval_batch, SearchReport, SearchSpace};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PsoParams {
    pub swarm: usize,
    pub iters: usize,
    /// Stop after this many consecutive iterations without improvement.
    pub stall_limit: usize,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm: 200,
            iters: 300,
            stall_limit: 100,
            seed: 0,
        }
    }
}

const INERTIA: f64 = 0.729;
const C_COGNITIVE: f64 = 1.49445;
const C_SOCIAL: f64 = 1.49445;
/// Velocity clamp as a fraction of each dimension's range.
const V_FRAC: f64 = 0.2;

pub fn pso_minimize<F>(
    objective: F,
    space: &SearchSpace,
    params: &PsoParams,
) -> Result<SearchReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dims = space.dims();
    let n = params.swarm.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let vmax: Vec<f64> = (0..dims)
        .map(|k| V_FRAC * (space.upper[k] - space.lower[k]))
        .collect();

    // Particles move in the continuous box; the objective and all reported
    // points see the projected (integer-respecting) copy.
    let mut pos: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..dims)
                .map(|k| rng.gen_range(space.lower[k]..=space.upper[k]))
                .collect()
        })
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dims).map(|k| rng.gen_range(-vmax[k]..=vmax[k])).collect())
        .collect();

    let projected: Vec<Vec<f64>> = pos
        .iter()
        .map(|p| {
            let mut q = p.clone();
            space.project(&mut q);
            q
        })
        .collect();
    let mut values = eval_batch(&objective, &projected);
    let mut evaluations = n as u64;

    let mut p_best = projected;
    let mut p_val = values.clone();
    let mut g_idx = argmin(&p_val);
    let mut g_best = p_best[g_idx].clone();
    let mut g_val = p_val[g_idx];

    let mut history = Vec::new();
    let mut stall = 0usize;
    for _ in 0..params.iters {
        // Pre-draw this iteration's randomness so parallel evaluation cannot
        // perturb the stream.
        let r1: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dims).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let r2: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dims).map(|_| rng.gen::<f64>()).collect())
            .collect();

        let mut projected = Vec::with_capacity(n);
        for i in 0..n {
            for k in 0..dims {
                let v = INERTIA * vel[i][k]
                    + C_COGNITIVE * r1[i][k] * (p_best[i][k] - pos[i][k])
                    + C_SOCIAL * r2[i][k] * (g_best[k] - pos[i][k]);
                vel[i][k] = v.clamp(-vmax[k], vmax[k]);
                pos[i][k] = (pos[i][k] + vel[i][k]).clamp(space.lower[k], space.upper[k]);
            }
            let mut q = pos[i].clone();
            space.project(&mut q);
            projected.push(q);
        }
        values = eval_batch(&objective, &projected);
        evaluations += n as u64;

        let mut improved = false;
        for i in 0..n {
            if values[i] < p_val[i] {
                p_val[i] = values[i];
                p_best[i] = projected[i].clone();
            }
        }
        g_idx = argmin(&p_val);
        if p_val[g_idx] < g_val {
            g_val = p_val[g_idx];
            g_best = p_best[g_idx].clone();
            improved = true;
        }
        history.push(g_val);
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= params.stall_limit {
                break;
            }
        }
    }

    Ok(SearchReport {
        best_point: g_best,
        best_value: g_val,
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
