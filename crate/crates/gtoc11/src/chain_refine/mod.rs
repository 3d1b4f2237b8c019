//! Post-processing of fixed mothership sequences: R1 re-optimizes the
//! continuous parameters (encounter epochs per ship, then the ring elements
//! over all ships), and R2 replaces every greedy flyby split with the true
//! optimal two-impulse split.

use crate::astro::{lambert, Constants, Direction, Epoch};
use crate::catalog::Catalog;
use crate::chains::{
    delivered_mass_to, flyby_split_greedy, ring_reachable_at, ChainContext, ChainNode, Leg,
    MothershipChain, ShipChain,
};
use crate::optim::{nelder_mead, pattern_search, NmOptions};
use crate::ring::RingConfig;
use crate::search::{pso_minimize, PsoParams, SearchSpace};
use crate::{Result, V3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-ship objective against a fully specified ring.
pub fn ship_ji(
    cat: &Catalog,
    c: &Constants,
    visited: &[u64],
    dv_total: f64,
    ring: &RingConfig,
) -> f64 {
    let mass_sum: f64 = visited
        .iter()
        .filter_map(|id| cat.get(*id))
        .map(|rec| delivered_mass_to(rec, ring.a_d, ring.i_d, ring.raan_d, c))
        .sum();
    1e-10 * mass_sum / (ring.a_d * ring.a_d * (1.0 + dv_total / 50.0).powi(2))
}

/// Campaign objective against a fully specified ring; unused ship slots
/// contribute a unit discount term.
pub fn campaign_objective_ring(
    cat: &Catalog,
    c: &Constants,
    ships: &[ShipChain],
    ring: &RingConfig,
    n_ships: usize,
) -> f64 {
    let mass_tot: f64 = ships
        .iter()
        .flat_map(|s| s.node.visited.iter())
        .filter_map(|id| cat.get(*id))
        .map(|rec| delivered_mass_to(rec, ring.a_d, ring.i_d, ring.raan_d, c))
        .sum();
    let mut discount: f64 = ships
        .iter()
        .map(|s| (1.0 + s.node.dv_total / 50.0).powi(2))
        .sum();
    discount += n_ships.saturating_sub(ships.len()) as f64;
    1e-10 * mass_tot / (ring.a_d * ring.a_d * discount)
}

/// Replay a fixed sequence at the given encounter epochs: Lambert legs plus
/// greedy splits. Returns `(dv_total, v_out_last)` or `None` when any hard
/// constraint breaks (launch cap, ordering, Lambert failure, mission window).
fn replay_sequence(
    ctx: &ChainContext,
    launch_epoch: Epoch,
    ids: &[u64],
    epochs: &[Epoch],
    ring: &RingConfig,
    min_sep_days: f64,
) -> Option<(f64, V3)> {
    let c = ctx.c;
    let mut prev_t = launch_epoch;
    for &t in epochs {
        if t.days_since(prev_t) < min_sep_days || t > c.window_end() {
            return None;
        }
        prev_t = t;
    }
    let es = ctx.earth.state(launch_epoch, c).ok()?;
    let first = ctx.cat.state(ids[0], epochs[0], c).ok()?;
    let sol0 = lambert(
        &es.r,
        &first.r,
        epochs[0].seconds_since(launch_epoch, c.day),
        c.mu_sun,
        Direction::Prograde,
        0,
    )
    .ok()?;
    if (sol0.v1 - es.v).norm() > ctx.rules.v_launch_max {
        return None;
    }
    let mut dv_total = 0.0;
    let mut v_minus = sol0.v2;
    let mut v_out = V3::zeros();
    for (k, (&id, &t)) in ids.iter().zip(epochs).enumerate() {
        let rec = ctx.cat.get(id)?;
        if !ring_reachable_at(rec, t, ring.a_d, ring.i_d, ring.raan_d, c) {
            return None;
        }
        let here = ctx.cat.state(id, t, c).ok()?;
        let (dv1, _) = flyby_split_greedy(&v_minus, &here.v, &here.v, c.v_flyby_max);
        dv_total += dv1.norm();
        v_out = v_minus + dv1;
        if k + 1 < ids.len() {
            let t_next = epochs[k + 1];
            let next = ctx.cat.state(ids[k + 1], t_next, c).ok()?;
            let sol = lambert(
                &here.r,
                &next.r,
                t_next.seconds_since(t, c.day),
                c.mu_sun,
                Direction::Prograde,
                0,
            )
            .ok()?;
            dv_total += (sol.v1 - v_out).norm();
            v_minus = sol.v2;
        }
    }
    Some((dv_total, v_out))
}

/// R1 epoch-refinement knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R1Options {
    /// Each encounter epoch may move at most this far from its input, days.
    pub halfwidth_days: f64,
    /// Minimum spacing between consecutive events, days.
    pub min_separation_days: f64,
    pub pso: PsoParams,
}

impl Default for R1Options {
    fn default() -> Self {
        R1Options {
            halfwidth_days: 30.0,
            min_separation_days: 1.0,
            pso: PsoParams {
                swarm: 40,
                iters: 80,
                stall_limit: 30,
                seed: 0,
            },
        }
    }
}

/// Clamp a candidate epoch vector into the ordered box: ascending sweep,
/// each epoch at least `sep` after the previous and at most `hw` above its
/// input value.
fn repair_epochs(x: &mut [f64], t0: &[f64], launch_mjd: f64, hw: f64, sep: f64) {
    let mut prev = launch_mjd;
    for (xi, ti) in x.iter_mut().zip(t0) {
        *xi = xi.max(prev + sep).min(ti + hw);
        prev = *xi;
    }
}

/// R1 per ship: particle-swarm search over the encounter-epoch vector (launch
/// epoch fixed), maximizing the ship objective at fixed sequence and ring.
/// Returns the input unchanged (logged) when no strict improvement is found.
pub fn refine_epochs(
    ctx: &ChainContext,
    ship: &ShipChain,
    ring: &RingConfig,
    opts: &R1Options,
) -> ShipChain {
    let n = ship.node.visited.len();
    if n == 0 {
        return ship.clone();
    }
    let c = ctx.c;
    let t0: Vec<f64> = ship.node.epochs.iter().map(|t| t.mjd).collect();
    let ids = &ship.node.visited;
    let launch_mjd = ship.launch_epoch.mjd;
    let hw = opts.halfwidth_days.max(0.0);
    let sep = opts.min_separation_days;

    let eval = |x: &[f64]| -> Option<(f64, V3)> {
        let epochs: Vec<Epoch> = x.iter().map(|&m| Epoch::new(m)).collect();
        replay_sequence(ctx, ship.launch_epoch, ids, &epochs, ring, sep)
    };

    let j0 = match eval(&t0) {
        Some((dv, _)) => ship_ji(ctx.cat, c, ids, dv, ring),
        None => {
            log::warn!(
                "refine_epochs: input chain infeasible under replay; returning it unchanged"
            );
            return ship.clone();
        }
    };

    let lower: Vec<f64> = t0.iter().map(|t| t - hw).collect();
    let upper: Vec<f64> = t0.iter().map(|t| t + hw).collect();
    let space = match SearchSpace::continuous(lower, upper) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("refine_epochs: degenerate search box ({e}); input unchanged");
            return ship.clone();
        }
    };
    let objective = |x: &[f64]| -> f64 {
        let mut t = x.to_vec();
        repair_epochs(&mut t, &t0, launch_mjd, hw, sep);
        match eval(&t) {
            Some((dv, _)) => -ship_ji(ctx.cat, c, ids, dv, ring),
            None => f64::INFINITY,
        }
    };
    let report = match pso_minimize(objective, &space, &opts.pso) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("refine_epochs: search failed ({e}); input unchanged");
            return ship.clone();
        }
    };

    // Deterministic local polish of the swarm's champion.
    let step = vec![0.5f64.min(hw.max(1e-3)); n];
    let (mut best, _) = pattern_search(&objective, &report.best_point, &step, 1e-9, 50_000);
    repair_epochs(&mut best, &t0, launch_mjd, hw, sep);
    match eval(&best) {
        Some((dv, v_out)) => {
            let j = ship_ji(ctx.cat, c, ids, dv, ring);
            if j > j0 {
                return ShipChain {
                    launch_epoch: ship.launch_epoch,
                    node: ChainNode {
                        visited: ids.clone(),
                        epochs: best.into_iter().map(Epoch::new).collect(),
                        dv_total: dv,
                        v_out,
                        score: j,
                    },
                };
            }
            log::debug!("refine_epochs: no improvement over input (J {j:.4e} <= {j0:.4e})");
        }
        None => log::warn!("refine_epochs: search returned no feasible epochs; input unchanged"),
    }
    let mut out = ship.clone();
    out.node.score = j0;
    out
}

/// R1 across a whole campaign: ships refine independently in parallel, each
/// with a seed offset so the searches are decorrelated yet deterministic.
pub fn refine_chains_r1(
    ctx: &ChainContext,
    ships: &[ShipChain],
    ring: &RingConfig,
    opts: &R1Options,
) -> Vec<ShipChain> {
    ships
        .par_iter()
        .enumerate()
        .map(|(i, ship)| {
            let mut o = *opts;
            o.pso.seed = o.pso.seed.wrapping_add(i as u64);
            refine_epochs(ctx, ship, ring, &o)
        })
        .collect()
}

/// Search box for the ring elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingBounds {
    pub a_d: (f64, f64),
    /// Radians.
    pub i_d: (f64, f64),
    /// Radians.
    pub raan_d: (f64, f64),
}

impl Default for RingBounds {
    fn default() -> Self {
        RingBounds {
            a_d: (0.65, 1.6),
            i_d: (0.0, 15f64.to_radians()),
            raan_d: (0.0, std::f64::consts::TAU),
        }
    }
}

/// R1 ring stage: maximize the campaign objective over `(a_D, i_D, Ω_D)` at
/// fixed chains; station phase and count are carried over from `ring0`. The
/// result never scores below `ring0`.
pub fn refine_ring(
    cat: &Catalog,
    c: &Constants,
    ships: &[ShipChain],
    ring0: &RingConfig,
    bounds: &RingBounds,
    n_ships: usize,
    pso: &PsoParams,
) -> Result<RingConfig> {
    let lo = vec![bounds.a_d.0.max(c.a_d_min), bounds.i_d.0, bounds.raan_d.0];
    let hi = vec![bounds.a_d.1.max(c.a_d_min), bounds.i_d.1, bounds.raan_d.1];
    let space = SearchSpace::continuous(lo.clone(), hi.clone())?;
    let with_elements = |x: &[f64]| RingConfig {
        a_d: x[0],
        i_d: x[1],
        raan_d: x[2],
        ..*ring0
    };
    let clamp = |x: &[f64]| -> [f64; 3] {
        [
            x[0].clamp(lo[0], hi[0]),
            x[1].clamp(lo[1], hi[1]),
            x[2].clamp(lo[2], hi[2]),
        ]
    };
    let objective = |x: &[f64]| -> f64 {
        -campaign_objective_ring(cat, c, ships, &with_elements(&clamp(x)), n_ships)
    };
    let report = pso_minimize(objective, &space, pso)?;
    // Deterministic local polish of the swarm's champion.
    let step: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| ((h - l) / 16.0).max(1e-9)).collect();
    let (polished, _) = pattern_search(&objective, &report.best_point, &step, 1e-12, 50_000);
    let candidate = with_elements(&clamp(&polished));
    let j_candidate = campaign_objective_ring(cat, c, ships, &candidate, n_ships);
    let j0 = campaign_objective_ring(cat, c, ships, ring0, n_ships);
    let best = if j_candidate > j0 { candidate } else { *ring0 };
    best.validate()?;
    Ok(best)
}

/// Optimal two-impulse flyby split: the global minimizer of |dv1| + |dv2|
/// subject to `‖v⁻ + dv1 − v_A‖ ≤ v_max` and `dv1 + dv2 = v⁺ − v⁻`.
///
/// Writing w for the post-impulse relative velocity (dv1 = (v_A − v⁻) + w),
/// the cost is |R + w| + |E − w| with R = v_A − v⁻ and E = v⁺ − v_A, over the
/// closed ball |w| ≤ v_max. When the straight segment from 0 to v⁺ − v⁻
/// meets the ball the cost floor |v⁺ − v⁻| is attained exactly; otherwise the
/// minimizer sits on the ball boundary and is found by multistart simplex
/// descent over dv1 (candidates projected onto the ball) plus a pattern
/// polish, started from the greedy split and from both collinear boundary
/// points, which brackets the known spurious local minimum.
pub fn flyby_split_optimal(v_minus: &V3, v_a: &V3, v_plus: &V3, v_max: f64) -> (V3, V3) {
    let r = v_a - v_minus;
    let d = v_plus - v_minus;

    // Interior case: some point of the segment {t·d : t ∈ [0,1]} is feasible.
    let dd = d.norm_squared();
    let t_star = if dd > 0.0 {
        (d.dot(&r) / dd).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if (t_star * d - r).norm() <= v_max {
        let dv1 = t_star * d;
        return (dv1, d - dv1);
    }

    // Boundary case (here |r| > v_max): optimize over w on the ball.
    let e = d - r;
    let cost = |w: &V3| (r + w).norm() + (e - w).norm();
    let project = |w: V3| -> V3 {
        let n = w.norm();
        if n > v_max {
            w * (v_max / n)
        } else {
            w
        }
    };
    let objective = |x: &[f64]| -> f64 {
        let dv1 = V3::new(x[0], x[1], x[2]);
        cost(&project(dv1 - r))
    };

    let r_hat = r / r.norm();
    let starts = [
        r - v_max * r_hat, // greedy: nearest boundary point toward v_A
        r + v_max * r_hat, // far collinear boundary point
        r + project(e - r),
    ];
    let mut best_w = project(starts[0] - r);
    let mut best_f = cost(&best_w);
    let nm = NmOptions {
        xtol: 1e-12,
        ftol: 1e-14,
        max_iters: 4000,
    };
    for s in starts {
        let (x, _) = nelder_mead(objective, s.as_slice(), &[0.3 * v_max; 3], &nm);
        let (x, f) = pattern_search(objective, &x, &[1e-4 * v_max; 3], 1e-13, 20_000);
        let w = project(V3::new(x[0], x[1], x[2]) - r);
        if f < best_f {
            best_f = f;
            best_w = w;
        }
    }
    let dv1 = r + best_w;
    (dv1, d - dv1)
}

/// R2: recompute every leg's Lambert boundary velocities and replace each
/// interior greedy split with the optimal one (the final encounter's
/// minimum-norm clamp is already optimal). Total Δv never increases.
pub fn apply_r2(ctx: &ChainContext, chain: &MothershipChain) -> Result<MothershipChain> {
    let c = ctx.c;
    let n = chain.legs.len();
    if n == 0 {
        return Ok(chain.clone());
    }
    let es = ctx.earth.state(chain.launch_epoch, c)?;
    let first = ctx
        .cat
        .state(chain.legs[0].target, chain.legs[0].encounter, c)?;
    let sol0 = lambert(
        &es.r,
        &first.r,
        chain.legs[0]
            .encounter
            .seconds_since(chain.launch_epoch, c.day),
        c.mu_sun,
        Direction::Prograde,
        0,
    )?;
    let mut legs: Vec<Leg> = Vec::with_capacity(n);
    let mut v_minus = sol0.v2;
    for (k, leg) in chain.legs.iter().enumerate() {
        let here = ctx.cat.state(leg.target, leg.encounter, c)?;
        let (dv1, dv2, v_minus_next) = if k + 1 < n {
            let nxt = &chain.legs[k + 1];
            let to = ctx.cat.state(nxt.target, nxt.encounter, c)?;
            let sol = lambert(
                &here.r,
                &to.r,
                nxt.encounter.seconds_since(leg.encounter, c.day),
                c.mu_sun,
                Direction::Prograde,
                0,
            )?;
            let (dv1, dv2) = flyby_split_optimal(&v_minus, &here.v, &sol.v1, c.v_flyby_max);
            // Keep the incumbent split in the (numerically impossible)
            // event the optimizer came back worse.
            let old_cost = leg.dv1.norm() + leg.dv2.norm();
            if dv1.norm() + dv2.norm() > old_cost + 1e-12 {
                (leg.dv1, leg.dv2, sol.v2)
            } else {
                (dv1, dv2, sol.v2)
            }
        } else {
            let (dv1, _) = flyby_split_greedy(&v_minus, &here.v, &here.v, c.v_flyby_max);
            (dv1, V3::zeros(), V3::zeros())
        };
        legs.push(Leg {
            target: leg.target,
            encounter: leg.encounter,
            dv1,
            dv2,
            dsm: leg.dsm,
        });
        v_minus = v_minus_next;
    }
    Ok(MothershipChain {
        launch_epoch: chain.launch_epoch,
        launch_impulse: sol0.v1 - es.v,
        legs,
    })
}
