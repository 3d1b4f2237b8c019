//! Asteroid-to-station dispatcher: decode a flat decision vector, run the
//! greedy first allocation, rebalance masses toward the weakest station,
//! trim mothership chains of unassigned tail targets, and drive the whole
//! evaluation with a genetic-algorithm screen and a particle-swarm polish.

use crate::astro::{lambert, Direction};
use crate::chains::{flyby_split_greedy, ChainContext, Leg, MothershipChain};
use crate::rdv_table::{RendezvousTable, TransferOpportunity};
use crate::search::{ga_minimize, pso_minimize, GaParams, PsoParams, SearchSpace};
use crate::{Error, Result, V3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Box constraints of the decision space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispatchBounds {
    /// Asteroids requested per station, inclusive.
    pub na_min: usize,
    pub na_max: usize,
    /// Inter-station arrival gap, days, inclusive; never below 90.
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for DispatchBounds {
    fn default() -> Self {
        DispatchBounds {
            na_min: 12,
            na_max: 36,
            dt_min: 90.0,
            dt_max: 365.0,
        }
    }
}

impl DispatchBounds {
    pub fn validate(&self) -> Result<()> {
        if self.na_min == 0 || self.na_min > self.na_max {
            return Err(Error::InvalidArgument(format!(
                "station asteroid-count bounds [{}, {}] invalid",
                self.na_min, self.na_max
            )));
        }
        if !(self.dt_min >= 90.0 && self.dt_min <= self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "arrival-gap bounds [{}, {}] invalid (min allowed is 90 days)",
                self.dt_min, self.dt_max
            )));
        }
        Ok(())
    }
}

/// One dispatch decision: station build priorities, per-station asteroid
/// quotas, and the minimum gap between arrival blocks of consecutively
/// built stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchDecision {
    /// One value in [0,1] per station; ascending order gives the build order.
    pub x_s: Vec<f64>,
    /// Asteroids requested per station (by natural station index).
    pub x_na: Vec<usize>,
    /// Days between the latest arrival of one station block and the earliest
    /// of the next.
    pub x_dt: f64,
}

impl DispatchDecision {
    /// Decode the flat `[x_s | x_na | x_dt]` vector (length 2n+1).
    pub fn from_point(x: &[f64], bounds: &DispatchBounds) -> Result<Self> {
        if x.len() < 3 || x.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "decision vector length {} is not 2n+1",
                x.len()
            )));
        }
        bounds.validate()?;
        let n = (x.len() - 1) / 2;
        let x_s = x[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let x_na = x[n..2 * n]
            .iter()
            .map(|v| (v.round().max(0.0) as usize).clamp(bounds.na_min, bounds.na_max))
            .collect();
        let x_dt = x[2 * n].clamp(bounds.dt_min, bounds.dt_max);
        Ok(DispatchDecision { x_s, x_na, x_dt })
    }

    pub fn to_point(&self) -> Vec<f64> {
        let mut x = self.x_s.clone();
        x.extend(self.x_na.iter().map(|&v| v as f64));
        x.push(self.x_dt);
        x
    }

    pub fn n_stations(&self) -> usize {
        self.x_s.len()
    }
}

/// The optimizer's box for `n` stations: n priorities in [0,1], n integer
/// quotas, one gap duration.
pub fn decision_space(n: usize, bounds: &DispatchBounds) -> Result<SearchSpace> {
    bounds.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("no stations to dispatch to".into()));
    }
    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    let mut integrality = vec![false; n];
    lower.extend(std::iter::repeat(bounds.na_min as f64).take(n));
    upper.extend(std::iter::repeat(bounds.na_max as f64).take(n));
    integrality.extend(std::iter::repeat(true).take(n));
    lower.push(bounds.dt_min);
    upper.push(bounds.dt_max);
    integrality.push(false);
    SearchSpace::new(lower, upper, integrality)
}

/// Stable argsort of the station priorities: ascending value, ties by
/// station index.
pub fn decode_station_order(x_s: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x_s.len()).collect();
    order.sort_by(|&a, &b| x_s[a].total_cmp(&x_s[b]).then(a.cmp(&b)));
    order
}

/// A concrete allocation of asteroids to stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Stations in the order their arrival blocks were scheduled.
    pub build_order: Vec<usize>,
    /// Per natural station index, the chosen (asteroid, opportunity) pairs.
    pub stations: Vec<Vec<(u64, TransferOpportunity)>>,
}

impl Assignment {
    pub fn station_mass(&self) -> Vec<f64> {
        self.stations
            .iter()
            .map(|v| v.iter().map(|(_, o)| o.m_f).sum())
            .collect()
    }

    pub fn m_min(&self) -> f64 {
        self.station_mass()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn assigned_ids(&self) -> BTreeSet<u64> {
        self.stations
            .iter()
            .flatten()
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn assigned_count(&self) -> usize {
        self.stations.iter().map(Vec::len).sum()
    }

    /// Latest arrival, MJD, over the listed stations; None when all empty.
    fn max_arrival(&self, stations: &[usize]) -> Option<f64> {
        stations
            .iter()
            .flat_map(|&s| self.stations[s].iter().map(|(_, o)| o.tf.mjd))
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    /// Earliest arrival, MJD, over the listed stations; None when all empty.
    fn min_arrival(&self, stations: &[usize]) -> Option<f64> {
        stations
            .iter()
            .flat_map(|&s| self.stations[s].iter().map(|(_, o)| o.tf.mjd))
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }
}

/// All asteroid ids present in the table.
fn table_asteroids(table: &RendezvousTable) -> BTreeSet<u64> {
    table.cells.keys().map(|(id, _)| *id).collect()
}

/// Earliest opportunity of `ast` to `station` arriving at or after
/// `floor_mjd` (no floor when None).
fn earliest_eligible(
    table: &RendezvousTable,
    ast: u64,
    station: usize,
    floor_mjd: Option<f64>,
) -> Option<TransferOpportunity> {
    table
        .opportunities(ast, station)
        .iter()
        .filter(|o| floor_mjd.is_none_or(|f| o.tf.mjd >= f))
        .min_by(|a, b| a.tf.mjd.total_cmp(&b.tf.mjd))
        .copied()
}

/// Greedy first allocation: stations in decoded build order each take up to
/// their quota of the remaining asteroids, ordered by earliest eligible
/// arrival; eligibility starts at the previous station block's latest
/// arrival plus the decision gap (carried over empty stations).
pub fn first_allocation(table: &RendezvousTable, decision: &DispatchDecision) -> Assignment {
    let n = decision.n_stations();
    let order = decode_station_order(&decision.x_s);
    let mut stations: Vec<Vec<(u64, TransferOpportunity)>> = vec![Vec::new(); n];
    let mut remaining = table_asteroids(table);
    let mut floor_mjd: Option<f64> = None;

    for &s in &order {
        let mut cands: Vec<(TransferOpportunity, u64)> = remaining
            .iter()
            .filter_map(|&ast| earliest_eligible(table, ast, s, floor_mjd).map(|o| (o, ast)))
            .collect();
        cands.sort_by(|a, b| {
            a.0.tf
                .mjd
                .total_cmp(&b.0.tf.mjd)
                .then(b.0.m_f.total_cmp(&a.0.m_f))
                .then(a.1.cmp(&b.1))
        });
        for (opp, ast) in cands.into_iter().take(decision.x_na[s]) {
            stations[s].push((ast, opp));
            remaining.remove(&ast);
        }
        if let Some(latest) = stations[s]
            .iter()
            .map(|(_, o)| o.tf.mjd)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        {
            floor_mjd = Some(latest + decision.x_dt);
        }
    }

    Assignment {
        build_order: order,
        stations,
    }
}

/// The arrival window, MJD, open for new arrivals at build-order position
/// `pos` given every other station's current block.
fn insertion_window(assignment: &Assignment, pos: usize, x_dt: f64) -> (f64, f64) {
    let earlier = &assignment.build_order[..pos];
    let later = &assignment.build_order[pos + 1..];
    let lo = assignment
        .max_arrival(earlier)
        .map_or(f64::NEG_INFINITY, |v| v + x_dt);
    let hi = assignment
        .min_arrival(later)
        .map_or(f64::INFINITY, |v| v - x_dt);
    (lo, hi)
}

/// One rebalance action: move the pooled asteroid with the earliest
/// compatible arrival into the minimum-mass station. `threshold` bounds how
/// far donor stations may be drained. Returns false when no action exists.
fn rebalance_step(
    assignment: &mut Assignment,
    table: &RendezvousTable,
    decision: &DispatchDecision,
    unassigned: &mut BTreeSet<u64>,
    threshold: f64,
) -> bool {
    let masses = assignment.station_mass();
    let n = masses.len();
    let s_min = (0..n)
        .min_by(|&a, &b| masses[a].total_cmp(&masses[b]))
        .expect("at least one station");
    let pos = assignment
        .build_order
        .iter()
        .position(|&s| s == s_min)
        .expect("station in build order");
    let (lo, hi) = insertion_window(assignment, pos, decision.x_dt);
    if lo > hi {
        return false;
    }

    // Pool: unassigned asteroids, plus each above-threshold station's
    // lowest-mass members whose cumulative removal keeps it at or above the
    // threshold (low masses are offered first).
    let mut pool: Vec<(u64, Option<usize>)> =
        unassigned.iter().map(|&id| (id, None)).collect();
    for (s, members) in assignment.stations.iter().enumerate() {
        if s == s_min || masses[s] <= threshold {
            continue;
        }
        let mut by_mass: Vec<&(u64, TransferOpportunity)> = members.iter().collect();
        by_mass.sort_by(|a, b| a.1.m_f.total_cmp(&b.1.m_f).then(a.0.cmp(&b.0)));
        let mut budget = masses[s] - threshold;
        for (id, opp) in by_mass {
            if opp.m_f > budget {
                break;
            }
            budget -= opp.m_f;
            pool.push((*id, Some(s)));
        }
    }

    // Candidate = pooled asteroid's earliest opportunity to s_min inside the
    // window; pick the earliest arrival, ties by heavier mass then id.
    let best = pool
        .into_iter()
        .filter_map(|(id, source)| {
            table
                .opportunities(id, s_min)
                .iter()
                .filter(|o| o.tf.mjd >= lo && o.tf.mjd <= hi)
                .min_by(|a, b| a.tf.mjd.total_cmp(&b.tf.mjd))
                .map(|o| (*o, id, source))
        })
        .min_by(|a, b| {
            a.0.tf
                .mjd
                .total_cmp(&b.0.tf.mjd)
                .then(b.0.m_f.total_cmp(&a.0.m_f))
                .then(a.1.cmp(&b.1))
        });
    let Some((opp, id, source)) = best else {
        return false;
    };

    match source {
        None => {
            unassigned.remove(&id);
        }
        Some(s) => assignment.stations[s].retain(|(a, _)| *a != id),
    }
    assignment.stations[s_min].push((id, opp));
    true
}

/// Deterministic mass balancing: repeatedly feed the minimum-mass station
/// from the unassigned pool and from stations above the mean (donors never
/// drop below the mean), then a final sweep with the minimum mass as the
/// donor threshold. The minimum station mass never decreases.
pub fn rebalance(
    assignment: &Assignment,
    table: &RendezvousTable,
    decision: &DispatchDecision,
) -> Assignment {
    let mut out = assignment.clone();
    let mut unassigned = table_asteroids(table);
    for id in out.assigned_ids() {
        unassigned.remove(&id);
    }
    let cap = 50 + 20 * table_asteroids(table).len();

    let mut guard_min = out.m_min();
    for phase in 0..2 {
        for _ in 0..cap {
            let masses = out.station_mass();
            let threshold = if phase == 0 {
                masses.iter().sum::<f64>() / masses.len() as f64
            } else {
                masses.iter().fold(f64::INFINITY, |a, &b| a.min(b))
            };
            if !rebalance_step(&mut out, table, decision, &mut unassigned, threshold) {
                break;
            }
            let m = out.m_min();
            debug_assert!(m >= guard_min - 1e-6, "rebalance regressed the minimum");
            guard_min = guard_min.max(m);
        }
    }
    out
}

/// Drop unassigned asteroids from the tail of each chain, then re-optimize
/// the new final flyby: its post-encounter impulse vanishes and its arrival
/// impulse shrinks to the bare relative-speed clamp. Per-chain total
/// impulse never increases; assigned asteroids are never removed.
pub fn trim_chains(
    ctx: &ChainContext,
    chains: &[MothershipChain],
    assigned: &BTreeSet<u64>,
) -> Result<Vec<MothershipChain>> {
    let c = ctx.c;
    let mut out = Vec::with_capacity(chains.len());
    for chain in chains {
        let mut keep = chain.legs.len();
        while keep > 0 && !assigned.contains(&chain.legs[keep - 1].target) {
            keep -= 1;
        }
        if keep == chain.legs.len() {
            out.push(chain.clone());
            continue;
        }
        if keep == 0 {
            out.push(MothershipChain {
                launch_epoch: chain.launch_epoch,
                launch_impulse: V3::zeros(),
                legs: Vec::new(),
            });
            continue;
        }
        let mut legs: Vec<Leg> = chain.legs[..keep].to_vec();
        let last = keep - 1;
        // Replaying the incoming arc is only exact while legs are ballistic.
        if legs.iter().all(|l| l.dsm.is_none()) {
            let (r_prev, t_prev) = if last == 0 {
                let es = ctx.earth.state(chain.launch_epoch, c)?;
                (es.r, chain.launch_epoch)
            } else {
                let prev = &legs[last - 1];
                let ps = ctx.cat.state(prev.target, prev.encounter, c)?;
                (ps.r, prev.encounter)
            };
            let here = ctx.cat.state(legs[last].target, legs[last].encounter, c)?;
            let sol = lambert(
                &r_prev,
                &here.r,
                legs[last].encounter.seconds_since(t_prev, c.day),
                c.mu_sun,
                Direction::Prograde,
                0,
            )?;
            let (dv1, _) = flyby_split_greedy(&sol.v2, &here.v, &here.v, c.v_flyby_max);
            legs[last].dv1 = dv1;
        }
        legs[last].dv2 = V3::zeros();
        out.push(MothershipChain {
            launch_epoch: chain.launch_epoch,
            launch_impulse: chain.launch_impulse,
            legs,
        });
    }
    Ok(out)
}

/// The competition objective with unit bonus: 1e-10 · m_min over the squared
/// ring radius and the summed squared per-ship cost factors.
pub fn score_j(m_min: f64, a_d: f64, chains: &[MothershipChain]) -> f64 {
    let denom: f64 = chains
        .iter()
        .map(|ch| (1.0 + ch.dv_total() / 50.0).powi(2))
        .sum();
    if !(m_min > 0.0) || !(denom > 0.0) {
        return 0.0;
    }
    1e-10 * m_min / (a_d * a_d * denom)
}

/// Everything one decision produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchReport {
    pub decision: DispatchDecision,
    pub assignment: Assignment,
    pub station_mass: Vec<f64>,
    pub m_min: f64,
    pub trimmed: Vec<MothershipChain>,
    pub j: f64,
}

/// Pure evaluation of one decision: first allocation, rebalance, chain
/// trim, objective.
pub fn evaluate_decision(
    decision: &DispatchDecision,
    table: &RendezvousTable,
    chains: &[MothershipChain],
    ctx: &ChainContext,
) -> Result<DispatchReport> {
    if decision.n_stations() != table.ring.n_stations
        || decision.x_na.len() != table.ring.n_stations
    {
        return Err(Error::InvalidArgument(format!(
            "decision sized for {} stations, table has {}",
            decision.n_stations(),
            table.ring.n_stations
        )));
    }
    let assignment = rebalance(&first_allocation(table, decision), table, decision);
    let trimmed = trim_chains(ctx, chains, &assignment.assigned_ids())?;
    let station_mass = assignment.station_mass();
    let m_min = assignment.m_min();
    let j = score_j(m_min, table.ring.a_d, &trimmed);
    Ok(DispatchReport {
        decision: decision.clone(),
        assignment,
        station_mass,
        m_min,
        trimmed,
        j,
    })
}

/// Metaheuristic choice for [`dispatch`]. The combined mode screens with the
/// genetic algorithm over the full box, then polishes with the swarm on a
/// box shrunk to a quarter of each range around the screen's best point,
/// and keeps the better of the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DispatchOptimizer {
    Ga(GaParams),
    Pso(PsoParams),
    GaThenPso(GaParams, PsoParams),
}

/// Shrink `space` to `frac` of each range around `center` (integer dims are
/// widened to the enclosing whole numbers, zero-width dims collapse onto
/// the center).
fn shrink_around(space: &SearchSpace, center: &[f64], frac: f64) -> Result<SearchSpace> {
    let mut lower = Vec::with_capacity(space.dims());
    let mut upper = Vec::with_capacity(space.dims());
    for k in 0..space.dims() {
        let hw = 0.5 * frac * (space.upper[k] - space.lower[k]);
        let (mut lo, mut hi) = (
            (center[k] - hw).max(space.lower[k]),
            (center[k] + hw).min(space.upper[k]),
        );
        if space.integrality[k] {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if lo > hi {
            lo = center[k];
            hi = center[k];
        }
        lower.push(lo);
        upper.push(hi);
    }
    SearchSpace::new(lower, upper, space.integrality.clone())
}

/// Drive the decision search and return the best report found.
pub fn dispatch(
    table: &RendezvousTable,
    chains: &[MothershipChain],
    ctx: &ChainContext,
    optimizer: &DispatchOptimizer,
    bounds: &DispatchBounds,
) -> Result<DispatchReport> {
    let space = decision_space(table.ring.n_stations, bounds)?;
    let objective = |x: &[f64]| -> f64 {
        DispatchDecision::from_point(x, bounds)
            .and_then(|d| evaluate_decision(&d, table, chains, ctx))
            .map_or(f64::INFINITY, |r| -r.j)
    };
    let best_point = match optimizer {
        DispatchOptimizer::Ga(p) => ga_minimize(&objective, &space, p)?.best_point,
        DispatchOptimizer::Pso(p) => pso_minimize(&objective, &space, p)?.best_point,
        DispatchOptimizer::GaThenPso(ga, pso) => {
            let screen = ga_minimize(&objective, &space, ga)?;
            let polish_space = shrink_around(&space, &screen.best_point, 0.25)?;
            let polish = pso_minimize(&objective, &polish_space, pso)?;
            if polish.best_value < screen.best_value {
                polish.best_point
            } else {
                screen.best_point
            }
        }
    };
    let decision = DispatchDecision::from_point(&best_point, bounds)?;
    evaluate_decision(&decision, table, chains, ctx)
}
