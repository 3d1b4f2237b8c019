//! Rendezvous-table generation: for every asteroid flown past by a
//! mothership, sample time-optimal free-phase transfers at sixteen departure
//! epochs per asteroid period, extend the samples across later periods by
//! the period-shift symmetry, and spline the station phase differences to
//! locate every epoch at which a true station rendezvous exists.

mod spline;

pub use spline::CubicSpline;

use crate::astro::{asteroid_mass, edelbaum, plane_change_angle, Constants, Epoch};
use crate::catalog::{AsteroidRecord, Catalog};
use crate::chains::MothershipChain;
use crate::lowthrust::{LowThrustSolver, SolverOptions, TransferSolution};
use crate::ring::RingConfig;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// One sampled free-phase transfer: departure, time-optimal arrival, the
/// departure costates, and the arrival phase offset to every station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub t0: Epoch,
    pub tf: Epoch,
    /// L_A − L_S at tf per station, on one continuous branch across rows
    /// (asteroid longitude unwrapped from the first row, stations unwrapped
    /// from the window start).
    pub dl: Vec<f64>,
    /// Canonical departure costates.
    pub lam0: [f64; 6],
    /// Total root-finder iterations spent producing this row, summed over
    /// every attempt: energy warm-ups on cold starts, failed ladder rungs,
    /// and the successful time-optimal solve.
    pub newton_iters: usize,
}

/// Primary-epoch sampling of one asteroid: surviving rows plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Collation {
    pub asteroid: u64,
    /// Surviving rows sorted by t0 (failed rows are simply absent).
    pub rows: Vec<PhaseRow>,
    /// Scheduled rows (16 unless escalated).
    pub attempted: usize,
    /// Rows that needed the recovery ladder and survived.
    pub recovered: usize,
    /// Asteroid orbital period, s.
    pub period_s: f64,
}

impl Collation {
    /// Fewer than eight surviving rows starves the spline stage.
    pub fn is_complete(&self) -> bool {
        self.rows.len() >= 8
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CollationOptions {
    /// Rows per asteroid period.
    pub n: usize,
    /// Warm-start row k from row k−1's costates (the fast path); when off,
    /// every row cold-starts from its own energy solve.
    pub warm: bool,
    pub solver: SolverOptions,
}

impl Default for CollationOptions {
    fn default() -> Self {
        CollationOptions {
            n: 16,
            warm: true,
            solver: SolverOptions::default(),
        }
    }
}

/// Keplerian period of the asteroid, s.
fn asteroid_period_s(rec: &AsteroidRecord, c: &Constants) -> f64 {
    std::f64::consts::TAU / (c.mu_sun / (rec.elements.a_au * c.au).powi(3)).sqrt()
}

/// One cold start: energy-problem warm start at `t0`, then the time-optimal
/// solve. The flight-time guess comes from the analytic circle-to-circle
/// estimate stretched by `stretch`, floored at an eighth of the ring period:
/// with the always-on control a transfer must re-circularize, so even a tiny
/// orbit change takes a sizable fraction of a revolution, and the estimate
/// collapses to useless values near the ring. The second return value is
/// the energy stage's root-finder iteration count, so callers can account
/// the full two-stage cost.
fn solve_row_cold(
    solver: &LowThrustSolver,
    rec: &AsteroidRecord,
    t0: Epoch,
    ring: &RingConfig,
    target: &[f64; 5],
    stretch: f64,
) -> Result<(TransferSolution, usize)> {
    let c = solver.c;
    let di = plane_change_angle(rec.elements.i, rec.elements.raan, ring.i_d, ring.raan_d);
    let (_, tof_est) = edelbaum(rec.elements.a_au, ring.a_d, di, c);
    let guess = stretch * tof_est.max(ring.period_s(c) / 8.0).max(5.0 * c.day);
    let warm = solver.solve_energy_optimal(&rec.elements, t0, target, guess)?;
    let sol =
        solver.solve_time_optimal_free_l(&rec.elements, t0, target, &warm.aug.lam, warm.dt_s)?;
    Ok((sol, warm.newton_iters))
}

/// One attempt at a phase row: reuse a prior row's costates, or cold-start,
/// possibly at a nudged departure or with a stretched flight-time guess.
#[derive(Clone, Copy)]
enum Rung {
    Warm(usize),
    Cold { shift_days: f64, stretch: f64 },
}

/// Sample the free-phase time-optimal transfer at `n` departure epochs
/// spaced P/n apart starting 30 days after the flyby, warm-starting each row
/// from its predecessor, with a recovery ladder for rows that fail:
/// warm-start from the row before last, cold restart, retry at t0 ± P/64,
/// and finally mark the row missing.
pub fn primary_collation(
    rec: &AsteroidRecord,
    t_flyby: Epoch,
    ring: &RingConfig,
    c: &Constants,
    opts: &CollationOptions,
) -> Result<Collation> {
    if opts.n < 2 {
        return Err(Error::InvalidArgument(
            "phase sampling needs at least two rows per period".into(),
        ));
    }
    ring.validate()?;
    let solver = LowThrustSolver::with_options(c, opts.solver);
    let target = solver.ring_target(ring);
    let p_s = asteroid_period_s(rec, c);
    let p_days = p_s / c.day;
    let n_a = std::f64::consts::TAU / p_s;

    let mut rows: Vec<PhaseRow> = Vec::with_capacity(opts.n);
    // (row index, solution) pairs for warm-starting and the ladder.
    let mut solved: Vec<(usize, TransferSolution)> = Vec::new();
    let mut recovered = 0usize;
    // Continuous branch of the asteroid's departure longitude.
    let mut branch: Option<(f64, Epoch)> = None;

    for k in 0..opts.n {
        let t0 = t_flyby.plus_days(c.atd_delay + k as f64 * p_days / opts.n as f64);

        // A warm rung reuses a prior row's costates; its extra-iteration
        // count is zero because no auxiliary solve runs.
        let warm_from = |idx: usize| -> Result<(TransferSolution, usize)> {
            let (lam, dt) = solved
                .iter()
                .rev()
                .find(|(i, _)| *i == idx)
                .map(|(_, s)| (s.lam0, s.tf.seconds_since(s.t0, c.day).max(5.0 * c.day)))
                .ok_or(Error::ShootingNonConvergence {
                    residual: f64::INFINITY,
                    iters: 0,
                })?;
            let sol = solver.solve_time_optimal_free_l(&rec.elements, t0, &target, &lam, dt)?;
            Ok((sol, 0))
        };

        // Primary path, then the recovery ladder: warm-start from the row
        // before last, cold restart (once plain, once with a stretched
        // flight-time guess), nudge the departure by ±P/64, give up. Every
        // root-finder iteration spent on the row is accounted, successful
        // or not.
        let mut rungs: Vec<Rung> = Vec::with_capacity(6);
        if opts.warm && k > 0 {
            rungs.push(Rung::Warm(k - 1));
            if k > 1 {
                rungs.push(Rung::Warm(k - 2));
            }
        }
        rungs.push(Rung::Cold {
            shift_days: 0.0,
            stretch: 1.0,
        });
        rungs.push(Rung::Cold {
            shift_days: 0.0,
            stretch: 2.5,
        });
        for shift in [p_days / 64.0, -p_days / 64.0] {
            rungs.push(Rung::Cold {
                shift_days: shift,
                stretch: 1.0,
            });
        }

        let mut row_iters = 0usize;
        let mut sol = None;
        for (attempt, rung) in rungs.iter().enumerate() {
            let result = match *rung {
                Rung::Warm(idx) => warm_from(idx),
                Rung::Cold {
                    shift_days,
                    stretch,
                } => solve_row_cold(
                    &solver,
                    rec,
                    t0.plus_days(shift_days),
                    ring,
                    &target,
                    stretch,
                ),
            };
            match result {
                Ok((s, extra)) => {
                    row_iters += extra + s.newton_iters;
                    if attempt > 0 {
                        recovered += 1;
                    }
                    sol = Some(s);
                    break;
                }
                Err(e) => {
                    if let Error::ShootingNonConvergence { iters, .. } = e {
                        row_iters += iters;
                    }
                    log::debug!("asteroid {} row {k} attempt {attempt} failed: {e}", rec.id);
                }
            }
        }

        let Some(sol) = sol else {
            log::warn!("asteroid {} row {k}: all recovery attempts failed", rec.id);
            continue;
        };
        solved.push((k, sol));

        // Departure longitude on the continuous branch: predict from the
        // previous row at the asteroid's mean rate, then snap to the nearest
        // 2π image of the freshly computed value.
        let x0 = solver.canonical_mee(&rec.elements, sol.t0)?;
        let l0 = match branch {
            None => x0[5],
            Some((l_prev, t_prev)) => {
                let predicted = l_prev + n_a * sol.t0.seconds_since(t_prev, c.day);
                let turns = ((predicted - x0[5]) / std::f64::consts::TAU).round();
                x0[5] + std::f64::consts::TAU * turns
            }
        };
        branch = Some((l0, sol.t0));

        let l_arrival = l0 + (sol.lf - x0[5]);
        let dl = (0..ring.n_stations)
            .map(|s| l_arrival - ring.station_true_longitude(s, sol.tf, c))
            .collect();
        rows.push(PhaseRow {
            t0: sol.t0,
            tf: sol.tf,
            dl,
            lam0: sol.lam0,
            newton_iters: row_iters,
        });
    }

    Ok(Collation {
        asteroid: rec.id,
        rows,
        attempted: opts.n,
        recovered,
        period_s: p_s,
    })
}

/// True when the row-to-row phase steps stay comfortably inside half a
/// branch, so the continuous-branch bookkeeping cannot have slipped a turn.
pub fn dl_branch_ok(rows: &[PhaseRow]) -> bool {
    rows.windows(2).all(|w| {
        w[0].dl
            .iter()
            .zip(&w[1].dl)
            .all(|(a, b)| (b - a).abs() <= std::f64::consts::PI)
    })
}

/// Extend primary rows across later asteroid periods: the transfer geometry
/// repeats after one period, so flight time and costates copy verbatim,
/// while the phase offsets are re-evaluated at the shifted arrival (the ring
/// does not share the asteroid's period). Copies are appended while every
/// shifted arrival stays inside the mission window.
pub fn continuation(
    col: &Collation,
    ring: &RingConfig,
    c: &Constants,
) -> Vec<PhaseRow> {
    let mut rows = col.rows.clone();
    if col.rows.is_empty() {
        return rows;
    }
    let p_days = col.period_s / c.day;
    let tau = std::f64::consts::TAU;
    let max_tf = col
        .rows
        .iter()
        .map(|r| r.tf.mjd)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut j = 1.0;
    while max_tf + j * p_days <= c.window_end().mjd {
        for r in &col.rows {
            let tf = r.tf.plus_days(j * p_days);
            let dl = r
                .dl
                .iter()
                .enumerate()
                .map(|(s, dl0)| {
                    let l_arr = dl0 + ring.station_true_longitude(s, r.tf, c) + tau * j;
                    l_arr - ring.station_true_longitude(s, tf, c)
                })
                .collect();
            rows.push(PhaseRow {
                t0: r.t0.plus_days(j * p_days),
                tf,
                dl,
                lam0: r.lam0,
                newton_iters: 0,
            });
        }
        j += 1.0;
    }
    rows.sort_by(|a, b| a.t0.mjd.total_cmp(&b.t0.mjd));
    rows
}

/// One phase-matched rendezvous opportunity read off the splined table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPoint {
    pub t0: Epoch,
    pub tf: Epoch,
    pub lam0: [f64; 6],
}

/// Spline the phase offset of `station` over departure epoch and return an
/// interpolated (departure, arrival, costates) triple for every crossing of
/// any 2πk level inside the data span, ascending in departure epoch.
pub fn phase_match(rows: &[PhaseRow], station: usize, _c: &Constants) -> Result<Vec<MatchPoint>> {
    if rows.len() < 4 {
        return Ok(Vec::new());
    }
    let tau = std::f64::consts::TAU;
    let xs: Vec<f64> = rows.iter().map(|r| r.t0.mjd).collect();
    let dl: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.dl.get(station).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("phase rows carry no station {station}"))
            })
        })
        .collect::<Result<_>>()?;
    let s_dl = CubicSpline::natural(xs.clone(), dl.clone())?;
    let s_tf = CubicSpline::natural(xs.clone(), rows.iter().map(|r| r.tf.mjd).collect())?;
    let s_lam: Vec<CubicSpline> = (0..6)
        .map(|i| CubicSpline::natural(xs.clone(), rows.iter().map(|r| r.lam0[i]).collect()))
        .collect::<Result<_>>()?;

    let (lo, hi) = dl
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    let mut out = Vec::new();
    let mut k = (lo / tau).ceil() as i64;
    while (k as f64) * tau <= hi {
        for t0 in s_dl.roots(k as f64 * tau, 1e-10) {
            let lam0 = std::array::from_fn(|i| s_lam[i].eval(t0));
            out.push(MatchPoint {
                t0: Epoch::new(t0),
                tf: Epoch::new(s_tf.eval(t0)),
                lam0,
            });
        }
        k += 1;
    }
    out.sort_by(|a, b| a.t0.mjd.total_cmp(&b.t0.mjd));
    Ok(out)
}

/// One dispatchable rendezvous: asteroid, receiving station, transfer
/// window, delivered mass, and the departure costates that regenerate the
/// trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferOpportunity {
    pub asteroid: u64,
    pub station: usize,
    pub t0: Epoch,
    pub tf: Epoch,
    pub m_f: f64,
    pub lam0: [f64; 6],
}

/// The dispatcher's menu: per (asteroid, station), every known opportunity
/// ascending in departure epoch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RendezvousTable {
    pub ring: RingConfig,
    pub cells: BTreeMap<(u64, usize), Vec<TransferOpportunity>>,
    /// Asteroids whose collation could not feed the spline stage.
    pub incomplete: Vec<u64>,
}

impl RendezvousTable {
    pub fn opportunities(&self, asteroid: u64, station: usize) -> &[TransferOpportunity] {
        self.cells
            .get(&(asteroid, station))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter_all(&self) -> impl Iterator<Item = &TransferOpportunity> {
        self.cells.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Collate one asteroid with automatic re-sampling at 32 rows per period
/// when the 16-row branch bookkeeping looks unsafe.
fn collate_with_escalation(
    rec: &AsteroidRecord,
    t_flyby: Epoch,
    ring: &RingConfig,
    c: &Constants,
    opts: &CollationOptions,
) -> Result<Collation> {
    let col = primary_collation(rec, t_flyby, ring, c, opts)?;
    if col.is_complete() && dl_branch_ok(&col.rows) {
        return Ok(col);
    }
    let escalated = CollationOptions {
        n: opts.n * 2,
        ..*opts
    };
    log::info!(
        "asteroid {}: escalating phase sampling to {} rows",
        rec.id,
        escalated.n
    );
    primary_collation(rec, t_flyby, ring, c, &escalated)
}

/// Build the full rendezvous table for every asteroid visited by the
/// chains: collate, extend across periods, phase-match every station, and
/// attach delivered masses. Asteroids are processed in parallel.
pub fn build_table(
    chains: &[MothershipChain],
    ring: &RingConfig,
    cat: &Catalog,
    c: &Constants,
    opts: &CollationOptions,
) -> Result<RendezvousTable> {
    let mut jobs: Vec<(u64, Epoch)> = Vec::new();
    for chain in chains {
        for leg in &chain.legs {
            jobs.push((leg.target, leg.encounter));
        }
    }
    jobs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.mjd.total_cmp(&b.1.mjd)));
    jobs.dedup_by_key(|j| j.0);

    type AsteroidRows = (Collation, Vec<PhaseRow>);
    let results: Vec<(u64, Result<AsteroidRows>)> = jobs
        .par_iter()
        .map(|(id, t_flyby)| {
            let work = || {
                let rec = cat.get(*id).ok_or_else(|| {
                    Error::InvalidArgument(format!("chain visits unknown asteroid {id}"))
                })?;
                let col = collate_with_escalation(rec, *t_flyby, ring, c, opts)?;
                let extended = continuation(&col, ring, c);
                Ok((col, extended))
            };
            (*id, work())
        })
        .collect();

    let mut table = RendezvousTable {
        ring: *ring,
        ..Default::default()
    };
    for (id, outcome) in results {
        let (col, extended) = match outcome {
            Ok(v) => v,
            Err(e) => {
                log::warn!("asteroid {id}: table build failed ({e}); flagged incomplete");
                table.incomplete.push(id);
                continue;
            }
        };
        if !col.is_complete() || !dl_branch_ok(&col.rows) {
            log::warn!(
                "asteroid {id}: {} of {} rows survived; flagged incomplete",
                col.rows.len(),
                col.attempted
            );
            table.incomplete.push(id);
            continue;
        }
        let rec = cat.get(id).expect("visited asteroid exists");
        for station in 0..ring.n_stations {
            let mut cell: Vec<TransferOpportunity> = Vec::new();
            for mp in phase_match(&extended, station, c)? {
                if mp.tf > c.window_end() || mp.tf < mp.t0 {
                    continue;
                }
                let dt_s = mp.tf.seconds_since(mp.t0, c.day);
                let Ok(m_f) = asteroid_mass(rec.m0, dt_s, c.alpha) else {
                    continue;
                };
                if m_f <= 0.0 {
                    continue;
                }
                let is_new = cell
                    .last()
                    .map(|p| mp.t0.days_since(p.t0) > 1e-6)
                    .unwrap_or(true);
                if is_new {
                    cell.push(TransferOpportunity {
                        asteroid: id,
                        station,
                        t0: mp.t0,
                        tf: mp.tf,
                        m_f,
                        lam0: mp.lam0,
                    });
                }
            }
            if !cell.is_empty() {
                table.cells.insert((id, station), cell);
            }
        }
    }
    table.incomplete.sort_unstable();
    table.incomplete.dedup();
    Ok(table)
}

/// Serialize the table as line-oriented text: a ring header, incomplete
/// flags, then one opportunity per line in cell order.
pub fn table_to_text(table: &RendezvousTable) -> String {
    let mut s = String::new();
    let r = &table.ring;
    s.push_str("# gtoc11 rendezvous table\n");
    let _ = writeln!(
        s,
        "# ring {} {} {} {} {}",
        r.a_d, r.i_d, r.raan_d, r.phi_s1, r.n_stations
    );
    s.push_str("# columns: asteroid station t0_mjd tf_mjd m_f_kg lam0[0..6]\n");
    for id in &table.incomplete {
        let _ = writeln!(s, "# incomplete {id}");
    }
    for opp in table.iter_all() {
        let _ = write!(
            s,
            "{} {} {} {} {}",
            opp.asteroid, opp.station, opp.t0.mjd, opp.tf.mjd, opp.m_f
        );
        for l in opp.lam0 {
            let _ = write!(s, " {l}");
        }
        s.push('\n');
    }
    s
}

/// Parse the text produced by [`table_to_text`]; tolerant of blank lines,
/// strict about everything else.
pub fn parse_table(text: &str, source: &str) -> Result<RendezvousTable> {
    let mut table = RendezvousTable::default();
    let mut saw_ring = false;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(vals) = rest.strip_prefix("ring ") {
                let f: Vec<&str> = vals.split_whitespace().collect();
                if f.len() != 5 {
                    return Err(parse_err(lineno, "ring header needs 5 fields".into()));
                }
                let num = |s: &str| -> Result<f64> {
                    s.parse()
                        .map_err(|_| parse_err(lineno, format!("bad ring number {s:?}")))
                };
                table.ring = RingConfig {
                    a_d: num(f[0])?,
                    i_d: num(f[1])?,
                    raan_d: num(f[2])?,
                    phi_s1: num(f[3])?,
                    n_stations: f[4]
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad station count {:?}", f[4])))?,
                };
                table.ring.validate()?;
                saw_ring = true;
            } else if let Some(id) = rest.strip_prefix("incomplete ") {
                table.incomplete.push(
                    id.trim()
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad asteroid id {id:?}")))?,
                );
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 11 {
            return Err(parse_err(
                lineno,
                format!("expected 11 fields, found {}", fields.len()),
            ));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad number {s:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value {s:?}")));
            }
            Ok(v)
        };
        let asteroid: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad asteroid id {:?}", fields[0])))?;
        let station: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad station index {:?}", fields[1])))?;
        let t0 = Epoch::new(num(fields[2])?);
        let tf = Epoch::new(num(fields[3])?);
        let m_f = num(fields[4])?;
        if tf < t0 {
            return Err(parse_err(lineno, "arrival precedes departure".into()));
        }
        if m_f <= 0.0 {
            return Err(parse_err(lineno, format!("non-positive mass {m_f}")));
        }
        let mut lam0 = [0.0; 6];
        for (slot, field) in lam0.iter_mut().zip(&fields[5..11]) {
            *slot = num(field)?;
        }
        let cell = table.cells.entry((asteroid, station)).or_default();
        if let Some(prev) = cell.last() {
            if t0 <= prev.t0 {
                return Err(parse_err(
                    lineno,
                    format!("cell ({asteroid}, {station}) departures must increase"),
                ));
            }
        }
        cell.push(TransferOpportunity {
            asteroid,
            station,
            t0,
            tf,
            m_f,
            lam0,
        });
    }
    if !table.cells.is_empty() && !saw_ring {
        return Err(parse_err(0, "table body without a ring header".into()));
    }
    table.incomplete.sort_unstable();
    table.incomplete.dedup();
    Ok(table)
}

pub fn save_table(table: &RendezvousTable, path: &Path) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    f.write_all(table_to_text(table).as_bytes()).map_err(io_err)?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<RendezvousTable> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_table(&text, &path.display().to_string())
}
