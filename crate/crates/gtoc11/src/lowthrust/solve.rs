//! The three boundary-value solvers for constant-acceleration transfers:
//! an energy-optimal warm start, a time-optimal solve with free final
//! longitude, and a time-optimal station rendezvous with phase matching.
//!
//! All internals run in canonical units (length AU, time TU = sqrt(AU³/μ),
//! so μ = 1); costate vectors are stored and exchanged in those units.

use super::mee::{augmented_rhs, bt_lambda, gauss_ab, hamiltonian_time_optimal, Problem};
use super::ode::{integrate, OdeOptions};
use super::shooting::{newton_fd, NewtonOptions};
use crate::astro::{kep_to_mee, Constants, Epoch, EquinoctialState, KeplerianElements};
use crate::ring::RingConfig;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// State and costate pair at one epoch (canonical units: p in AU).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentedState {
    pub x: EquinoctialState,
    pub lam: [f64; 6],
}

/// Converged energy-problem warm start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySolution {
    /// State and costates at departure.
    pub aug: AugmentedState,
    /// Flight time after the consistency adjustment, seconds.
    pub dt_s: f64,
    /// Accumulated f·∫τ dt, km/s.
    pub dv_kms: f64,
    pub newton_iters: usize,
}

/// Converged time-optimal transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSolution {
    pub t0: Epoch,
    pub tf: Epoch,
    /// Canonical costates at t0.
    pub lam0: [f64; 6],
    /// f_drive · (tf − t0), km/s.
    pub dv_equiv: f64,
    /// Target slow elements [p (AU), f, g, h, k].
    pub target: [f64; 5],
    /// Arrival true longitude, rad, unwrapped along the trajectory (carries
    /// every revolution flown since t0).
    pub lf: f64,
    pub newton_iters: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub ode: OdeOptions,
    pub newton: NewtonOptions,
    /// Random multistart attempts for the energy problem (beyond λ = 0).
    pub multistarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            ode: OdeOptions::default(),
            newton: NewtonOptions {
                tol: 1e-10,
                max_iters: 40,
                fd_step: 1e-7,
            },
            multistarts: 12,
            seed: 7,
        }
    }
}

/// Relative band for the energy-problem flight-time consistency condition
/// |∫τ dt − Δt| ≤ band·Δt.
const DT_CONSISTENCY_BAND: f64 = 0.05;
/// The flight-time guess is trusted only up to this factor either way; a
/// consistent Δt outside [guess/TRUST, guess·TRUST] is treated as
/// non-convergence rather than silently solving a different problem.
const DT_TRUST_FACTOR: f64 = 4.0;

pub struct LowThrustSolver<'a> {
    pub c: &'a Constants,
    pub opts: SolverOptions,
    tu: f64,
    f_acc: f64,
}

impl<'a> LowThrustSolver<'a> {
    pub fn new(c: &'a Constants) -> Self {
        Self::with_options(c, SolverOptions::default())
    }

    pub fn with_options(c: &'a Constants, opts: SolverOptions) -> Self {
        LowThrustSolver {
            c,
            opts,
            tu: c.tu(),
            f_acc: c.f_atd_canonical(),
        }
    }

    pub fn seconds_to_canonical(&self, s: f64) -> f64 {
        s / self.tu
    }

    pub fn canonical_to_seconds(&self, t: f64) -> f64 {
        t * self.tu
    }

    /// Canonical velocity unit, km/s.
    fn velocity_unit_kms(&self) -> f64 {
        self.c.au / self.tu
    }

    /// Canonical equinoctial state of an orbit at epoch `t`.
    pub fn canonical_mee(&self, el: &KeplerianElements, t: Epoch) -> Result<[f64; 6]> {
        let x = kep_to_mee(&el.at_epoch(t, self.c), self.c)?;
        Ok([x.p / self.c.au, x.f, x.g, x.h, x.k, x.l])
    }

    /// Ring-orbit slow elements in canonical units.
    pub fn ring_target(&self, ring: &RingConfig) -> [f64; 5] {
        let x = ring.station_mee(0, self.c);
        [x.p / self.c.au, x.f, x.g, x.h, x.k]
    }

    fn integrate_aug(&self, problem: Problem, y0: &[f64], dt: f64) -> Result<Vec<f64>> {
        let f_acc = self.f_acc;
        integrate(
            move |_t, y, dy| augmented_rhs(problem, y, f_acc, dy),
            y0,
            0.0,
            dt,
            &self.opts.ode,
        )
    }

    /// One fixed-flight-time energy-problem shooting solve.  Residual:
    /// five slow elements matched at tf and λ_L(tf) = 0 (free longitude).
    /// Returns (costates at t0, ∫τ dt, Newton iterations).
    fn energy_solve_at(
        &self,
        x0: &[f64; 6],
        target_slow5: &[f64; 5],
        dt: f64,
        warm: Option<&[f64; 6]>,
    ) -> Result<([f64; 6], f64, usize)> {
        let residual = |lam: &[f64]| -> Result<Vec<f64>> {
            let mut y0 = [0.0; 13];
            y0[..6].copy_from_slice(x0);
            y0[6..12].copy_from_slice(lam);
            let yf = self.integrate_aug(Problem::Energy, &y0, dt)?;
            let mut r = Vec::with_capacity(6);
            for i in 0..5 {
                r.push(yf[i] - target_slow5[i]);
            }
            r.push(yf[11]);
            Ok(r)
        };

        // Multistart ladder: caller's warm start, λ = 0, then scaled
        // unit-sphere samples.
        let mut starts: Vec<[f64; 6]> = Vec::new();
        if let Some(w) = warm {
            starts.push(*w);
        }
        starts.push([0.0; 6]);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let scales = [1e-3, 1e-2, 1e-1, 1.0];
        for k in 0..self.opts.multistarts {
            let mut v: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0f64..1.0));
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-9);
            let s = scales[k % scales.len()];
            v.iter_mut().for_each(|a| *a *= s / n);
            starts.push(v);
        }

        let newton = NewtonOptions {
            tol: 1e-8,
            ..self.opts.newton
        };
        let mut last_err = None;
        for (idx, start) in starts.iter().enumerate() {
            match newton_fd(&residual, start, &newton) {
                Ok(out) => {
                    log::debug!(
                        "energy solve at dt={dt:.4}: start {idx} converged in {} iters",
                        out.iters
                    );
                    let lam: [f64; 6] = out.x.as_slice().try_into().expect("6 costates");
                    let mut y0 = [0.0; 13];
                    y0[..6].copy_from_slice(x0);
                    y0[6..12].copy_from_slice(&lam);
                    let quad = self.integrate_aug(Problem::Energy, &y0, dt)?[12];
                    return Ok((lam, quad, out.iters));
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or(Error::ShootingNonConvergence {
            residual: f64::INFINITY,
            iters: 0,
        }))
    }

    /// Energy-optimal warm start: solve the smoothed problem, then adjust the
    /// flight time until the accumulated Δv is equivalent to f·Δt.  The
    /// consistency root is bracketed inside [guess/4, 4·guess] and bisected
    /// (∫τ dt − Δt is decreasing in Δt); a guess so far off that no root
    /// lies in that window is reported as non-convergence.
    pub fn solve_energy_optimal(
        &self,
        el0: &KeplerianElements,
        t0: Epoch,
        target_slow5: &[f64; 5],
        dt_guess_s: f64,
    ) -> Result<EnergySolution> {
        if !(dt_guess_s > 0.0) {
            return Err(Error::InvalidArgument(
                "energy warm start needs a positive flight-time guess".into(),
            ));
        }
        let x0 = self.canonical_mee(el0, t0)?;
        let dt0 = self.seconds_to_canonical(dt_guess_s);

        let (lam, quad, iters) = self.energy_solve_at(&x0, target_slow5, dt0, None)?;
        let mut total_iters = iters;
        // Cache of converged (dt, λ) pairs for warm starts.
        let mut cache: Vec<(f64, [f64; 6])> = vec![(dt0, lam)];

        let solution = if quad.abs() <= 1e-9 * dt0.max(1.0) {
            // Null transfer: no thrust needed, nothing to adjust.
            (lam, quad, dt0)
        } else if (quad - dt0).abs() <= DT_CONSISTENCY_BAND * dt0 {
            (lam, quad, dt0)
        } else {
            let solve_at =
                |dt: f64, cache: &mut Vec<(f64, [f64; 6])>| -> Result<(f64, [f64; 6], usize)> {
                    let warm = cache
                        .iter()
                        .min_by(|a, b| {
                            let da = (a.0.ln() - dt.ln()).abs();
                            let db = (b.0.ln() - dt.ln()).abs();
                            da.total_cmp(&db)
                        })
                        .map(|(_, l)| *l);
                    let (l, q, it) = self.energy_solve_at(&x0, target_slow5, dt, warm.as_ref())?;
                    cache.push((dt, l));
                    Ok((q, l, it))
                };

            // Bracket the consistency root of g(dt) = ∫τ dt − dt.
            let upward = quad > dt0;
            let mut prev_dt = dt0;
            let mut bracket = None;
            for factor in [2.0, DT_TRUST_FACTOR] {
                let dt_try = if upward { dt0 * factor } else { dt0 / factor };
                let (q, _, it) = solve_at(dt_try, &mut cache)?;
                total_iters += it;
                let g_try = q - dt_try;
                if (g_try > 0.0) != upward {
                    bracket = Some(if upward {
                        (prev_dt, dt_try)
                    } else {
                        (dt_try, prev_dt)
                    });
                    break;
                }
                prev_dt = dt_try;
            }
            let (mut lo, mut hi) = bracket.ok_or(Error::ShootingNonConvergence {
                residual: (quad - dt0).abs(),
                iters: total_iters,
            })?;

            let mut accepted = None;
            for _ in 0..12 {
                let mid = 0.5 * (lo + hi);
                let (q, l, it) = solve_at(mid, &mut cache)?;
                total_iters += it;
                if (q - mid).abs() <= DT_CONSISTENCY_BAND * mid {
                    accepted = Some((l, q, mid));
                    break;
                }
                if q > mid {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            accepted.ok_or(Error::ShootingNonConvergence {
                residual: (hi - lo) / dt0,
                iters: total_iters,
            })?
        };

        let (lam, quad, dt) = solution;
        log::debug!(
            "energy warm start: dt {:.4} -> {:.4} TU, dv {:.4} km/s, {} Newton iters",
            dt0,
            dt,
            self.f_acc * quad * self.velocity_unit_kms(),
            total_iters
        );
        Ok(EnergySolution {
            aug: AugmentedState {
                x: EquinoctialState {
                    p: x0[0],
                    f: x0[1],
                    g: x0[2],
                    h: x0[3],
                    k: x0[4],
                    l: x0[5],
                },
                lam,
            },
            dt_s: self.canonical_to_seconds(dt),
            dv_kms: self.f_acc * quad * self.velocity_unit_kms(),
            newton_iters: total_iters,
        })
    }

    /// Scale costates so H(t0) = 0 for the time-optimal Hamiltonian; falls
    /// back to unit norm when that scaling would need a sign flip (only
    /// positive scalings leave the control unchanged).  Makes the solve
    /// invariant to any positive scaling of the warm start.
    pub fn normalize_costates(&self, x0: &[f64; 6], lam: &[f64; 6]) -> [f64; 6] {
        let (a, b) = gauss_ab(x0);
        let mut lam_a = 0.0;
        for i in 0..6 {
            lam_a += lam[i] * a[i];
        }
        let denom = lam_a - self.f_acc * bt_lambda(&b, lam).norm();
        let norm: f64 = lam.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return *lam;
        }
        let scale = if denom < -1e-12 { -1.0 / denom } else { 1.0 / norm };
        std::array::from_fn(|i| lam[i] * scale)
    }

    /// Minimum-time transfer onto the target orbit with the final longitude
    /// left free.  Unknowns (λ0, Δt); residual: five slow elements at tf,
    /// λ_L(tf), H(tf).
    pub fn solve_time_optimal_free_l(
        &self,
        el0: &KeplerianElements,
        t0: Epoch,
        target_slow5: &[f64; 5],
        warm_lam: &[f64; 6],
        warm_dt_s: f64,
    ) -> Result<TransferSolution> {
        let x0 = self.canonical_mee(el0, t0)?;

        // Null transfer: already on the target orbit.
        let slow_err: f64 = (0..5).map(|i| (x0[i] - target_slow5[i]).abs()).sum();
        if slow_err < 1e-7 {
            return Ok(TransferSolution {
                t0,
                tf: t0,
                lam0: [0.0; 6],
                dv_equiv: 0.0,
                target: *target_slow5,
                lf: x0[5],
                newton_iters: 0,
            });
        }

        let residual = |z: &[f64]| -> Result<Vec<f64>> {
            let dt = z[6];
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(
                    "flight time must stay positive".into(),
                ));
            }
            let mut y0 = [0.0; 12];
            y0[..6].copy_from_slice(&x0);
            y0[6..12].copy_from_slice(&z[..6]);
            let yf = self.integrate_aug(Problem::TimeOptimal, &y0, dt)?;
            let xf: &[f64; 6] = yf[0..6].try_into().expect("state");
            let lamf: &[f64; 6] = yf[6..12].try_into().expect("costate");
            let mut r = Vec::with_capacity(7);
            for i in 0..5 {
                r.push(xf[i] - target_slow5[i]);
            }
            r.push(lamf[5]);
            r.push(hamiltonian_time_optimal(xf, lamf, self.f_acc));
            Ok(r)
        };

        let mut z0 = [0.0; 7];
        z0[..6].copy_from_slice(&self.normalize_costates(&x0, warm_lam));
        z0[6] = self.seconds_to_canonical(warm_dt_s).max(1e-6);
        let out = newton_fd(&residual, &z0, &self.opts.newton)?;
        let dt = out.x[6];
        let mut y0 = [0.0; 12];
        y0[..6].copy_from_slice(&x0);
        y0[6..12].copy_from_slice(&out.x[..6]);
        let yf = self.integrate_aug(Problem::TimeOptimal, &y0, dt)?;
        Ok(TransferSolution {
            t0,
            tf: t0.plus_seconds(self.canonical_to_seconds(dt), self.c.day),
            lam0: out.x[..6].try_into().expect("6 costates"),
            dv_equiv: self.c.f_atd_kms2() * self.canonical_to_seconds(dt),
            target: *target_slow5,
            lf: yf[5],
            newton_iters: out.iters,
        })
    }

    /// Minimum-time rendezvous with one ring station: all six elements
    /// matched (longitude modulo 2π via the half-angle sine), with the
    /// moving-target transversality H(tf) = n_D·λ_L(tf).
    pub fn solve_time_optimal_rendezvous(
        &self,
        el0: &KeplerianElements,
        t0: Epoch,
        ring: &RingConfig,
        station: usize,
        guess_lam: &[f64; 6],
        guess_tf: Epoch,
    ) -> Result<TransferSolution> {
        let x0 = self.canonical_mee(el0, t0)?;
        let target = self.ring_target(ring);
        let n_d = ring.mean_motion(self.c) * self.tu;
        let ls_t0 = ring.station_true_longitude(station, t0, self.c);

        let residual = |z: &[f64]| -> Result<Vec<f64>> {
            let dt = z[6];
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(
                    "flight time must stay positive".into(),
                ));
            }
            let mut y0 = [0.0; 12];
            y0[..6].copy_from_slice(&x0);
            y0[6..12].copy_from_slice(&z[..6]);
            let yf = self.integrate_aug(Problem::TimeOptimal, &y0, dt)?;
            let xf: &[f64; 6] = yf[0..6].try_into().expect("state");
            let lamf: &[f64; 6] = yf[6..12].try_into().expect("costate");
            let l_station = ls_t0 + n_d * dt;
            let mut r = Vec::with_capacity(7);
            for i in 0..5 {
                r.push(xf[i] - target[i]);
            }
            r.push((0.5 * (xf[5] - l_station)).sin());
            r.push(hamiltonian_time_optimal(xf, lamf, self.f_acc) - n_d * lamf[5]);
            Ok(r)
        };

        let dt_guess = self
            .seconds_to_canonical(guess_tf.seconds_since(t0, self.c.day))
            .max(1e-3);
        let mut z0 = [0.0; 7];
        z0[..6].copy_from_slice(&self.normalize_costates(&x0, guess_lam));
        z0[6] = dt_guess;
        let out = newton_fd(&residual, &z0, &self.opts.newton)?;
        let dt = out.x[6];
        let mut y0 = [0.0; 12];
        y0[..6].copy_from_slice(&x0);
        y0[6..12].copy_from_slice(&out.x[..6]);
        let yf = self.integrate_aug(Problem::TimeOptimal, &y0, dt)?;
        Ok(TransferSolution {
            t0,
            tf: t0.plus_seconds(self.canonical_to_seconds(dt), self.c.day),
            lam0: out.x[..6].try_into().expect("6 costates"),
            dv_equiv: self.c.f_atd_kms2() * self.canonical_to_seconds(dt),
            target,
            lf: yf[5],
            newton_iters: out.iters,
        })
    }
}
