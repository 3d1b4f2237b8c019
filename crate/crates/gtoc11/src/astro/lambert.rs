//! Two-point boundary value problem on a conic: given two heliocentric
//! positions and a time of flight, recover the departure and arrival
//! velocities.  Householder iterations on the universal Lancaster-Blanchard
//! variable `x`, with Battin's hypergeometric series near the parabola and a
//! Lagrange formulation elsewhere.  Supports multi-revolution transfers, which
//! admit up to two solutions (a left and a right branch) per revolution count.

use crate::{Error, Result, V3};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Prograde,
    Retrograde,
}

/// Which of the (up to two) fixed-revolution solutions this is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    /// The unique zero-revolution solution.
    Single,
    /// Multi-revolution, x < x_min (larger semi-major axis).
    Left,
    /// Multi-revolution, x > x_min.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertSolution {
    /// Departure velocity, km/s.
    pub v1: V3,
    /// Arrival velocity, km/s.
    pub v2: V3,
    pub revs: u32,
    pub branch: Branch,
}

/// Dimensionless time of flight at `x` for `n` full revolutions.
fn x2tof(x: f64, n: u32, lambda: f64) -> f64 {
    const BATTIN: f64 = 0.01;
    const LAGRANGE: f64 = 0.2;
    let dist = (x - 1.0).abs();
    if dist < LAGRANGE && dist > BATTIN {
        // Lagrange form, safe away from the parabola.
        let a = 1.0 / (1.0 - x * x);
        if a > 0.0 {
            let alfa = 2.0 * x.clamp(-1.0, 1.0).acos();
            let mut beta = 2.0 * (lambda * lambda / a).sqrt().clamp(-1.0, 1.0).asin();
            if lambda < 0.0 {
                beta = -beta;
            }
            return a * a.sqrt()
                * ((alfa - alfa.sin()) - (beta - beta.sin()) + 2.0 * PI * n as f64)
                / 2.0;
        } else {
            let alfa = 2.0 * x.acosh();
            let mut beta = 2.0 * (-lambda * lambda / a).sqrt().asinh();
            if lambda < 0.0 {
                beta = -beta;
            }
            return -a * (-a).sqrt() * ((beta - beta.sinh()) - (alfa - alfa.sinh())) / 2.0;
        }
    }
    let k = lambda * lambda;
    let e = x * x - 1.0;
    let rho = e.abs();
    let z = (1.0 + k * e).sqrt();
    if dist < BATTIN {
        // Battin series through the parabolic point.
        let eta = z - lambda * x;
        let s1 = 0.5 * (1.0 - lambda - x * eta);
        let q = 4.0 / 3.0 * hyper_2f1_311(s1);
        (eta * eta * eta * q + 4.0 * lambda * eta) / 2.0 + n as f64 * PI / rho.powf(1.5)
    } else {
        // Lancaster-Blanchard form.
        let y = rho.sqrt();
        let g = x * z - lambda * e;
        let d = if e < 0.0 {
            let l = g.clamp(-1.0, 1.0).acos();
            n as f64 * PI + l
        } else {
            let f = y * (z - lambda * x);
            (f + g).ln()
        };
        (x - lambda * z - d / y) / e
    }
}

/// Gauss hypergeometric 2F1(3, 1; 5/2; z) by direct series summation.
fn hyper_2f1_311(z: f64) -> f64 {
    let mut sj = 1.0;
    let mut cj = 1.0;
    for j in 0..200 {
        let jf = j as f64;
        cj *= (3.0 + jf) * (1.0 + jf) / (2.5 + jf) * z / (jf + 1.0);
        sj += cj;
        if cj.abs() < 1e-12 {
            break;
        }
    }
    sj
}

/// First three derivatives of the dimensionless time of flight at `x`.
fn dt_dx(x: f64, t: f64, lambda: f64) -> (f64, f64, f64) {
    let l2 = lambda * lambda;
    let l3 = l2 * lambda;
    let umx2 = 1.0 - x * x;
    let y = (1.0 - l2 * umx2).sqrt();
    let y3 = y * y * y;
    let y5 = y3 * y * y;
    let dt = (3.0 * t * x - 2.0 + 2.0 * l3 * x / y) / umx2;
    let ddt = (3.0 * t + 5.0 * x * dt + 2.0 * (1.0 - l2) * l3 / y3) / umx2;
    let dddt = (7.0 * x * ddt + 8.0 * dt - 6.0 * (1.0 - l2) * l2 * l3 * x / y5) / umx2;
    (dt, ddt, dddt)
}

/// Householder (third order) root find for x such that tof(x) = t.
fn householder(t: f64, mut x0: f64, n: u32, lambda: f64, eps: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let tof = x2tof(x0, n, lambda);
        let (dt, ddt, dddt) = dt_dx(x0, tof, lambda);
        let delta = tof - t;
        let dt2 = dt * dt;
        let xnew = x0
            - delta * (dt2 - delta * ddt / 2.0)
                / (dt * (dt2 - delta * ddt) + dddt * delta * delta / 6.0);
        let err = (x0 - xnew).abs();
        x0 = xnew;
        if err < eps {
            break;
        }
    }
    x0
}

/// All solutions with exactly `revs` complete revolutions.
///
/// Zero revolutions always yields exactly one solution; `revs >= 1` yields the
/// left and right branches when the time of flight admits them, otherwise
/// [`Error::LambertNoSolution`].
pub fn lambert_all(
    r1: &V3,
    r2: &V3,
    tof_s: f64,
    mu: f64,
    direction: Direction,
    revs: u32,
) -> Result<Vec<LambertSolution>> {
    if !(tof_s > 0.0) {
        return Err(Error::LambertBadTof);
    }
    let r1n = r1.norm();
    let r2n = r2.norm();
    if r1n <= 0.0 || r2n <= 0.0 || !mu.is_finite() || mu <= 0.0 {
        return Err(Error::SingularElements(
            "Lambert endpoints and mu must be non-degenerate".into(),
        ));
    }
    let c_vec = r2 - r1;
    let c = c_vec.norm();
    let s = (c + r1n + r2n) / 2.0;
    let ir1 = r1 / r1n;
    let ir2 = r2 / r2n;
    let ih_raw = ir1.cross(&ir2);
    let sin_theta = ih_raw.norm();
    if sin_theta < 1e-8 {
        return Err(Error::LambertIllConditioned(sin_theta));
    }
    let ih = ih_raw / sin_theta;
    let mut lambda = (1.0 - c / s).max(0.0).sqrt();
    let (mut it1, mut it2) = if ih.z < 0.0 {
        // Transfer angle greater than pi.
        lambda = -lambda;
        (ir1.cross(&ih), ir2.cross(&ih))
    } else {
        (ih.cross(&ir1), ih.cross(&ir2))
    };
    if direction == Direction::Retrograde {
        lambda = -lambda;
        it1 = -it1;
        it2 = -it2;
    }

    let t = (2.0 * mu / (s * s * s)).sqrt() * tof_s;
    let t00 = lambda.clamp(-1.0, 1.0).acos() + lambda * (1.0 - lambda * lambda).sqrt();
    let t1 = 2.0 / 3.0 * (1.0 - lambda * lambda * lambda);

    // Maximum revolution count compatible with this T.
    let mut m_max = (t / PI).floor() as u32;
    if m_max > 0 {
        let t0m = t00 + m_max as f64 * PI;
        if t < t0m {
            // Locate the minimum of T(x) for m_max revolutions (Halley).
            let mut x_old: f64 = 0.0;
            let mut t_min = t0m;
            for _ in 0..12 {
                let (dt, ddt, dddt) = dt_dx(x_old, t_min, lambda);
                let x_new = if dt != 0.0 {
                    x_old - dt * ddt / (ddt * ddt - dt * dddt / 2.0)
                } else {
                    x_old
                };
                let err = (x_old - x_new).abs();
                t_min = x2tof(x_new, m_max, lambda);
                x_old = x_new;
                if err < 1e-13 {
                    break;
                }
            }
            if t_min > t {
                m_max -= 1;
            }
        }
    }

    let mut xs: Vec<(f64, Branch)> = Vec::new();
    if revs == 0 {
        let x0 = if t >= t00 {
            -(t - t00) / (t - t00 + 4.0)
        } else if t <= t1 {
            t1 * (t1 - t) / (0.4 * (1.0 - lambda.powi(5)) * t) + 1.0
        } else {
            (t / t00).powf(std::f64::consts::LN_2 / (t1 / t00).ln()) - 1.0
        };
        xs.push((householder(t, x0, 0, lambda, 1e-13, 25), Branch::Single));
    } else {
        if revs > m_max {
            return Err(Error::LambertNoSolution { revs });
        }
        let nf = revs as f64;
        let tmp = ((nf * PI + PI) / (8.0 * t)).powf(2.0 / 3.0);
        let x0l = (tmp - 1.0) / (tmp + 1.0);
        let tmp = (8.0 * t / (nf * PI)).powf(2.0 / 3.0);
        let x0r = (tmp - 1.0) / (tmp + 1.0);
        xs.push((householder(t, x0l, revs, lambda, 1e-13, 25), Branch::Left));
        xs.push((householder(t, x0r, revs, lambda, 1e-13, 25), Branch::Right));
    }

    let gamma = (mu * s / 2.0).sqrt();
    let rho = (r1n - r2n) / c;
    let sigma = (1.0 - rho * rho).max(0.0).sqrt();
    let out = xs
        .into_iter()
        .map(|(x, branch)| {
            let y = (1.0 - lambda * lambda * (1.0 - x * x)).sqrt();
            let vr1 = gamma * ((lambda * y - x) - rho * (lambda * y + x)) / r1n;
            let vr2 = -gamma * ((lambda * y - x) + rho * (lambda * y + x)) / r2n;
            let vt = gamma * sigma * (y + lambda * x);
            LambertSolution {
                v1: vr1 * ir1 + (vt / r1n) * it1,
                v2: vr2 * ir2 + (vt / r2n) * it2,
                revs,
                branch,
            }
        })
        .collect();
    Ok(out)
}

/// First solution of [`lambert_all`] (the unique one for zero revolutions).
pub fn lambert(
    r1: &V3,
    r2: &V3,
    tof_s: f64,
    mu: f64,
    direction: Direction,
    revs: u32,
) -> Result<LambertSolution> {
    Ok(lambert_all(r1, r2, tof_s, mu, direction, revs)?[0])
}
