//! Two-body propagation of a Cartesian state with universal variables,
//! valid for elliptic, parabolic, and hyperbolic arcs alike.

use super::{CartesianState, Constants};
use crate::{Error, Result};

/// Stumpff C(z) = (1 - cos sqrt(z))/z, extended smoothly through z = 0.
pub(crate) fn stumpff_c(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        // Series about zero avoids catastrophic cancellation.
        1.0 / 2.0 - z / 24.0 + z * z / 720.0 - z * z * z / 40320.0
    } else if z > 0.0 {
        (1.0 - z.sqrt().cos()) / z
    } else {
        ((-z).sqrt().cosh() - 1.0) / (-z)
    }
}

/// Stumpff S(z) = (sqrt(z) - sin sqrt(z))/z^{3/2}, extended through z = 0.
pub(crate) fn stumpff_s(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 / 6.0 - z / 120.0 + z * z / 5040.0 - z * z * z / 362880.0
    } else if z > 0.0 {
        let sz = z.sqrt();
        (sz - sz.sin()) / (z * sz)
    } else {
        let sz = (-z).sqrt();
        (sz.sinh() - sz) / (-z * sz)
    }
}

/// Propagate `s` by `dt_s` seconds along its osculating conic.
pub fn propagate_kepler(s: &CartesianState, dt_s: f64, c: &Constants) -> Result<CartesianState> {
    const MAX_ITER: usize = 100;
    let epoch1 = s.epoch.plus_seconds(dt_s, c.day);
    if dt_s == 0.0 {
        return Ok(CartesianState { epoch: epoch1, ..*s });
    }
    let mu = c.mu_sun;
    let smu = mu.sqrt();
    let r0 = s.r.norm();
    let rdotv = s.r.dot(&s.v);
    // Reciprocal semi-major axis; > 0 elliptic, < 0 hyperbolic.
    let alpha = 2.0 / r0 - s.v.norm_squared() / mu;

    let mut chi = if alpha > 1e-12 {
        smu * alpha * dt_s
    } else if alpha < -1e-12 {
        let a = 1.0 / alpha;
        let num = -2.0 * mu * alpha * dt_s;
        let den = rdotv + dt_s.signum() * (-mu * a).sqrt() * (1.0 - r0 * alpha);
        dt_s.signum() * (-a).sqrt() * (num / den).abs().max(f64::MIN_POSITIVE).ln()
    } else {
        smu * dt_s / r0
    };

    let mut converged = false;
    for _ in 0..MAX_ITER {
        let z = alpha * chi * chi;
        let cc = stumpff_c(z);
        let ss = stumpff_s(z);
        let chi2 = chi * chi;
        let f = rdotv / smu * chi2 * cc + (1.0 - alpha * r0) * chi2 * chi * ss + r0 * chi
            - smu * dt_s;
        let fp = rdotv / smu * chi * (1.0 - z * ss) + (1.0 - alpha * r0) * chi2 * cc + r0;
        let step = f / fp;
        chi -= step;
        if step.abs() < 1e-12 * chi.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::UniversalKeplerNonConvergence {
            dt_s,
            iters: MAX_ITER,
        });
    }

    let z = alpha * chi * chi;
    let cc = stumpff_c(z);
    let ss = stumpff_s(z);
    let chi2 = chi * chi;
    let lf = 1.0 - chi2 / r0 * cc;
    let lg = dt_s - chi2 * chi / smu * ss;
    let r1 = lf * s.r + lg * s.v;
    let rn1 = r1.norm();
    let lfd = smu / (rn1 * r0) * (z * ss - 1.0) * chi;
    let lgd = 1.0 - chi2 / rn1 * cc;
    Ok(CartesianState {
        r: r1,
        v: lfd * s.r + lgd * s.v,
        epoch: epoch1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::{kep_to_cart, Epoch, KeplerianElements, TAU};
    use crate::V3;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_element_propagation_on_bound_orbits() {
        let c = Constants::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let el = KeplerianElements {
                a_au: rng.gen_range(0.5..3.0),
                e: rng.gen_range(0.0..0.9),
                i: rng.gen_range(0.0..0.6),
                raan: rng.gen_range(0.0..TAU),
                argp: rng.gen_range(0.0..TAU),
                m0: rng.gen_range(0.0..TAU),
                ref_epoch: Epoch::new(95739.0),
            };
            let p = el.period_s(&c);
            let dt = rng.gen_range(-1.0..2.0) * p;
            let s0 = kep_to_cart(&el, el.ref_epoch, &c).unwrap();
            let s_uv = propagate_kepler(&s0, dt, &c).unwrap();
            let s_el = kep_to_cart(&el, el.ref_epoch.plus_seconds(dt, c.day), &c).unwrap();
            assert!((s_uv.r - s_el.r).norm() < 1e-8 * s_el.r.norm());
            assert!((s_uv.v - s_el.v).norm() < 1e-8 * s_el.v.norm());
        }
    }

    #[test]
    fn hyperbolic_arc_conserves_invariants_and_reverses() {
        let c = Constants::default();
        let v_esc = (2.0 * c.mu_sun / c.au).sqrt();
        let s0 = CartesianState {
            r: V3::new(c.au, 0.0, 0.0),
            v: V3::new(1.0, 1.05 * v_esc, 0.2),
            epoch: Epoch::new(95739.0),
        };
        let dt = 200.0 * c.day;
        let s1 = propagate_kepler(&s0, dt, &c).unwrap();
        let en = |s: &CartesianState| 0.5 * s.v.norm_squared() - c.mu_sun / s.r.norm();
        assert!(en(&s0) > 0.0);
        assert_relative_eq!(en(&s0), en(&s1), max_relative = 1e-9);
        assert_relative_eq!(
            s0.r.cross(&s0.v).norm(),
            s1.r.cross(&s1.v).norm(),
            max_relative = 1e-9
        );
        let s2 = propagate_kepler(&s1, -dt, &c).unwrap();
        assert!((s2.r - s0.r).norm() < 1e-8 * s0.r.norm());
        assert!((s2.v - s0.v).norm() < 1e-8 * s0.v.norm());
    }

    #[test]
    fn zero_time_is_identity() {
        let c = Constants::default();
        let s0 = CartesianState {
            r: V3::new(c.au, 2.0e7, -1.0e6),
            v: V3::new(3.0, 25.0, 1.0),
            epoch: Epoch::new(96000.0),
        };
        let s1 = propagate_kepler(&s0, 0.0, &c).unwrap();
        assert_eq!(s1.r, s0.r);
        assert_eq!(s1.v, s0.v);
    }

    #[test]
    fn near_parabolic_arc_propagates() {
        let c = Constants::default();
        let v_esc = (2.0 * c.mu_sun / c.au).sqrt();
        let s0 = CartesianState {
            r: V3::new(c.au, 0.0, 0.0),
            v: V3::new(0.0, v_esc * (1.0 + 1e-9), 0.0),
            epoch: Epoch::new(95739.0),
        };
        let s1 = propagate_kepler(&s0, 50.0 * c.day, &c).unwrap();
        let en = |s: &CartesianState| 0.5 * s.v.norm_squared() - c.mu_sun / s.r.norm();
        assert!((en(&s1) - en(&s0)).abs() / en(&s0).abs().max(1e-12) < 1e-6 || (en(&s1) - en(&s0)).abs() < 1e-9);
    }
}
