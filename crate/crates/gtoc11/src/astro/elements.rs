use super::{Constants, Epoch};
use crate::{Error, Result, V3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const TAU: f64 = 2.0 * PI;

/// Wrap an angle to [0, 2pi).
pub fn wrap_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r == TAU {
        0.0
    } else {
        r
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_2pi(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Classical elements of a bound heliocentric orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerianElements {
    /// Semi-major axis, AU.
    pub a_au: f64,
    pub e: f64,
    /// Inclination, rad.
    pub i: f64,
    /// Right ascension of the ascending node, rad.
    pub raan: f64,
    /// Argument of perihelion, rad.
    pub argp: f64,
    /// Mean anomaly at `ref_epoch`, rad.
    pub m0: f64,
    pub ref_epoch: Epoch,
}

/// Inertial position/velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    /// km
    pub r: V3,
    /// km/s
    pub v: V3,
    pub epoch: Epoch,
}

/// Modified equinoctial elements x = [p, f, g, h, k, L].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquinoctialState {
    /// Semi-latus rectum, km.
    pub p: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub k: f64,
    /// True longitude, rad.
    pub l: f64,
}

impl KeplerianElements {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_au.is_finite() && self.a_au > 0.0) {
            return Err(Error::SingularElements(format!(
                "semi-major axis {} AU out of range",
                self.a_au
            )));
        }
        if !(self.e.is_finite() && (0.0..1.0).contains(&self.e)) {
            return Err(Error::SingularElements(format!(
                "eccentricity {} out of [0,1)",
                self.e
            )));
        }
        if !(self.i.is_finite() && (0.0..=PI).contains(&self.i)) {
            return Err(Error::SingularElements(format!(
                "inclination {} rad out of [0,pi]",
                self.i
            )));
        }
        for (name, v) in [
            ("raan", self.raan),
            ("argp", self.argp),
            ("m0", self.m0),
            ("ref_epoch", self.ref_epoch.mjd),
        ] {
            if !v.is_finite() {
                return Err(Error::SingularElements(format!("{name} not finite")));
            }
        }
        Ok(())
    }

    /// Mean motion, rad/s.
    pub fn mean_motion(&self, c: &Constants) -> f64 {
        let a_km = self.a_au * c.au;
        (c.mu_sun / a_km.powi(3)).sqrt()
    }

    /// Orbital period, s.
    pub fn period_s(&self, c: &Constants) -> f64 {
        TAU / self.mean_motion(c)
    }

    /// Same orbit with the mean anomaly advanced to epoch `t`.
    pub fn at_epoch(&self, t: Epoch, c: &Constants) -> KeplerianElements {
        let n = self.mean_motion(c);
        let dt = t.seconds_since(self.ref_epoch, c.day);
        KeplerianElements {
            m0: wrap_2pi(self.m0 + n * dt),
            ref_epoch: t,
            ..*self
        }
    }
}

/// Solve Kepler's equation E - e sin E = M by safeguarded Newton iteration.
///
/// The iterate is kept inside the bracket [M-e, M+e] (which always contains
/// the root); if a Newton step leaves it, a bisection step is taken instead.
pub fn solve_kepler(m: f64, e: f64) -> Result<f64> {
    const TOL: f64 = 1e-13;
    const MAX_ITER: usize = 50;
    let m = wrap_pi(m);
    let (mut lo, mut hi) = (m - e, m + e);
    // Danby's starter stays inside the bracket for every (m, e).
    let mut ecc = m + 0.85 * e * m.sin().signum();
    for _ in 0..MAX_ITER {
        let f = ecc - e * ecc.sin() - m;
        let fp = 1.0 - e * ecc.cos();
        let step = f / fp;
        if step.abs() < TOL {
            return Ok(ecc - step);
        }
        if f > 0.0 {
            hi = ecc;
        } else {
            lo = ecc;
        }
        let mut next = ecc - step;
        if next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        ecc = next;
    }
    Err(Error::KeplerNonConvergence {
        m,
        e,
        iters: MAX_ITER,
    })
}

/// True anomaly from eccentric anomaly.
pub fn true_from_eccentric(ecc_anom: f64, e: f64) -> f64 {
    2.0 * ((1.0 + e).sqrt() * (ecc_anom / 2.0).sin())
        .atan2((1.0 - e).sqrt() * (ecc_anom / 2.0).cos())
}

/// Eccentric anomaly from true anomaly.
pub fn eccentric_from_true(nu: f64, e: f64) -> f64 {
    2.0 * ((1.0 - e).sqrt() * (nu / 2.0).sin()).atan2((1.0 + e).sqrt() * (nu / 2.0).cos())
}

/// Two-body state at epoch `t` from elements (the ephemeris backbone).
pub fn kep_to_cart(el: &KeplerianElements, t: Epoch, c: &Constants) -> Result<CartesianState> {
    el.validate()?;
    let n = el.mean_motion(c);
    let dt = t.seconds_since(el.ref_epoch, c.day);
    let m = el.m0 + n * dt;
    let ea = solve_kepler(m, el.e)?;
    let nu = true_from_eccentric(ea, el.e);
    let a_km = el.a_au * c.au;
    let p = a_km * (1.0 - el.e * el.e);
    let r = a_km * (1.0 - el.e * ea.cos());
    let (snu, cnu) = nu.sin_cos();
    let r_pf = V3::new(r * cnu, r * snu, 0.0);
    let vf = (c.mu_sun / p).sqrt();
    let v_pf = V3::new(-vf * snu, vf * (el.e + cnu), 0.0);
    let rot = perifocal_to_inertial(el.raan, el.i, el.argp);
    Ok(CartesianState {
        r: rot * r_pf,
        v: rot * v_pf,
        epoch: t,
    })
}

fn perifocal_to_inertial(raan: f64, i: f64, argp: f64) -> nalgebra::Rotation3<f64> {
    nalgebra::Rotation3::from_axis_angle(&V3::z_axis(), raan)
        * nalgebra::Rotation3::from_axis_angle(&V3::x_axis(), i)
        * nalgebra::Rotation3::from_axis_angle(&V3::z_axis(), argp)
}

/// Osculating elements from an inertial state.
pub fn cart_to_kep(s: &CartesianState, c: &Constants) -> Result<KeplerianElements> {
    let mu = c.mu_sun;
    let r = s.r.norm();
    if r <= 0.0 {
        return Err(Error::SingularElements("zero radius".into()));
    }
    let v2 = s.v.norm_squared();
    let hv = s.r.cross(&s.v);
    let hn = hv.norm();
    if hn < 1e-8 {
        return Err(Error::SingularElements("rectilinear trajectory".into()));
    }
    let ev = s.v.cross(&hv) / mu - s.r / r;
    let e = ev.norm();
    let energy = 0.5 * v2 - mu / r;
    if energy >= 0.0 || e >= 1.0 {
        return Err(Error::SingularElements(format!(
            "not a bound orbit (e={e}, energy={energy})"
        )));
    }
    let a_km = -mu / (2.0 * energy);
    let h_hat = hv / hn;
    let i = h_hat.z.clamp(-1.0, 1.0).acos();
    let nv = V3::new(-hv.y, hv.x, 0.0);
    let nn = nv.norm();
    // In-plane basis (n_hat along the ascending node, m_hat 90 deg ahead).
    let (raan, n_hat) = if nn < 1e-10 * hn {
        (0.0, V3::x())
    } else {
        (wrap_2pi(nv.y.atan2(nv.x)), nv / nn)
    };
    let m_hat = h_hat.cross(&n_hat);
    let (argp, nu) = if e < 1e-12 {
        // Circular: perihelion undefined, measure the anomaly from the node.
        (0.0, wrap_2pi(s.r.dot(&m_hat).atan2(s.r.dot(&n_hat))))
    } else {
        let e_hat = ev / e;
        let argp = wrap_2pi(ev.dot(&m_hat).atan2(ev.dot(&n_hat)));
        let q_hat = h_hat.cross(&e_hat);
        let nu = wrap_2pi(s.r.dot(&q_hat).atan2(s.r.dot(&e_hat)));
        (argp, nu)
    };
    let ea = eccentric_from_true(nu, e);
    let m0 = wrap_2pi(ea - e * ea.sin());
    Ok(KeplerianElements {
        a_au: a_km / c.au,
        e,
        i,
        raan,
        argp,
        m0,
        ref_epoch: s.epoch,
    })
}

/// Modified equinoctial elements at the Keplerian set's reference epoch.
pub fn kep_to_mee(el: &KeplerianElements, c: &Constants) -> Result<EquinoctialState> {
    el.validate()?;
    if el.i >= PI - 1e-9 {
        return Err(Error::SingularElements(
            "equinoctial retrograde singularity (i = pi)".into(),
        ));
    }
    let a_km = el.a_au * c.au;
    let ea = solve_kepler(el.m0, el.e)?;
    let nu = true_from_eccentric(ea, el.e);
    let lon_per = el.argp + el.raan;
    let ti2 = (el.i / 2.0).tan();
    Ok(EquinoctialState {
        p: a_km * (1.0 - el.e * el.e),
        f: el.e * lon_per.cos(),
        g: el.e * lon_per.sin(),
        h: ti2 * el.raan.cos(),
        k: ti2 * el.raan.sin(),
        l: wrap_2pi(el.raan + el.argp + nu),
    })
}

/// Inverse of [`kep_to_mee`]; `epoch` becomes the reference epoch.
pub fn mee_to_kep(x: &EquinoctialState, epoch: Epoch, c: &Constants) -> Result<KeplerianElements> {
    let e = (x.f * x.f + x.g * x.g).sqrt();
    if !(x.p > 0.0) || e >= 1.0 {
        return Err(Error::SingularElements(format!(
            "equinoctial state not a bound ellipse (p={}, e={})",
            x.p, e
        )));
    }
    let a_km = x.p / (1.0 - e * e);
    let i = 2.0 * (x.h * x.h + x.k * x.k).sqrt().atan();
    let raan = if x.h == 0.0 && x.k == 0.0 {
        0.0
    } else {
        wrap_2pi(x.k.atan2(x.h))
    };
    let lon_per = if e < 1e-14 { 0.0 } else { x.g.atan2(x.f) };
    let argp = wrap_2pi(lon_per - raan);
    let nu = wrap_2pi(x.l - raan - argp);
    let ea = eccentric_from_true(nu, e);
    let m0 = wrap_2pi(ea - e * ea.sin());
    Ok(KeplerianElements {
        a_au: a_km / c.au,
        e,
        i,
        raan,
        argp,
        m0,
        ref_epoch: epoch,
    })
}

/// Position/velocity from modified equinoctial elements.
pub fn mee_to_cart(x: &EquinoctialState, c: &Constants) -> (V3, V3) {
    let (sl, cl) = x.l.sin_cos();
    let s2 = 1.0 + x.h * x.h + x.k * x.k;
    let a2 = x.h * x.h - x.k * x.k;
    let w = 1.0 + x.f * cl + x.g * sl;
    let r = x.p / w;
    let pos = V3::new(
        r / s2 * (cl + a2 * cl + 2.0 * x.h * x.k * sl),
        r / s2 * (sl - a2 * sl + 2.0 * x.h * x.k * cl),
        2.0 * r / s2 * (x.h * sl - x.k * cl),
    );
    let vf = (c.mu_sun / x.p).sqrt() / s2;
    let vel = V3::new(
        -vf * (sl + a2 * sl - 2.0 * x.h * x.k * cl + x.g - 2.0 * x.f * x.h * x.k + a2 * x.g),
        -vf * (-cl + a2 * cl + 2.0 * x.h * x.k * sl - x.f + 2.0 * x.g * x.h * x.k + a2 * x.f),
        2.0 * vf * (x.h * cl + x.k * sl + x.f * x.h + x.g * x.k),
    );
    (pos, vel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn consts() -> Constants {
        Constants::default()
    }

    fn random_elements(rng: &mut impl Rng) -> KeplerianElements {
        KeplerianElements {
            a_au: rng.gen_range(0.5..3.0),
            e: rng.gen_range(0.0..0.9),
            i: rng.gen_range(0.0..0.6),
            raan: rng.gen_range(0.0..TAU),
            argp: rng.gen_range(0.0..TAU),
            m0: rng.gen_range(0.0..TAU),
            ref_epoch: Epoch::new(95739.0),
        }
    }

    #[test]
    fn circular_speed_is_vis_viva() {
        let c = consts();
        let el = KeplerianElements {
            a_au: 1.0,
            e: 0.0,
            i: 0.0,
            raan: 0.0,
            argp: 0.0,
            m0: 0.0,
            ref_epoch: Epoch::new(95739.0),
        };
        let s = kep_to_cart(&el, el.ref_epoch, &c).unwrap();
        let v_expect = (c.mu_sun / c.au).sqrt();
        assert_relative_eq!(s.v.norm(), v_expect, max_relative = 1e-13);
        // Rounded literature value.
        assert!((s.v.norm() - 29.7847).abs() < 5e-5);
    }

    #[test]
    fn perihelion_at_zero_mean_anomaly() {
        let c = consts();
        let el = KeplerianElements {
            a_au: 1.3,
            e: 0.4,
            i: 0.2,
            raan: 1.0,
            argp: 2.0,
            m0: 0.0,
            ref_epoch: Epoch::new(96000.0),
        };
        let s = kep_to_cart(&el, el.ref_epoch, &c).unwrap();
        assert_relative_eq!(
            s.r.norm(),
            el.a_au * (1.0 - el.e) * c.au,
            max_relative = 1e-12
        );
    }

    #[test]
    fn propagation_is_periodic() {
        let c = consts();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let el = random_elements(&mut rng);
            let s0 = kep_to_cart(&el, el.ref_epoch, &c).unwrap();
            let t1 = el.ref_epoch.plus_seconds(el.period_s(&c), c.day);
            let s1 = kep_to_cart(&el, t1, &c).unwrap();
            assert!((s1.r - s0.r).norm() < 1e-10 * s0.r.norm());
            assert!((s1.v - s0.v).norm() < 1e-10 * s0.v.norm());
        }
    }

    #[test]
    fn energy_and_momentum_conserved_over_window() {
        let c = consts();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let el = random_elements(&mut rng);
            let s0 = kep_to_cart(&el, el.ref_epoch, &c).unwrap();
            let t1 = el.ref_epoch.plus_days(20.0 * 365.25);
            let s1 = kep_to_cart(&el, t1, &c).unwrap();
            let en = |s: &CartesianState| 0.5 * s.v.norm_squared() - c.mu_sun / s.r.norm();
            assert_relative_eq!(en(&s0), en(&s1), max_relative = 1e-10);
            assert_relative_eq!(
                s0.r.cross(&s0.v).norm(),
                s1.r.cross(&s1.v).norm(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn kepler_solver_is_accurate_at_high_eccentricity() {
        for &e in &[0.0, 0.3, 0.9, 0.99] {
            for i in 0..100 {
                let m = -3.0 + 6.0 * (i as f64) / 99.0;
                let ea = solve_kepler(m, e).unwrap();
                assert!((ea - e * ea.sin() - wrap_pi(m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circular_equatorial_equinoctial_is_trivial() {
        let c = consts();
        let el = KeplerianElements {
            a_au: 1.7,
            e: 0.0,
            i: 0.0,
            raan: 0.0,
            argp: 0.0,
            m0: 0.5,
            ref_epoch: Epoch::new(95739.0),
        };
        let x = kep_to_mee(&el, &c).unwrap();
        assert_eq!(x.f, 0.0);
        assert_eq!(x.g, 0.0);
        assert_eq!(x.h, 0.0);
        assert_eq!(x.k, 0.0);
        assert_relative_eq!(x.p, 1.7 * c.au, max_relative = 1e-14);
    }

    #[test]
    fn equinoctial_round_trip() {
        let c = consts();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let el = random_elements(&mut rng);
            let x = kep_to_mee(&el, &c).unwrap();
            let el2 = mee_to_kep(&x, el.ref_epoch, &c).unwrap();
            assert_relative_eq!(el2.a_au, el.a_au, max_relative = 1e-10);
            assert_relative_eq!(el2.e, el.e, epsilon = 1e-10);
            assert_relative_eq!(el2.i, el.i, epsilon = 1e-10);
            assert!((wrap_pi(el2.raan - el.raan)).abs() < 1e-9);
            assert!((wrap_pi(el2.argp - el.argp)).abs() < 1e-9);
            assert!((wrap_pi(el2.m0 - el.m0)).abs() < 1e-9);
        }
    }

    #[test]
    fn cartesian_round_trip_recovers_conic_invariants() {
        let c = consts();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let el = random_elements(&mut rng);
            let t = el.ref_epoch.plus_days(rng.gen_range(0.0..2000.0));
            let s = kep_to_cart(&el, t, &c).unwrap();
            let el2 = cart_to_kep(&s, &c).unwrap();
            assert_relative_eq!(el2.a_au, el.a_au, max_relative = 1e-9);
            assert_relative_eq!(el2.e, el.e, epsilon = 1e-9);
            assert_relative_eq!(el2.i, el.i, epsilon = 1e-9);
            // Full element round trip: re-propagating from the recovered set
            // must reproduce the state.
            let s2 = kep_to_cart(&el2, t, &c).unwrap();
            assert!((s2.r - s.r).norm() < 1e-9 * s.r.norm());
            assert!((s2.v - s.v).norm() < 1e-9 * s.v.norm());
        }
    }

    #[test]
    fn equinoctial_cartesian_matches_keplerian_route() {
        let c = consts();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let el = random_elements(&mut rng);
            let x = kep_to_mee(&el, &c).unwrap();
            let (r_mee, v_mee) = mee_to_cart(&x, &c);
            let s = kep_to_cart(&el, el.ref_epoch, &c).unwrap();
            assert!((r_mee - s.r).norm() < 1e-9 * s.r.norm());
            assert!((v_mee - s.v).norm() < 1e-9 * s.v.norm());
        }
    }

    #[test]
    fn invalid_elements_are_rejected() {
        let el = KeplerianElements {
            a_au: -1.0,
            e: 0.5,
            i: 0.1,
            raan: 0.0,
            argp: 0.0,
            m0: 0.0,
            ref_epoch: Epoch::new(95739.0),
        };
        assert!(el.validate().is_err());
        let el = KeplerianElements {
            a_au: 1.0,
            e: 1.2,
            ..el
        };
        assert!(el.validate().is_err());
    }
}
