//! Analytic circle-to-circle low-thrust transfer estimate (combined radius
//! and plane change under continuous acceleration), plus the linear mass
//! decay applied to an asteroid while its drive is running.

use super::Constants;
use crate::{Error, Result};

/// Relative inclination between two orbit planes given (i, raan) of each,
/// by the spherical law of cosines.  Result in [0, pi].
pub fn plane_change_angle(i1: f64, raan1: f64, i2: f64, raan2: f64) -> f64 {
    let c = i1.cos() * i2.cos() + i1.sin() * i2.sin() * (raan1 - raan2).cos();
    c.clamp(-1.0, 1.0).acos()
}

/// Velocity increment and duration of a continuous-thrust spiral between two
/// circular orbits `a_from` -> `a_to` (AU) with total plane change `di` (rad),
/// flown at the asteroid drive's fixed acceleration.
///
/// dv = sqrt(v0^2 - 2 v0 v1 cos(pi/2 di) + v1^2); tof = dv / f.
pub fn edelbaum(a_from_au: f64, a_to_au: f64, di: f64, c: &Constants) -> (f64, f64) {
    let v0 = (c.mu_sun / (a_from_au * c.au)).sqrt();
    let v1 = (c.mu_sun / (a_to_au * c.au)).sqrt();
    let dv = (v0 * v0 - 2.0 * v0 * v1 * (std::f64::consts::FRAC_PI_2 * di).cos() + v1 * v1)
        .max(0.0)
        .sqrt();
    (dv, dv / c.f_atd_kms2())
}

/// Asteroid mass remaining after its drive has run for `dt_s` seconds:
/// m = m0 (1 - alpha dt).  Errors once the decay factor reaches zero.
pub fn asteroid_mass(m0: f64, dt_s: f64, alpha: f64) -> Result<f64> {
    let burn = alpha * dt_s;
    if burn >= 1.0 {
        return Err(Error::MassDepleted(burn));
    }
    Ok(m0 * (1.0 - burn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coplanar_small_raise_matches_direct_evaluation() {
        let c = Constants::default();
        let (dv, tof) = edelbaum(1.0, 1.05, 0.0, &c);
        assert_relative_eq!(dv, 0.717808900415907, max_relative = 1e-12);
        assert_relative_eq!(tof / c.day, 83.0797338444, max_relative = 1e-10);
        // Coplanar case reduces to the circular speed difference (up to the
        // cancellation noise of the squared form).
        let v0 = (c.mu_sun / c.au).sqrt();
        let v1 = (c.mu_sun / (1.05 * c.au)).sqrt();
        assert_relative_eq!(dv, (v0 - v1).abs(), max_relative = 1e-10);
    }

    #[test]
    fn cost_is_symmetric_and_grows_with_plane_change() {
        let c = Constants::default();
        let (fwd, _) = edelbaum(0.9, 1.4, 0.2, &c);
        let (bwd, _) = edelbaum(1.4, 0.9, 0.2, &c);
        assert_relative_eq!(fwd, bwd, max_relative = 1e-14);
        let mut last = 0.0;
        for k in 0..10 {
            let (dv, _) = edelbaum(1.0, 1.05, 0.05 * k as f64, &c);
            assert!(dv > last);
            last = dv;
        }
    }

    #[test]
    fn plane_angle_special_cases() {
        assert_relative_eq!(plane_change_angle(0.3, 1.0, 0.3, 1.0), 0.0, epsilon = 1e-12);
        // Same inclination, opposite nodes: planes tilt away by 2i.
        assert_relative_eq!(
            plane_change_angle(0.1, 0.0, 0.1, std::f64::consts::PI),
            0.2,
            epsilon = 1e-12
        );
        // Equatorial orbit: node of the other plane is irrelevant.
        assert_relative_eq!(
            plane_change_angle(0.0, 2.0, 0.25, 5.0),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mass_decay_is_linear_until_depletion() {
        let m = asteroid_mass(1.0e15, 1.0e8, 6.0e-9).unwrap();
        assert_relative_eq!(m, 1.0e15 * (1.0 - 0.6), max_relative = 1e-14);
        match asteroid_mass(1.0e15, 2.0e8, 6.0e-9) {
            Err(Error::MassDepleted(b)) => assert!(b >= 1.0),
            other => panic!("expected depletion, got {other:?}"),
        }
    }
}
