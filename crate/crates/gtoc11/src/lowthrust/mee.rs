//! Equinoctial Gauss variational equations ẋ = A(x) + B(x)·u and the
//! associated optimal-control law and Hamiltonians, in canonical units
//! (mu = 1).  Everything is generic over [`Real`] so the same expressions
//! produce values (f64) and gradients (Dual6).

use super::dual::{Dual6, Real};
use crate::{Error, Result, V3};

/// Drift vector A and control-input matrix B at state x = [p,f,g,h,k,L].
/// Control axes are radial / transverse / normal.
pub fn gauss_ab<A: Real>(x: &[A; 6]) -> ([A; 6], [[A; 3]; 6]) {
    let one = A::from_f64(1.0);
    let zero = A::from_f64(0.0);
    let two = A::from_f64(2.0);
    let (p, f, g, h, k, l) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let sl = l.sin();
    let cl = l.cos();
    let w = one + f * cl + g * sl;
    let s2 = one + h * h + k * k;
    let sqp = p.sqrt(); // sqrt(p/mu) with mu = 1
    let hk = h * sl - k * cl;

    let a = [zero, zero, zero, zero, zero, sqp * (w / p) * (w / p)];

    let b = [
        [zero, sqp * two * p / w, zero],
        [
            sqp * sl,
            sqp * ((w + one) * cl + f) / w,
            -(sqp * g * hk / w),
        ],
        [
            -(sqp * cl),
            sqp * ((w + one) * sl + g) / w,
            sqp * f * hk / w,
        ],
        [zero, zero, sqp * s2 * cl / (two * w)],
        [zero, zero, sqp * s2 * sl / (two * w)],
        [zero, zero, sqp * hk / w],
    ];
    (a, b)
}

/// B(x)ᵀ λ as a 3-vector.
pub fn bt_lambda(b: &[[f64; 3]; 6], lam: &[f64; 6]) -> V3 {
    let mut out = V3::zeros();
    for i in 0..6 {
        for j in 0..3 {
            out[j] += b[i][j] * lam[i];
        }
    }
    out
}

/// Primer-vector control: thrust direction opposite Bᵀλ, ratio equal to its
/// norm (energy problem) — the time-optimal problem uses the same direction
/// with ratio 1.
pub fn optimal_control(x: &[f64; 6], lam: &[f64; 6]) -> Result<(V3, f64)> {
    let (_, b) = gauss_ab(x);
    let bt = bt_lambda(&b, lam);
    let n = bt.norm();
    if n < 1e-14 {
        return Err(Error::SingularArc);
    }
    Ok((-bt / n, n))
}

/// Which variant of the control/costate coupling is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Smooth problem: u = -f·Bᵀλ; costate rates neglect the control term.
    Energy,
    /// u = f·α̂, τ ≡ 1; costate rates carry the full Hamiltonian gradient.
    TimeOptimal,
}

/// Right-hand side of the augmented 12-state system y = [x; λ] plus an
/// optional 13th quadrature slot accumulating ∫τ dt (energy problem only,
/// used for the flight-time fixed point).  `f_acc` is the canonical drive
/// acceleration.
pub fn augmented_rhs(problem: Problem, y: &[f64], f_acc: f64, dy: &mut [f64]) -> Result<()> {
    let x: &[f64; 6] = y[0..6].try_into().expect("state slice");
    let lam: &[f64; 6] = y[6..12].try_into().expect("costate slice");

    // Control from the real-valued evaluation.
    let (_, b) = gauss_ab(x);
    let bt = bt_lambda(&b, lam);
    let nbt = bt.norm();
    // Thrust acceleration vector u (canonical) and the (direction, ratio)
    // entering the costate gradient term.
    let (u, tau, alpha): (V3, f64, V3) = match problem {
        Problem::Energy => (-f_acc * bt, nbt, if nbt > 0.0 { -bt / nbt } else { V3::zeros() }),
        Problem::TimeOptimal => {
            if nbt < 1e-14 {
                return Err(Error::SingularArc);
            }
            let alpha = -bt / nbt;
            (f_acc * alpha, 1.0, alpha)
        }
    };

    // Dual evaluation: S(x) = λᵀA(x) [+ f τ λᵀ B(x) α̂ for the time-optimal
    // problem], with λ, α̂, τ held fixed.  λ̇ = -∂S/∂x (envelope theorem: the
    // maximizing α̂ may be treated as a constant).
    let xd: [Dual6; 6] = std::array::from_fn(|i| Dual6::variable(x[i], i));
    let (ad, bd) = gauss_ab(&xd);
    let mut s = Dual6::constant(0.0);
    for i in 0..6 {
        s = s + Dual6::constant(lam[i]) * ad[i];
    }
    if problem == Problem::TimeOptimal {
        for i in 0..6 {
            let mut row = Dual6::constant(0.0);
            for j in 0..3 {
                row = row + bd[i][j] * Dual6::constant(alpha[j]);
            }
            s = s + Dual6::constant(f_acc * tau * lam[i]) * row;
        }
    }

    for i in 0..6 {
        let mut bu = 0.0;
        for j in 0..3 {
            bu += b[i][j] * u[j];
        }
        dy[i] = ad[i].re + bu;
        dy[6 + i] = -s.eps[i];
    }
    if dy.len() > 12 {
        // Quadrature: ∫ τ dt, so that Δv = f · quad.
        dy[12] = tau;
    }
    Ok(())
}

/// Hamiltonian of the time-optimal problem: H = 1 + λᵀA - f‖Bᵀλ‖.
pub fn hamiltonian_time_optimal(x: &[f64; 6], lam: &[f64; 6], f_acc: f64) -> f64 {
    let (a, b) = gauss_ab(x);
    let mut lam_a = 0.0;
    for i in 0..6 {
        lam_a += lam[i] * a[i];
    }
    1.0 + lam_a - f_acc * bt_lambda(&b, lam).norm()
}

/// Hamiltonian of the energy problem at control (α̂, τ):
/// H = (f/2)τ² + λᵀ(A + f τ B α̂).
pub fn hamiltonian_energy(x: &[f64; 6], lam: &[f64; 6], f_acc: f64, alpha: &V3, tau: f64) -> f64 {
    let (a, b) = gauss_ab(x);
    let mut h = 0.5 * f_acc * tau * tau;
    for i in 0..6 {
        let mut bu = 0.0;
        for j in 0..3 {
            bu += b[i][j] * alpha[j];
        }
        h += lam[i] * (a[i] + f_acc * tau * bu);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn random_state(rng: &mut impl Rng) -> [f64; 6] {
        [
            rng.gen_range(0.7..1.8),
            rng.gen_range(-0.1..0.1),
            rng.gen_range(-0.1..0.1),
            rng.gen_range(-0.08..0.08),
            rng.gen_range(-0.08..0.08),
            rng.gen_range(0.0..20.0),
        ]
    }

    #[test]
    fn keplerian_coast_only_advances_longitude() {
        let x = [1.0, 0.0, 0.0, 0.0, 0.0, 0.3];
        let lam = [0.0; 6];
        let mut dy = [0.0; 12];
        augmented_rhs(Problem::Energy, &{
            let mut y = [0.0; 12];
            y[..6].copy_from_slice(&x);
            y[6..].copy_from_slice(&lam);
            y
        }, 0.016863, &mut dy)
        .unwrap();
        for (i, d) in dy.iter().take(5).enumerate() {
            assert_eq!(*d, 0.0, "slow element {i} must not drift on a coast");
        }
        // Circular orbit at p=1, mu=1: L̇ = sqrt(mu p) (w/p)^2 = 1.
        assert_relative_eq!(dy[5], 1.0, max_relative = 1e-14);
        // Zero costates stay zero.
        for d in &dy[6..12] {
            assert_eq!(*d, 0.0);
        }
    }

    #[test]
    fn control_is_unit_and_homogeneous() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for _ in 0..50 {
            let x = random_state(&mut rng);
            let lam: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let (alpha, tau) = optimal_control(&x, &lam).unwrap();
            assert_relative_eq!(alpha.norm(), 1.0, epsilon = 1e-14);
            let lam2: [f64; 6] = std::array::from_fn(|i| 3.7 * lam[i]);
            let (alpha2, tau2) = optimal_control(&x, &lam2).unwrap();
            assert!((alpha - alpha2).norm() < 1e-12);
            assert_relative_eq!(tau2, 3.7 * tau, max_relative = 1e-12);
        }
    }

    #[test]
    fn control_minimizes_the_hamiltonian_over_probes() {
        let f_acc = 0.016863168902814075;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let x = random_state(&mut rng);
            let lam: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let (alpha, tau) = optimal_control(&x, &lam).unwrap();
            let h_star = hamiltonian_energy(&x, &lam, f_acc, &alpha, tau);
            for _ in 0..100 {
                let v = V3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                if v.norm() < 1e-6 {
                    continue;
                }
                let probe_alpha = v / v.norm();
                let probe_tau = rng.gen_range(0.0..2.0 * tau.max(1.0));
                let h = hamiltonian_energy(&x, &lam, f_acc, &probe_alpha, probe_tau);
                assert!(
                    h_star <= h + 1e-12,
                    "control failed minimality: {h_star} > {h}"
                );
            }
        }
    }

    #[test]
    fn costate_rates_match_finite_differences_of_the_hamiltonian() {
        let f_acc = 0.016863168902814075;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..25 {
            let x = random_state(&mut rng);
            let lam: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.9..0.9));
            let mut y = [0.0; 12];
            y[..6].copy_from_slice(&x);
            y[6..].copy_from_slice(&lam);
            let mut dy = [0.0; 12];
            if augmented_rhs(Problem::TimeOptimal, &y, f_acc, &mut dy).is_err() {
                continue;
            }
            // λ̇_i must equal -∂H/∂x_i, H evaluated with the control
            // re-optimized at each probe (Danskin: same gradient).
            for i in 0..6 {
                let h = 1e-6 * x[i].abs().max(1.0);
                let mut xp = x;
                xp[i] += h;
                let mut xm = x;
                xm[i] -= h;
                let hp = hamiltonian_time_optimal(&xp, &lam, f_acc);
                let hm = hamiltonian_time_optimal(&xm, &lam, f_acc);
                let fd = -(hp - hm) / (2.0 * h);
                // Central differences of an O(1) Hamiltonian carry ~1e-10
                // absolute cancellation noise at this step size, so tiny
                // rates are compared against a floor rather than relatively.
                let scale = fd.abs().max(dy[6 + i].abs()).max(1e-3);
                assert!(
                    (dy[6 + i] - fd).abs() / scale < 1e-6,
                    "costate rate {i}: ad={} fd={}",
                    dy[6 + i],
                    fd
                );
            }
        }
    }

    #[test]
    fn zero_costates_have_zero_rates_under_energy_dynamics() {
        let x = [1.2, 0.03, -0.02, 0.01, 0.02, 5.0];
        let mut y = [0.0; 12];
        y[..6].copy_from_slice(&x);
        let mut dy = [0.0; 12];
        augmented_rhs(Problem::Energy, &y, 0.0168, &mut dy).unwrap();
        for d in &dy[6..12] {
            assert_eq!(*d, 0.0);
        }
    }

    #[test]
    fn vanishing_primer_vector_is_a_singular_arc() {
        let x = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let lam = [0.0; 6];
        assert!(matches!(
            optimal_control(&x, &lam),
            Err(Error::SingularArc)
        ));
        let mut y = [0.0; 12];
        y[..6].copy_from_slice(&x);
        let mut dy = [0.0; 12];
        assert!(matches!(
            augmented_rhs(Problem::TimeOptimal, &y, 0.0168, &mut dy),
            Err(Error::SingularArc)
        ));
    }
}
