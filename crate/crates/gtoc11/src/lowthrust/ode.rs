//! Adaptive explicit Runge-Kutta 5(4) (Dormand-Prince pair, FSAL) over flat
//! f64 state slices, with an error-per-step controller.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 200_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 4th-order weights for the embedded error estimate.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate dy/dt = rhs(t, y) from t0 to tf (either direction).  Calls
/// `observe(t, y)` after every accepted step (and once at t0).
pub fn integrate_observed<F, O>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    tf: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    O: FnMut(f64, &[f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    observe(t, &y);
    if t0 == tf {
        return Ok(y);
    }
    let dir = (tf - t0).signum();
    let span = (tf - t0).abs();
    let mut h = dir * (span / 100.0).min(0.1).max(span * 1e-12);

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    // Error weights: 5th-order minus embedded 4th-order coefficients.
    let e_w: [f64; 7] = std::array::from_fn(|j| (if j < 6 { A[6][j] } else { 0.0 }) - B4[j]);
    rhs(t, &y, &mut k[0])?;

    for _ in 0..opts.max_steps {
        if (t - tf).abs() <= 1e-14 * span.max(1.0) {
            observe(t, &y);
            return Ok(y);
        }
        // Do not step past the end point.
        if (t + h - tf) * dir > 0.0 {
            h = tf - t;
        }
        if h.abs() < 1e-15 * t.abs().max(1.0) {
            return Err(Error::OdeStepUnderflow(t));
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            rhs(t + C[s] * h, &ytmp, &mut tail[0])?;
        }
        // Stage 7 input is the 5th-order solution itself (FSAL).
        ynew.copy_from_slice(&ytmp);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut de = 0.0;
            for (j, kj) in k.iter().enumerate() {
                de += e_w[j] * kj[i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            let e = h * de / scale;
            err += e * e;
        }
        let err = (err / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&ynew);
            k.swap(0, 6); // FSAL: last stage becomes first of next step
            observe(t, &y);
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Err(Error::OdeMaxSteps {
        max_steps: opts.max_steps,
        t,
    })
}

/// Integrate without observation.
pub fn integrate<F>(rhs: F, y0: &[f64], t0: f64, tf: f64, opts: &OdeOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    integrate_observed(rhs, y0, t0, tf, opts, |_, _| {})
}
