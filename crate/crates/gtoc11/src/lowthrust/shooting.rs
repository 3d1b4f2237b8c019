//! Damped Newton on a square nonlinear system with forward-difference
//! Jacobians and a backtracking line search.  Residual evaluations are
//! allowed to fail (e.g. integration through a singular arc); failures during
//! probing count as "worse" and shrink the step.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Convergence threshold on the residual infinity norm.
    pub tol: f64,
    pub max_iters: usize,
    /// Forward-difference step, scaled by max(1, |x_i|).
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iters: 40,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iters: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn newton_fd<F>(f: &F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x)?;
    if r.len() != n {
        return Err(Error::InvalidArgument(format!(
            "shooting system must be square: {} unknowns, {} residuals",
            n,
            r.len()
        )));
    }

    for iter in 0..opts.max_iters {
        let rnorm_inf = inf_norm(&r);
        if rnorm_inf < opts.tol {
            return Ok(NewtonOutcome {
                x,
                residual_norm: rnorm_inf,
                iters: iter,
            });
        }

        // Forward-difference Jacobian, column by column.
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            let h = opts.fd_step * x[i].abs().max(1.0);
            let mut xh = x.clone();
            xh[i] += h;
            let rh = match f(&xh) {
                Ok(v) => v,
                Err(_) => {
                    // Probe on the other side instead.
                    xh[i] = x[i] - h;
                    let rm = f(&xh).map_err(|_| Error::ShootingNonConvergence {
                        residual: rnorm_inf,
                        iters: iter,
                    })?;
                    for j in 0..n {
                        jac[(j, i)] = (r[j] - rm[j]) / h;
                    }
                    continue;
                }
            };
            for j in 0..n {
                jac[(j, i)] = (rh[j] - r[j]) / h;
            }
        }

        let d = jac
            .lu()
            .solve(&(-DVector::from_column_slice(&r)))
            .ok_or(Error::ShootingNonConvergence {
                residual: rnorm_inf,
                iters: iter,
            })?;

        // Backtracking on the 2-norm.
        let r2 = two_norm(&r);
        let mut t = 1.0f64;
        let mut accepted = false;
        while t >= 1.0 / 1024.0 {
            let xt: Vec<f64> = (0..n).map(|i| x[i] + t * d[i]).collect();
            match f(&xt) {
                Ok(rt) if two_norm(&rt) < (1.0 - 1e-4 * t) * r2 => {
                    x = xt;
                    r = rt;
                    accepted = true;
                    break;
                }
                _ => t *= 0.5,
            }
        }
        if !accepted {
            return Err(Error::ShootingNonConvergence {
                residual: rnorm_inf,
                iters: iter,
            });
        }
    }
    let rnorm = inf_norm(&r);
    if rnorm < opts.tol {
        Ok(NewtonOutcome {
            x,
            residual_norm: rnorm,
            iters: opts.max_iters,
        })
    } else {
        Err(Error::ShootingNonConvergence {
            residual: rnorm,
            iters: opts.max_iters,
        })
    }
}
